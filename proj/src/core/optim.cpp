// Copyright 2026 The kpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kpe/optim.hpp"

#include <cmath>
#include <utility>

#include "kpe/error.hpp"

namespace kpe {

void AdamOptimizer::step(ParameterRegistry& registry, double learning_rate) {
  for (const Parameter* p : std::as_const(registry).all()) {
    if (!p->grad.same_shape(p->value)) throw Error("missing gradient for parameter '" + p->name + "'");
    require_finite(p->grad, "gradient of '" + p->name + "'");
  }
  ++step_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (Parameter* p : registry.all()) {
    auto [it, inserted] = moments_.try_emplace(p->name);
    Moments& m = it->second;
    if (inserted || !m.first.same_shape(p->value)) {
      m.first = Tensor(p->value.shape(), 0.0);
      m.second = Tensor(p->value.shape(), 0.0);
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      m.first[i] = config_.beta1 * m.first[i] + (1.0 - config_.beta1) * g;
      m.second[i] = config_.beta2 * m.second[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m.first[i] / bias1;
      const double v_hat = m.second[i] / bias2;
      p->value[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
  registry.clear_grad();
}

}  // namespace kpe
