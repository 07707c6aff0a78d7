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

#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "kpe/autodiff.hpp"

namespace kpe {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are keyed by parameter name so
// the optimizer survives registry copies.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  // Applies one update to every parameter and releases the gradients.
  // Throws naming the first parameter whose gradient is missing.
  void step(ParameterRegistry& registry, double learning_rate);

  std::size_t steps() const { return step_; }

 private:
  struct Moments {
    Tensor first;
    Tensor second;
  };
  AdamConfig config_;
  std::map<std::string, Moments, std::less<>> moments_;
  std::size_t step_ = 0;
};

}  // namespace kpe
