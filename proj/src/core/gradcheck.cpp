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

#include "kpe/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kpe/error.hpp"

namespace kpe {

namespace {

double evaluate(const LossFn& loss_fn) {
  Tape tape(false);
  Var loss = loss_fn(tape);
  if (loss.value().size() != 1) throw ShapeError("gradient check loss must be a scalar");
  return loss.value()[0];
}

std::vector<std::size_t> pick_coordinates(const Tensor& analytic, std::size_t budget, std::mt19937_64& rng) {
  std::vector<std::size_t> all(analytic.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (budget == 0 || budget >= all.size()) return all;
  const std::size_t top = budget / 2;
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top), all.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ga = std::abs(analytic[a]), gb = std::abs(analytic[b]);
                      return ga != gb ? ga > gb : a < b;
                    });
  std::vector<std::size_t> chosen(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top));
  std::vector<std::size_t> rest(all.begin() + static_cast<std::ptrdiff_t>(top), all.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  chosen.insert(chosen.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(budget - top));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

GradCheckReport finite_difference_check(const LossFn& loss_fn, ParameterRegistry& registry,
                                        const GradCheckOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("gradient check epsilon must be positive");
  const double base = evaluate(loss_fn);
  if (evaluate(loss_fn) != base) throw Error("gradient check: loss function is not deterministic");

  registry.zero_grad();
  {
    Tape tape(false);
    Var loss = loss_fn(tape);
    tape.backward(loss);
    tape.accumulate_into(registry);
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  for (Parameter* p : registry.all()) {
    const Tensor analytic = p->grad;
    ParameterGradError entry;
    entry.name = p->name;
    for (std::size_t idx : pick_coordinates(analytic, options.max_coords_per_param, rng)) {
      const double saved = p->value[idx];
      p->value[idx] = saved + options.epsilon;
      const double plus = evaluate(loss_fn);
      p->value[idx] = saved - options.epsilon;
      const double minus = evaluate(loss_fn);
      p->value[idx] = saved;
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++entry.coords_checked;
      if (rel > entry.max_rel_error || entry.coords_checked == 1) {
        entry.max_rel_error = rel;
        entry.worst_index = idx;
        entry.analytic = a;
        entry.numeric = numeric;
      }
    }
    if (entry.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = entry.max_rel_error;
      report.worst_parameter = entry.name;
    }
    report.parameters.push_back(std::move(entry));
  }
  registry.clear_grad();
  return report;
}

}  // namespace kpe
