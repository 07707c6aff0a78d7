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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kpe/autodiff.hpp"

namespace kpe {

struct GradCheckOptions {
  double epsilon = 1e-5;
  // 0 checks every coordinate. Otherwise half the budget goes to the
  // coordinates with the largest analytic gradient, half to a seeded sample.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
  // Denominator floor for the relative error so that coordinates whose true
  // gradient is ~0 are judged on absolute error.
  double abs_floor = 1e-6;
};

struct ParameterGradError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<ParameterGradError> parameters;
  double max_rel_error = 0.0;
  std::string worst_parameter;
};

// Builds the loss on the given (non-training) tape.
using LossFn = std::function<Var(Tape&)>;

// Compares tape gradients against central differences. The loss must be
// deterministic; two identical evaluations that disagree raise an Error.
// Parameter values are restored exactly and gradients are cleared on return.
GradCheckReport finite_difference_check(const LossFn& loss_fn, ParameterRegistry& registry,
                                        const GradCheckOptions& options = {});

}  // namespace kpe
