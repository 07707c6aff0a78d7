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
#include <random>
#include <string>
#include <vector>

#include "kpe/autodiff.hpp"

// Layers assembled from the autodiff primitives. Each layer records the
// names of its parameters and resolves them in a registry at call time, so
// a copied registry (best-epoch snapshot, loaded checkpoint) can be used
// with the same layer objects.
namespace kpe::nn {

// U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

struct Linear {
  std::string weight;
  std::string bias;
  std::size_t in = 0;
  std::size_t out = 0;

  static Linear create(ParameterRegistry& registry, const std::string& prefix, std::size_t in,
                       std::size_t out, std::mt19937_64& rng);
  Var operator()(Tape& tape, const ParameterRegistry& registry, Var x) const;
};

struct LayerNorm {
  std::string gain;
  std::string bias;

  static LayerNorm create(ParameterRegistry& registry, const std::string& prefix, std::size_t width);
  Var operator()(Tape& tape, const ParameterRegistry& registry, Var x) const;
};

// LayerNorm(x + Dropout(MultiHead(x))). Keys at rows >= valid_rows are
// masked out of every attention distribution.
struct MultiHeadSelfAttention {
  Linear query;
  Linear key;
  Linear value;
  Linear output;
  LayerNorm norm;
  std::size_t heads = 1;
  double dropout = 0.0;

  static MultiHeadSelfAttention create(ParameterRegistry& registry, const std::string& prefix,
                                       std::size_t width, std::size_t heads, double dropout,
                                       std::mt19937_64& rng);
  Var operator()(Tape& tape, const ParameterRegistry& registry, Var x, std::size_t valid_rows) const;
};

// Self-attention sublayer followed by a position-wise relu feedforward
// sublayer, each with a residual connection and layer norm.
struct TransformerBlock {
  MultiHeadSelfAttention attention;
  Linear ff_in;
  Linear ff_out;
  LayerNorm norm;
  double dropout = 0.0;

  static TransformerBlock create(ParameterRegistry& registry, const std::string& prefix,
                                 std::size_t width, std::size_t heads, std::size_t ff_hidden,
                                 double dropout, std::mt19937_64& rng);
  Var operator()(Tape& tape, const ParameterRegistry& registry, Var x, std::size_t valid_rows) const;
};

}  // namespace kpe::nn
