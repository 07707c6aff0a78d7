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

#include "kpe/nn.hpp"

#include <cmath>

#include "kpe/error.hpp"

namespace kpe::nn {

Tensor xavier_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> unif(-a, a);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = unif(rng);
  return t;
}

Linear Linear::create(ParameterRegistry& registry, const std::string& prefix, std::size_t in,
                      std::size_t out, std::mt19937_64& rng) {
  Linear l{prefix + ".weight", prefix + ".bias", in, out};
  registry.add(l.weight, xavier_uniform({in, out}, in, out, rng));
  registry.add(l.bias, Tensor({out}, 0.0));
  return l;
}

Var Linear::operator()(Tape& tape, const ParameterRegistry& registry, Var x) const {
  Var w = tape.parameter(registry.at(weight));
  Var b = tape.parameter(registry.at(bias));
  return ops::add_row(ops::matmul(x, w), b);
}

LayerNorm LayerNorm::create(ParameterRegistry& registry, const std::string& prefix, std::size_t width) {
  LayerNorm n{prefix + ".gain", prefix + ".bias"};
  registry.add(n.gain, Tensor({width}, 1.0));
  registry.add(n.bias, Tensor({width}, 0.0));
  return n;
}

Var LayerNorm::operator()(Tape& tape, const ParameterRegistry& registry, Var x) const {
  return ops::layer_norm(x, tape.parameter(registry.at(gain)), tape.parameter(registry.at(bias)));
}

MultiHeadSelfAttention MultiHeadSelfAttention::create(ParameterRegistry& registry, const std::string& prefix,
                                                      std::size_t width, std::size_t heads, double dropout,
                                                      std::mt19937_64& rng) {
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("attention width " + std::to_string(width) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  MultiHeadSelfAttention a;
  a.query = Linear::create(registry, prefix + ".query", width, width, rng);
  a.key = Linear::create(registry, prefix + ".key", width, width, rng);
  a.value = Linear::create(registry, prefix + ".value", width, width, rng);
  a.output = Linear::create(registry, prefix + ".output", width, width, rng);
  a.norm = LayerNorm::create(registry, prefix + ".norm", width);
  a.heads = heads;
  a.dropout = dropout;
  return a;
}

Var MultiHeadSelfAttention::operator()(Tape& tape, const ParameterRegistry& registry, Var x,
                                       std::size_t valid_rows) const {
  const std::size_t width = x.cols();
  if (width % heads != 0) throw ConfigError("attention width is not divisible by head count");
  const std::size_t head_dim = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Var q = query(tape, registry, x);
  Var k = key(tape, registry, x);
  Var v = value(tape, registry, x);

  std::vector<Var> head_out;
  head_out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = ops::slice_cols(q, h * head_dim, head_dim);
    Var kh = ops::slice_cols(k, h * head_dim, head_dim);
    Var vh = ops::slice_cols(v, h * head_dim, head_dim);
    Var weights = ops::softmax_rows(ops::scale(ops::matmul_nt(qh, kh), scale), valid_rows);
    head_out.push_back(ops::matmul(weights, vh));
  }
  Var mixed = heads == 1 ? head_out.front() : ops::concat_cols(head_out);
  Var projected = ops::dropout(output(tape, registry, mixed), dropout);
  return norm(tape, registry, ops::add(x, projected));
}

TransformerBlock TransformerBlock::create(ParameterRegistry& registry, const std::string& prefix,
                                          std::size_t width, std::size_t heads, std::size_t ff_hidden,
                                          double dropout, std::mt19937_64& rng) {
  TransformerBlock b;
  b.attention = MultiHeadSelfAttention::create(registry, prefix + ".attention", width, heads, dropout, rng);
  b.ff_in = Linear::create(registry, prefix + ".ff_in", width, ff_hidden, rng);
  b.ff_out = Linear::create(registry, prefix + ".ff_out", ff_hidden, width, rng);
  b.norm = LayerNorm::create(registry, prefix + ".ff_norm", width);
  b.dropout = dropout;
  return b;
}

Var TransformerBlock::operator()(Tape& tape, const ParameterRegistry& registry, Var x,
                                 std::size_t valid_rows) const {
  Var a = attention(tape, registry, x, valid_rows);
  Var hidden = ops::relu(ff_in(tape, registry, a));
  Var f = ops::dropout(ff_out(tape, registry, hidden), dropout);
  return norm(tape, registry, ops::add(a, f));
}

}  // namespace kpe::nn
