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
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpe/tensor.hpp"

namespace kpe {

struct Parameter {
  std::string name;
  Tensor value;
  // Empty until zero_grad() or the first accumulation.
  Tensor grad;
};

// Owns every trainable tensor of a model under a unique slash-free dotted
// name ("cnn.k3.weight"). Iteration order is insertion order, which is also
// the checkpoint record order.
class ParameterRegistry {
 public:
  ParameterRegistry() = default;
  ParameterRegistry(const ParameterRegistry& other);
  ParameterRegistry& operator=(const ParameterRegistry& other);
  ParameterRegistry(ParameterRegistry&&) noexcept = default;
  ParameterRegistry& operator=(ParameterRegistry&&) noexcept = default;

  Parameter& add(std::string name, Tensor init);

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::vector<std::string> names() const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  // Allocates zero gradients of matching shape for every parameter.
  void zero_grad();
  // Releases gradients; a later optimizer step without backward fails loudly.
  void clear_grad();

  // Mutable handle for a parameter this registry owns, or nullptr.
  Parameter* owner_of(const Parameter* p);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode computation record. Nodes are appended in evaluation order,
// which is a topological order, so backward is a single reverse sweep.
//
// Parameter leaves reference the registry's value without copying; their
// gradients are accumulated on the tape and handed to the registry with
// accumulate_into(), which keeps forward passes const with respect to the
// model and lets several tapes read one frozen registry concurrently.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  explicit Tape(bool training = false, std::mt19937_64* rng = nullptr)
      : training_(training), rng_(rng) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(const Parameter& p);
  // Appends an op node. `backward` runs only if some input requires grad.
  Var record(Tensor value, std::vector<int> inputs, BackwardFn backward);

  const Tensor& value(int id) const;
  // Lazily allocated to zeros on first access.
  Tensor& grad(int id);
  bool has_grad(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  // Seeds d(loss)=1 and sweeps the tape in reverse. `loss` must be 1 x 1.
  void backward(Var loss);
  std::size_t backward_visits() const { return backward_visits_; }

  // Adds scale * (gradient of every parameter leaf) into the owning
  // parameters of `registry`.
  void accumulate_into(ParameterRegistry& registry, double scale = 1.0) const;

  bool training() const { return training_; }
  std::mt19937_64& rng();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    const Parameter* param = nullptr;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  bool training_;
  std::mt19937_64* rng_;
  std::size_t backward_visits_ = 0;
};

// Differentiable primitives. Shapes are validated eagerly and reported as
// ShapeError.
namespace ops {

// a[n x m] * b[m x p]
Var matmul(Var a, Var b);
// a[n x m] * b[p x m]^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
// Adds a length-c bias to every row of an n x c matrix.
Var add_row(Var a, Var bias);
Var scale(Var a, double s);
Var relu(Var a);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

// Stride-1 valid convolution over rows. x is n x D, weight is (k*D) x F with
// rows [t*D, (t+1)*D) holding the filter tap for offset t, bias has length F.
// Output row j depends only on input rows j..j+k-1. Throws ShapeError when
// n < k (the output would be empty).
Var conv1d(Var x, Var weight, Var bias, std::size_t window);

Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

// Inverted dropout. Identity when p == 0 or the tape is not training.
Var dropout(Var x, double p);

// Row-wise softmax over the first `valid_cols` columns; the rest are 0.
Var softmax_rows(Var a, std::size_t valid_cols);

// Gathers rows of `table` (V x d) by index.
Var embedding_lookup(Var table, std::span<const std::size_t> indices);

// Joint softmax over all entries of `logits` (any shape, flattened) followed
// by cross-entropy against `target`. Entries with mask == 0 are excluded from
// the normalizer and get probability exactly 0. Returns a 1 x 1 loss.
Var softmax_cross_entropy(Var logits, std::span<const double> target,
                          std::span<const std::uint8_t> mask = {});

}  // namespace ops

// Value-level softmax cross-entropy used by the span losses and tests.
struct CrossEntropyResult {
  double loss = 0.0;
  std::vector<double> probabilities;
  // d loss / d logits == probabilities - target (0 on masked entries).
  std::vector<double> gradient;
};

CrossEntropyResult softmax_cross_entropy(std::span<const double> logits,
                                         std::span<const double> target,
                                         std::span<const std::uint8_t> mask = {});

// Max-subtracted softmax over unmasked entries; masked entries get 0.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const std::uint8_t> mask = {});

}  // namespace kpe
