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

#include "kpe/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kpe/error.hpp"
#include "kpe/simd.hpp"

namespace kpe {

// ---------------------------------------------------------------------------
// ParameterRegistry

ParameterRegistry::ParameterRegistry(const ParameterRegistry& other) : index_(other.index_) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back(std::make_unique<Parameter>(*p));
}

ParameterRegistry& ParameterRegistry::operator=(const ParameterRegistry& other) {
  if (this != &other) {
    ParameterRegistry copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Parameter& ParameterRegistry::add(std::string name, Tensor init) {
  if (name.empty()) throw ConfigError("parameter name must not be empty");
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.push_back(std::make_unique<Parameter>(Parameter{std::move(name), std::move(init), {}}));
  return *params_.back();
}

Parameter& ParameterRegistry::at(std::string_view name) {
  Parameter* p = find(name);
  if (!p) throw ConfigError("unknown parameter: " + std::string(name));
  return *p;
}

const Parameter& ParameterRegistry::at(std::string_view name) const {
  const Parameter* p = find(name);
  if (!p) throw ConfigError("unknown parameter: " + std::string(name));
  return *p;
}

Parameter* ParameterRegistry::find(std::string_view name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParameterRegistry::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParameterRegistry::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<std::string> ParameterRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->name);
  return out;
}

std::vector<Parameter*> ParameterRegistry::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterRegistry::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterRegistry::zero_grad() {
  for (auto& p : params_) {
    if (p->grad.same_shape(p->value)) {
      p->grad.fill(0.0);
    } else {
      p->grad = Tensor(p->value.shape(), 0.0);
    }
  }
}

void ParameterRegistry::clear_grad() {
  for (auto& p : params_) p->grad = Tensor();
}

Parameter* ParameterRegistry::owner_of(const Parameter* p) {
  if (!p) return nullptr;
  Parameter* mine = find(p->name);
  return mine == p ? mine : nullptr;
}

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(const Parameter& p) {
  nodes_.push_back(Node{{}, {}, &p, true, {}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::record(Tensor value, std::vector<int> inputs, BackwardFn backward) {
  bool needs = false;
  for (int in : inputs) needs = needs || nodes_[in].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, nullptr, needs, needs ? std::move(backward) : BackwardFn{}});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Tensor& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape(), 0.0);
  return n.grad;
}

bool Tape::has_grad(int id) const { return !nodes_[id].grad.empty(); }

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error("backward called with a variable from another tape");
  const Tensor& lv = value(loss.id());
  if (lv.size() != 1) throw ShapeError("backward requires a scalar loss, got " + shape_string(lv.shape()));
  grad(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
    ++backward_visits_;
  }
}

void Tape::accumulate_into(ParameterRegistry& registry, double scale) const {
  for (const Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    Parameter* owner = registry.owner_of(n.param);
    if (!owner) throw Error("tape parameter '" + n.param->name + "' is not owned by this registry");
    if (!owner->grad.same_shape(owner->value)) owner->grad = Tensor(owner->value.shape(), 0.0);
    simd::axpy(scale, n.grad.data(), owner->grad.data(), n.grad.size());
  }
}

std::mt19937_64& Tape::rng() {
  if (!rng_) throw Error("training tape has no random generator");
  return *rng_;
}

// ---------------------------------------------------------------------------
// Primitives

namespace ops {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ShapeError(what);
}

std::string dims(const Tensor& t) { return shape_string(t.shape()); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t n = av.rows(), m = av.cols(), p = bv.cols();
  require(bv.rows() == m, "matmul: " + dims(av) + " x " + dims(bv));
  Tensor out = Tensor::matrix(n, p);
  simd::gemm_nn(n, m, p, av.data(), m, bv.data(), p, out.data(), p);
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, n, m, p](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    if (tp.requires_grad(ia)) {
      simd::gemm_nt(n, p, m, dc.data(), p, tp.value(ib).data(), p, tp.grad(ia).data(), m);
    }
    if (tp.requires_grad(ib)) {
      simd::gemm_tn(n, m, p, tp.value(ia).data(), m, dc.data(), p, tp.grad(ib).data(), p);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t n = av.rows(), m = av.cols(), p = bv.rows();
  require(bv.cols() == m, "matmul_nt: " + dims(av) + " x " + dims(bv) + "^T");
  Tensor out = Tensor::matrix(n, p);
  simd::gemm_nt(n, m, p, av.data(), m, bv.data(), m, out.data(), p);
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, n, m, p](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    if (tp.requires_grad(ia)) {
      simd::gemm_nn(n, p, m, dc.data(), p, tp.value(ib).data(), m, tp.grad(ia).data(), m);
    }
    if (tp.requires_grad(ib)) {
      simd::gemm_tn(n, p, m, dc.data(), p, tp.value(ia).data(), m, tp.grad(ib).data(), m);
    }
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.size() == bv.size() && av.rows() == bv.rows(), "add: " + dims(av) + " + " + dims(bv));
  Tensor out = av;
  simd::axpy(1.0, bv.data(), out.data(), out.size());
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    if (tp.requires_grad(ia)) simd::axpy(1.0, dc.data(), tp.grad(ia).data(), dc.size());
    if (tp.requires_grad(ib)) simd::axpy(1.0, dc.data(), tp.grad(ib).data(), dc.size());
  });
}

Var add_row(Var a, Var bias) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  const std::size_t n = av.rows(), c = av.cols();
  require(bv.size() == c, "add_row: " + dims(av) + " + bias " + dims(bv));
  Tensor out = av;
  for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, bv.data(), out.row(r), c);
  const int ia = a.id(), ib = bias.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib, n, c](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    if (tp.requires_grad(ia)) simd::axpy(1.0, dc.data(), tp.grad(ia).data(), dc.size());
    if (tp.requires_grad(ib)) {
      double* db = tp.grad(ib).data();
      for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, dc.row(r), db, c);
    }
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia, s](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    simd::axpy(s, dc.data(), tp.grad(ia).data(), dc.size());
  });
}

Var relu(Var a) {
  Tape& t = *a.tape();
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& da = tp.grad(ia);
    for (std::size_t i = 0; i < dc.size(); ++i) {
      if (y[i] > 0.0) da[i] += dc[i];
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Tape& t = *parts.front().tape();
  const std::size_t n = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  std::vector<int> ids;
  for (const Var& v : parts) {
    require(v.rows() == n, "concat_cols: row mismatch " + dims(v.value()));
    widths.push_back(v.cols());
    ids.push_back(v.id());
    total += v.cols();
  }
  Tensor out = Tensor::matrix(n, total);
  std::size_t off = 0;
  for (const Var& v : parts) {
    const Tensor& pv = v.value();
    for (std::size_t r = 0; r < n; ++r) std::copy_n(pv.row(r), pv.cols(), out.row(r) + off);
    off += pv.cols();
  }
  return t.record(std::move(out), ids, [ids, widths, n, total](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        Tensor& dp = tp.grad(ids[k]);
        for (std::size_t r = 0; r < n; ++r) {
          simd::axpy(1.0, dc.data() + r * total + offset, dp.row(r), widths[k]);
        }
      }
      offset += widths[k];
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  Tape& t = *parts.front().tape();
  const std::size_t c = parts.front().cols();
  std::size_t total = 0;
  std::vector<std::size_t> sizes;
  std::vector<int> ids;
  for (const Var& v : parts) {
    require(v.cols() == c, "concat_rows: column mismatch " + dims(v.value()));
    sizes.push_back(v.value().size());
    ids.push_back(v.id());
    total += v.rows();
  }
  Tensor out = Tensor::matrix(total, c);
  std::size_t off = 0;
  for (const Var& v : parts) {
    const Tensor& pv = v.value();
    std::copy(pv.values().begin(), pv.values().end(), out.data() + off);
    off += pv.size();
  }
  return t.record(std::move(out), ids, [ids, sizes](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) simd::axpy(1.0, dc.data() + offset, tp.grad(ids[k]).data(), sizes[k]);
      offset += sizes[k];
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), c = av.cols();
  require(begin + count <= c, "slice_cols: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                                  ") of " + dims(av));
  Tensor out = Tensor::matrix(n, count);
  for (std::size_t r = 0; r < n; ++r) std::copy_n(av.row(r) + begin, count, out.row(r));
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia, n, c, begin, count](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    Tensor& da = tp.grad(ia);
    for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, dc.row(r), da.data() + r * c + begin, count);
  });
}

Var conv1d(Var x, Var weight, Var bias, std::size_t window) {
  Tape& t = *x.tape();
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  const std::size_t n = xv.rows(), d = xv.cols(), f = wv.cols();
  require(window >= 1, "conv1d: window must be >= 1");
  require(wv.rows() == window * d, "conv1d: weight " + dims(wv) + " does not match window " +
                                       std::to_string(window) + " over width " + std::to_string(d));
  require(bv.size() == f, "conv1d: bias " + dims(bv) + " for " + std::to_string(f) + " filters");
  if (n < window) {
    throw ShapeError("conv1d: sequence of " + std::to_string(n) + " rows is shorter than window " +
                     std::to_string(window) + " (empty output)");
  }
  const std::size_t rows = n - window + 1;
  const std::size_t span = window * d;
  Tensor out = Tensor::matrix(rows, f);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(bv.data(), f, out.row(r));
  simd::gemm_nn(rows, span, f, xv.data(), d, wv.data(), f, out.data(), f);
  const int ix = x.id(), iw = weight.id(), ib = bias.id();
  return t.record(std::move(out), {ix, iw, ib}, [ix, iw, ib, rows, span, d, f](Tape& tp, int self) {
    const Tensor& dc = tp.grad(self);
    if (tp.requires_grad(ix)) {
      // Output row r read input rows r..r+window-1, which are the contiguous
      // range [r*d, r*d + span) of the input buffer.
      simd::gemm_nt(rows, f, span, dc.data(), f, tp.value(iw).data(), f, tp.grad(ix).data(), d);
    }
    if (tp.requires_grad(iw)) {
      simd::gemm_tn(rows, span, f, tp.value(ix).data(), d, dc.data(), f, tp.grad(iw).data(), f);
    }
    if (tp.requires_grad(ib)) {
      double* db = tp.grad(ib).data();
      for (std::size_t r = 0; r < rows; ++r) simd::axpy(1.0, dc.row(r), db, f);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  Tape& t = *x.tape();
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), c = xv.cols();
  require(gamma.value().size() == c && beta.value().size() == c,
          "layer_norm: gain/bias must have " + std::to_string(c) + " entries");
  const double* g = gamma.value().data();
  const double* b = beta.value().data();
  Tensor xhat = Tensor::matrix(n, c);
  std::vector<double> inv_std(n);
  Tensor out = Tensor::matrix(n, c);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = xv.row(r);
    const double mean = simd::sum(xr, c) / static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    double* hr = xhat.row(r);
    double* orow = out.row(r);
    for (std::size_t j = 0; j < c; ++j) {
      hr[j] = (xr[j] - mean) * inv_std[r];
      orow[j] = g[j] * hr[j] + b[j];
    }
  }
  const int ix = x.id(), ig = gamma.id(), ib = beta.id();
  return t.record(std::move(out), {ix, ig, ib},
                  [ix, ig, ib, n, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& tp, int self) {
                    const Tensor& dy = tp.grad(self);
                    if (tp.requires_grad(ig)) {
                      double* dg = tp.grad(ig).data();
                      for (std::size_t r = 0; r < n; ++r) {
                        for (std::size_t j = 0; j < c; ++j) dg[j] += dy.at(r, j) * xhat.at(r, j);
                      }
                    }
                    if (tp.requires_grad(ib)) {
                      double* db = tp.grad(ib).data();
                      for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, dy.row(r), db, c);
                    }
                    if (tp.requires_grad(ix)) {
                      const double* g = tp.value(ig).data();
                      Tensor& dx = tp.grad(ix);
                      std::vector<double> dxhat(c);
                      for (std::size_t r = 0; r < n; ++r) {
                        const double* dyr = dy.row(r);
                        const double* hr = xhat.row(r);
                        double mean_d = 0.0, mean_dh = 0.0;
                        for (std::size_t j = 0; j < c; ++j) {
                          dxhat[j] = dyr[j] * g[j];
                          mean_d += dxhat[j];
                          mean_dh += dxhat[j] * hr[j];
                        }
                        mean_d /= static_cast<double>(c);
                        mean_dh /= static_cast<double>(c);
                        double* dxr = dx.row(r);
                        for (std::size_t j = 0; j < c; ++j) {
                          dxr[j] += inv_std[r] * (dxhat[j] - mean_d - hr[j] * mean_dh);
                        }
                      }
                    }
                  });
}

Var dropout(Var x, double p) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0, 1)");
  Tape& t = *x.tape();
  if (p == 0.0 || !t.training()) return x;
  const Tensor& xv = x.value();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto& rng = t.rng();
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(xv.size());
  Tensor out = xv;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = unif(rng) >= p ? keep_scale : 0.0;
    out[i] *= mask[i];
  }
  const int ix = x.id();
  return t.record(std::move(out), {ix}, [ix, mask = std::move(mask)](Tape& tp, int self) {
    const Tensor& dy = tp.grad(self);
    Tensor& dx = tp.grad(ix);
    for (std::size_t i = 0; i < mask.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

Var softmax_rows(Var a, std::size_t valid_cols) {
  Tape& t = *a.tape();
  const Tensor& av = a.value();
  const std::size_t n = av.rows(), c = av.cols();
  require(valid_cols >= 1 && valid_cols <= c, "softmax_rows: valid column count out of range");
  Tensor out = Tensor::matrix(n, c);
  for (std::size_t r = 0; r < n; ++r) {
    const double* ar = av.row(r);
    double* orow = out.row(r);
    const double mx = *std::max_element(ar, ar + valid_cols);
    double z = 0.0;
    for (std::size_t j = 0; j < valid_cols; ++j) {
      orow[j] = std::exp(ar[j] - mx);
      z += orow[j];
    }
    for (std::size_t j = 0; j < valid_cols; ++j) orow[j] /= z;
  }
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia, n, c, valid_cols](Tape& tp, int self) {
    const Tensor& dy = tp.grad(self);
    const Tensor& y = tp.value(self);
    Tensor& da = tp.grad(ia);
    for (std::size_t r = 0; r < n; ++r) {
      const double* yr = y.row(r);
      const double* dyr = dy.row(r);
      const double inner = simd::dot(yr, dyr, valid_cols);
      double* dar = da.row(r);
      for (std::size_t j = 0; j < valid_cols; ++j) dar[j] += yr[j] * (dyr[j] - inner);
    }
    (void)c;
  });
}

Var embedding_lookup(Var table, std::span<const std::size_t> indices) {
  Tape& t = *table.tape();
  const Tensor& tv = table.value();
  const std::size_t vocab = tv.rows(), d = tv.cols();
  Tensor out = Tensor::matrix(indices.size(), d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] < vocab, "embedding_lookup: index " + std::to_string(indices[r]) +
                                    " outside table of " + std::to_string(vocab) + " rows");
    std::copy_n(tv.row(indices[r]), d, out.row(r));
  }
  const int it = table.id();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return t.record(std::move(out), {it}, [it, d, idx = std::move(idx)](Tape& tp, int self) {
    const Tensor& dy = tp.grad(self);
    Tensor& dt = tp.grad(it);
    for (std::size_t r = 0; r < idx.size(); ++r) simd::axpy(1.0, dy.row(r), dt.row(idx[r]), d);
  });
}

Var softmax_cross_entropy(Var logits, std::span<const double> target, std::span<const std::uint8_t> mask) {
  Tape& t = *logits.tape();
  const Tensor& lv = logits.value();
  CrossEntropyResult res = kpe::softmax_cross_entropy(lv.values(), target, mask);
  Tensor out({1, 1}, res.loss);
  const int il = logits.id();
  return t.record(std::move(out), {il}, [il, grad = std::move(res.gradient)](Tape& tp, int self) {
    const double scale = tp.grad(self)[0];
    simd::axpy(scale, grad.data(), tp.grad(il).data(), grad.size());
  });
}

}  // namespace ops

// ---------------------------------------------------------------------------
// Value-level softmax

std::vector<double> masked_softmax(std::span<const double> logits, std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != logits.size()) throw ShapeError("softmax mask length mismatch");
  auto valid = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (valid(i)) mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) throw NumericError("softmax over zero valid entries or non-finite logits");
  std::vector<double> p(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!valid(i)) continue;
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

CrossEntropyResult softmax_cross_entropy(std::span<const double> logits, std::span<const double> target,
                                         std::span<const std::uint8_t> mask) {
  if (target.size() != logits.size()) {
    throw ShapeError("cross-entropy: " + std::to_string(target.size()) + " targets for " +
                     std::to_string(logits.size()) + " logits");
  }
  if (!mask.empty() && mask.size() != logits.size()) throw ShapeError("cross-entropy mask length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!(target[i] >= 0.0)) throw Error("cross-entropy target entries must be >= 0");
    if (target[i] > 0.0 && !mask.empty() && mask[i] == 0) {
      throw Error("cross-entropy target puts mass on masked entry " + std::to_string(i));
    }
    total += target[i];
  }
  if (total == 0.0) throw Error("cross-entropy target is all zeros");
  if (std::abs(total - 1.0) > 1e-9) throw Error("cross-entropy target sums to " + std::to_string(total));

  auto valid = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (valid(i)) mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) throw NumericError("cross-entropy over non-finite logits");
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (valid(i)) z += std::exp(logits[i] - mx);
  }
  const double log_z = mx + std::log(z);

  CrossEntropyResult res;
  res.probabilities.assign(logits.size(), 0.0);
  res.gradient.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!valid(i)) continue;
    const double log_p = logits[i] - log_z;
    res.probabilities[i] = std::exp(log_p);
    if (target[i] > 0.0) res.loss -= target[i] * log_p;
    res.gradient[i] = res.probabilities[i] - target[i];
  }
  if (!std::isfinite(res.loss)) throw NumericError("cross-entropy loss is not finite");
  return res;
}

}  // namespace kpe
