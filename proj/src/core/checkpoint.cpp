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

#include "kpe/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <utility>
#include <cstring>

#include "kpe/error.hpp"
#include "kpe/io.hpp"

namespace kpe {

namespace {

constexpr char kMagic[8] = {'K', 'P', 'E', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

void put_string(std::string& out, const std::string& s, bool wide) {
  if (wide) {
    put<std::uint64_t>(out, s.size());
  } else {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  }
  out += s;
}

class Reader {
 public:
  Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError(source_ + ": truncated checkpoint");
  }
  const std::string& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterRegistry& parameters,
                     const std::string& config_json) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, io::sha256_hex(config_json), true);
  put_string(out, config_json, true);
  put<std::uint64_t>(out, parameters.size());
  for (const Parameter* p : parameters.all()) {
    put_string(out, p->name, false);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put<std::uint64_t>(out, d);
    put<std::uint64_t>(out, p->value.size());
    for (double v : p->value.values()) put<double>(out, v);
  }
  io::atomic_write(path, out);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  Reader r(data, path.string());
  if (r.get_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError(path.string() + ": not a checkpoint file");
  }
  Checkpoint ck;
  ck.version = r.get<std::uint32_t>();
  if (ck.version != kCheckpointVersion) {
    throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(ck.version));
  }
  ck.config_digest = r.get_bytes(r.get<std::uint64_t>());
  ck.config_json = r.get_bytes(r.get<std::uint64_t>());
  if (io::sha256_hex(ck.config_json) != ck.config_digest) {
    throw ParseError(path.string() + ": config digest mismatch");
  }
  const auto count = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = r.get_bytes(r.get<std::uint32_t>());
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    const auto n = r.get<std::uint64_t>();
    std::vector<double> values(n);
    for (double& v : values) v = r.get<double>();
    ck.parameters.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw ParseError(path.string() + ": trailing bytes after checkpoint records");
  return ck;
}

void assign_parameters(ParameterRegistry& target, const ParameterRegistry& source) {
  std::string problems;
  for (const Parameter* p : std::as_const(target).all()) {
    const Parameter* s = source.find(p->name);
    if (!s) {
      problems += "\n  " + p->name + ": missing from source";
    } else if (!s->value.same_shape(p->value)) {
      problems += "\n  " + p->name + ": expected " + shape_string(p->value.shape()) + ", found " +
                  shape_string(s->value.shape());
    }
  }
  for (const Parameter* s : source.all()) {
    if (!target.contains(s->name)) problems += "\n  " + s->name + ": not part of this model";
  }
  if (!problems.empty()) throw ShapeError("parameter mismatch on warm start:" + problems);
  for (Parameter* p : target.all()) p->value = source.at(p->name).value;
}

}  // namespace kpe
