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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "kpe/checkpoint.hpp"
#include "kpe/error.hpp"
#include "kpe/io.hpp"

using namespace kpe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "kpe_test_checkpoint_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

}  // namespace

TEST_CASE("sha256 matches the standard test vectors") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("json errors carry line and column") {
  try {
    io::parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("cfg.json") != std::string::npos);
  }
}

TEST_CASE("jsonl reader reports the failing line and skips blanks") {
  const fs::path p = scratch("rows.jsonl");
  spit(p, "{\"a\": 1}\n\n{\"a\": 2}\n{oops}\n");
  try {
    io::read_jsonl(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  spit(p, "{\"a\": 1}\n\n{\"a\": 2}\n");
  CHECK(io::read_jsonl(p).size() == 2);
}

TEST_CASE("atomic write replaces the file and leaves no temporaries") {
  const fs::path dir = scratch("atomic");
  fs::remove_all(dir);
  const fs::path p = dir / "nested" / "out.txt";
  io::atomic_write(p, "first");
  io::atomic_write(p, "second");
  CHECK(slurp(p) == "second");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(p.parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("checkpoint round-trip is bit exact") {
  ParameterRegistry reg;
  reg.add("a.weight", Tensor({2, 3}, {1.0, -0.0, 3.5e-300, std::numeric_limits<double>::denorm_min(), 1e300, 0.1}));
  reg.add("a.bias", Tensor({3}, {0.25, -0.5, 0.125}));
  const fs::path p = scratch("model.ckpt");
  save_checkpoint(p, reg, "{\"k\": 1}");
  Checkpoint ck = load_checkpoint(p);
  CHECK(ck.config_json == "{\"k\": 1}");
  CHECK(ck.config_digest == io::sha256_hex("{\"k\": 1}"));
  REQUIRE(ck.parameters.size() == 2);
  for (const char* name : {"a.weight", "a.bias"}) {
    const Tensor& x = reg.at(name).value;
    const Tensor& y = ck.parameters.at(name).value;
    REQUIRE(x.shape() == y.shape());
    CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("corrupted checkpoints are rejected") {
  ParameterRegistry reg;
  reg.add("w", Tensor({2}, {1.0, 2.0}));
  const fs::path p = scratch("corrupt.ckpt");
  save_checkpoint(p, reg, "{\"model\": 1}");
  const std::string good = slurp(p);

  SUBCASE("bad magic") {
    std::string s = good;
    s[0] = 'X';
    spit(p, s);
    CHECK_THROWS_AS(load_checkpoint(p), ParseError);
  }
  SUBCASE("config edited without updating the digest") {
    std::string s = good;
    const auto pos = s.find("\"model\": 1");
    REQUIRE(pos != std::string::npos);
    s[pos + 10] = '2';
    spit(p, s);
    CHECK_THROWS_WITH(load_checkpoint(p), doctest::Contains("digest"));
  }
  SUBCASE("truncated") {
    spit(p, good.substr(0, good.size() - 4));
    CHECK_THROWS_AS(load_checkpoint(p), ParseError);
  }
  SUBCASE("trailing bytes") {
    spit(p, good + "x");
    CHECK_THROWS_AS(load_checkpoint(p), ParseError);
  }
  SUBCASE("missing file") { CHECK_THROWS(load_checkpoint(scratch("does-not-exist.ckpt"))); }
}

TEST_CASE("assign_parameters lists every mismatch") {
  ParameterRegistry target, source;
  target.add("same", Tensor({2}, 0.0));
  target.add("shape", Tensor({2, 2}, 0.0));
  target.add("only_target", Tensor({1}, 0.0));
  source.add("same", Tensor({2}, 7.0));
  source.add("shape", Tensor({4}, 0.0));
  source.add("only_source", Tensor({1}, 0.0));
  try {
    assign_parameters(target, source);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("shape") != std::string::npos);
    CHECK(msg.find("only_target") != std::string::npos);
    CHECK(msg.find("only_source") != std::string::npos);
    CHECK(msg.find("  same:") == std::string::npos);
  }
  // Nothing was copied on failure.
  CHECK(target.at("same").value[0] == 0.0);

  ParameterRegistry ok;
  ok.add("same", Tensor({2}, 3.0));
  ParameterRegistry dst;
  dst.add("same", Tensor({2}, 0.0));
  assign_parameters(dst, ok);
  CHECK(dst.at("same").value == ok.at("same").value);
}
