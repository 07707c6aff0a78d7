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

#include "kpe/simd.hpp"

namespace kpe::simd {

namespace {

struct KernelTable {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum)(const double*, std::size_t);
};

constexpr KernelTable kScalarTable{Isa::kScalar, &scalar::dot, &scalar::axpy, &scalar::sum};
#if defined(KPE_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::kAvx2, &avx2::dot, &avx2::axpy, &avx2::sum};
#endif

bool cpu_has_avx2() {
#if defined(KPE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table_for(Isa isa) {
#if defined(KPE_HAVE_AVX2)
  if (isa == Isa::kAvx2) return kAvx2Table;
#endif
  (void)isa;
  return kScalarTable;
}

const KernelTable*& active_table() {
  static const KernelTable* table = &table_for(detect_isa());
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detect_isa() {
  static const Isa detected = cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
  return detected;
}

bool isa_available(Isa isa) {
  if (isa == Isa::kScalar) return true;
  return isa == Isa::kAvx2 && detect_isa() == Isa::kAvx2;
}

Isa active_isa() { return active_table()->isa; }

ScopedIsa::ScopedIsa(Isa isa) : previous_(active_isa()) {
  active_table() = &table_for(isa_available(isa) ? isa : Isa::kScalar);
}

ScopedIsa::~ScopedIsa() { active_table() = &table_for(previous_); }

double dot(const double* a, const double* b, std::size_t n) { return active_table()->dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active_table()->axpy(alpha, x, y, n);
}

double sum(const double* x, std::size_t n) { return active_table()->sum(x, n); }

void gemm_nn(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const auto axpy_fn = active_table()->axpy;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t l = 0; l < m; ++l) {
      const double alpha = arow[l];
      if (alpha != 0.0) axpy_fn(alpha, b + l * ldb, crow, p);
    }
  }
}

void gemm_nt(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const auto dot_fn = active_table()->dot;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * lda;
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < p; ++j) crow[j] += dot_fn(arow, b + j * ldb, m);
  }
}

void gemm_tn(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  const auto axpy_fn = active_table()->axpy;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * lda;
    const double* brow = b + i * ldb;
    for (std::size_t l = 0; l < m; ++l) {
      const double alpha = arow[l];
      if (alpha != 0.0) axpy_fn(alpha, brow, c + l * ldc, p);
    }
  }
}

}  // namespace kpe::simd
