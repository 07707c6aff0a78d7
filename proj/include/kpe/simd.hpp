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

// Dense double-precision inner loops used by the autodiff layers.
//
// Every kernel has a portable scalar reference in kpe::simd::scalar and, on
// x86-64, an AVX2/FMA variant in kpe::simd::avx2. The unqualified entry points
// dispatch through a table chosen once at startup from CPUID; tests pin the
// table with ScopedIsa to compare variants against the reference.

#include <cstddef>
#include <string_view>

namespace kpe::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Best variant this CPU supports (ignores any override).
Isa detect_isa();
// Variant the dispatch table currently points at.
Isa active_isa();
// Returns false when the requested variant is not available on this CPU or
// was not compiled in.
bool isa_available(Isa isa);

// RAII override of the dispatch table. Not thread safe; tests only.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// sum_i x[i]
double sum(const double* x, std::size_t n);

// Row-major GEMM variants; all accumulate into C. Leading dimensions are
// row strides and may be smaller than the row length, which lets a 1-D
// convolution read overlapping windows of its input without unfolding it.
//
//   gemm_nn: C[n x p] += A[n x m] * B[m x p]
//   gemm_nt: C[n x p] += A[n x m] * B[p x m]^T
//   gemm_tn: C[m x p] += A[n x m]^T * B[n x p]
void gemm_nn(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc);
void gemm_nt(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc);
void gemm_tn(std::size_t n, std::size_t m, std::size_t p, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

#if defined(KPE_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace kpe::simd
