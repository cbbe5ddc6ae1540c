// Compiled with -mavx2 (and without -mfma). Only reached after a runtime
// CPU check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>

#include "freqadapt/simd/kernels.hpp"

namespace freqadapt::simd {
namespace {

constexpr std::size_t kLanes = 4;

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void affine(double scale, double shift, const double* x, double* y,
            std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vb = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d prod = _mm256_mul_pd(vs, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(prod, vb));
  }
  for (; i < n; ++i) y[i] = scale * x[i] + shift;
}

void magnitude(const double* re, const double* im, double eps, double* out,
               std::size_t n) {
  const __m256d ve = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d r = _mm256_loadu_pd(re + i);
    __m256d m = _mm256_loadu_pd(im + i);
    __m256d sum = _mm256_add_pd(_mm256_mul_pd(r, r), _mm256_mul_pd(m, m));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(_mm256_add_pd(sum, ve)));
  }
  for (; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i] + eps);
}

void standardize(double mean, double stddev, const double* x, double* y,
                 std::size_t n) {
  const __m256d vm = _mm256_set1_pd(mean);
  const __m256d vd = _mm256_set1_pd(stddev);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d centered = _mm256_sub_pd(_mm256_loadu_pd(x + i), vm);
    _mm256_storeu_pd(y + i, _mm256_div_pd(centered, vd));
  }
  for (; i < n; ++i) y[i] = (x[i] - mean) / stddev;
}

void scale(double s, const double* x, double* y, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(y + i, _mm256_mul_pd(vs, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = s * x[i];
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::kAvx2, axpy,  affine,
                                 magnitude,  standardize, scale};
  return &table;
}

}  // namespace freqadapt::simd
