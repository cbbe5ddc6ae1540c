#include <cmath>

#include "freqadapt/simd/kernels.hpp"

namespace freqadapt::simd {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void affine(double scale, double shift, const double* x, double* y,
            std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = scale * x[i] + shift;
}

void magnitude(const double* re, const double* im, double eps, double* out,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i] + eps);
  }
}

void standardize(double mean, double stddev, const double* x, double* y,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - mean) / stddev;
}

void scale(double s, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = s * x[i];
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar, axpy,  affine,
                                 magnitude,    standardize, scale};
  return table;
}

}  // namespace freqadapt::simd
