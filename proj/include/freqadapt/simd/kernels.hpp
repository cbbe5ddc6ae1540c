#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops behind the tensor and spectral code.
//
// Every kernel has a scalar reference and an AVX2 variant. The variants use
// separate multiply and add (no FMA) and identical per-element operation
// order, so their results are bitwise equal to the scalar reference; the
// equivalence tests assert exactly that.
//
// The active table is chosen once at first use from CPU features. Setting
// FREQADAPT_SIMD=scalar (or avx2) in the environment overrides detection.

namespace freqadapt::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] = scale * x[i] + shift
  void (*affine)(double scale, double shift, const double* x, double* y,
                 std::size_t n);
  // out[i] = sqrt(re[i] * re[i] + im[i] * im[i] + eps)
  void (*magnitude)(const double* re, const double* im, double eps,
                    double* out, std::size_t n);
  // y[i] = (x[i] - mean) / stddev
  void (*standardize)(double mean, double stddev, const double* x, double* y,
                      std::size_t n);
  // y[i] = s * x[i]
  void (*scale)(double s, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();
// Null when the build does not include the AVX2 translation unit.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();

// Table selected for this process.
const KernelTable& kernels();

std::string_view isa_name(Isa isa);

}  // namespace freqadapt::simd
