#pragma once

#include <cmath>
#include <cstring>
#include <span>

#include "freqadapt/random.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/tensor.hpp"

namespace testing {

inline freqadapt::FeatureMap random_map(freqadapt::Rng& rng, std::size_t c,
                                        std::size_t h, std::size_t w,
                                        double lo = -1.0, double hi = 1.0) {
  freqadapt::FeatureMap x(c, h, w);
  for (double& v : x.data()) v = rng.uniform(lo, hi);
  return x;
}

inline freqadapt::Matrix random_matrix(freqadapt::Rng& rng, std::size_t rows,
                                       std::size_t cols) {
  freqadapt::Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline double max_abs_diff(const freqadapt::Spectrum& a,
                           const freqadapt::Spectrum& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.real[i] - b.real[i]));
    worst = std::max(worst, std::abs(a.imag[i] - b.imag[i]));
  }
  return worst;
}

}  // namespace testing
