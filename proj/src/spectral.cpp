#include "freqadapt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/parallel.hpp"
#include "freqadapt/simd/kernels.hpp"

namespace freqadapt {

using cd = std::complex<double>;

namespace {

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), factors_(prime_factors(n)) {
  if (n == 0) throw InvalidArgument("FftPlan: length must be positive");
  twiddles_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // Exact values at the quarter turns.
    if ((4 * j) % n == 0) {
      static constexpr cd kQuarter[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
      twiddles_[j] = kQuarter[(4 * j) / n];
      continue;
    }
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(n);
    twiddles_[j] = {std::cos(angle), std::sin(angle)};
  }
}

cd FftPlan::twiddle(std::size_t j, bool inverse) const {
  const cd w = twiddles_[j % n_];
  return inverse ? std::conj(w) : w;
}

void FftPlan::recurse(const cd* in, std::size_t stride, cd* out, std::size_t n,
                      std::size_t level, bool inverse) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = factors_[level];
  const std::size_t m = n / p;
  for (std::size_t r = 0; r < p; ++r) {
    recurse(in + r * stride, stride * p, out + r * m, m, level + 1, inverse);
  }

  const std::size_t step = n_ / n;
  const std::size_t root = n_ / p;
  std::vector<cd> scratch(p);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t r = 0; r < p; ++r) {
      scratch[r] = out[r * m + k] * twiddle(r * k * step, inverse);
    }
    for (std::size_t q = 0; q < p; ++q) {
      cd acc = scratch[0];
      for (std::size_t r = 1; r < p; ++r) {
        acc += scratch[r] * twiddle(((r * q) % p) * root, inverse);
      }
      out[q * m + k] = acc;
    }
  }
}

void FftPlan::transform(cd* data, bool inverse) const {
  if (n_ == 1) return;
  std::vector<cd> input(data, data + n_);
  recurse(input.data(), 1, data, n_, 0, inverse);
}

namespace {

// 2D transform of one channel plane, rows then columns.
void transform_plane(std::vector<cd>& plane, std::size_t height,
                     std::size_t width, const FftPlan& row_plan,
                     const FftPlan& col_plan, bool inverse) {
  for (std::size_t u = 0; u < height; ++u) {
    row_plan.transform(plane.data() + u * width, inverse);
  }
  std::vector<cd> column(height);
  for (std::size_t v = 0; v < width; ++v) {
    for (std::size_t u = 0; u < height; ++u) column[u] = plane[u * width + v];
    col_plan.transform(column.data(), inverse);
    for (std::size_t u = 0; u < height; ++u) plane[u * width + v] = column[u];
  }
}

Spectrum transform_all(const Spectrum& s, bool inverse) {
  const FftPlan row_plan(s.width);
  const FftPlan col_plan(s.height);
  Spectrum out(s.channels, s.height, s.width);
  const std::size_t plane = s.plane_size();
  parallel_for(s.channels, [&](std::size_t c) {
    std::vector<cd> buf(plane);
    const std::size_t base = c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      buf[i] = {s.real[base + i], s.imag[base + i]};
    }
    transform_plane(buf, s.height, s.width, row_plan, col_plan, inverse);
    for (std::size_t i = 0; i < plane; ++i) {
      out.real[base + i] = buf[i].real();
      out.imag[base + i] = buf[i].imag();
    }
  });
  return out;
}

Spectrum as_spectrum(const FeatureMap& x) {
  Spectrum s(x.channels(), x.height(), x.width());
  std::copy(x.data().begin(), x.data().end(), s.real.begin());
  return s;
}

void check_oracle_size(std::size_t height, std::size_t width) {
  if (height * width > 4096) {
    throw InvalidArgument("dft2_oracle: H*W = " +
                          std::to_string(height * width) +
                          " exceeds the quadratic-cost guard of 4096");
  }
}

Spectrum direct_dft(const Spectrum& s, bool inverse) {
  check_oracle_size(s.height, s.width);
  const std::size_t height = s.height;
  const std::size_t width = s.width;
  const long double sign = inverse ? 1.0L : -1.0L;
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  const long double norm =
      inverse ? 1.0L / static_cast<long double>(height * width) : 1.0L;
  Spectrum out(s.channels, height, width);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t u = 0; u < height; ++u) {
      for (std::size_t v = 0; v < width; ++v) {
        long double acc_re = 0.0L;
        long double acc_im = 0.0L;
        for (std::size_t h = 0; h < height; ++h) {
          for (std::size_t w = 0; w < width; ++w) {
            const long double turns =
                static_cast<long double>((u * h) % height) / height +
                static_cast<long double>((v * w) % width) / width;
            const long double angle = sign * two_pi * turns;
            const long double cr = std::cos(angle);
            const long double ci = std::sin(angle);
            const std::size_t i = s.index(c, h, w);
            const long double xr = s.real[i];
            const long double xi = s.imag[i];
            acc_re += xr * cr - xi * ci;
            acc_im += xr * ci + xi * cr;
          }
        }
        const std::size_t o = out.index(c, u, v);
        out.real[o] = static_cast<double>(acc_re * norm);
        out.imag[o] = static_cast<double>(acc_im * norm);
      }
    }
  }
  return out;
}

}  // namespace

Spectrum fft2(const FeatureMap& x) { return transform_all(as_spectrum(x), false); }

Spectrum fft2(const Spectrum& s) { return transform_all(s, false); }

Spectrum ifft2_complex(const Spectrum& s) {
  Spectrum out = transform_all(s, true);
  const double norm = 1.0 / static_cast<double>(s.plane_size());
  const auto& simd = simd::kernels();
  simd.scale(norm, out.real.data(), out.real.data(), out.size());
  simd.scale(norm, out.imag.data(), out.imag.data(), out.size());
  return out;
}

InverseResult ifft2(const Spectrum& s) {
  Spectrum full = ifft2_complex(s);
  double residue = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    residue = std::max(residue, std::abs(full.imag[i]));
    peak = std::max(peak, std::hypot(full.real[i], full.imag[i]));
  }
  if (residue > 1e-6 * peak) {
    throw SymmetryError("ifft2: imaginary residue " + std::to_string(residue) +
                        " against peak magnitude " + std::to_string(peak) +
                        "; spectrum is not conjugate-symmetric");
  }
  return {FeatureMap(s.channels, s.height, s.width, std::move(full.real)),
          residue};
}

Spectrum dft2_oracle(const FeatureMap& x) {
  check_oracle_size(x.height(), x.width());
  return direct_dft(as_spectrum(x), false);
}

Spectrum dft2_oracle(const Spectrum& s) { return direct_dft(s, false); }

Spectrum idft2_oracle(const Spectrum& s) { return direct_dft(s, true); }

AmpPhase decompose(const Spectrum& s) {
  AmpPhase ap(s.channels, s.height, s.width);
  simd::kernels().magnitude(s.real.data(), s.imag.data(), kAmplitudeEps,
                            ap.amplitude.data(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = std::atan2(s.imag[i], s.real[i]);
    // atan2 returns -pi for a negative-zero imaginary part; fold into (-pi, pi].
    ap.phase[i] = p == -std::numbers::pi ? std::numbers::pi : p;
  }
  return ap;
}

Spectrum compose(const AmpPhase& ap) {
  if (ap.amplitude.size() != ap.phase.size() ||
      ap.amplitude.size() != ap.channels * ap.height * ap.width) {
    throw ShapeError("compose: amplitude and phase shapes differ");
  }
  Spectrum s(ap.channels, ap.height, ap.width);
  for (std::size_t i = 0; i < ap.size(); ++i) {
    s.real[i] = ap.amplitude[i] * std::cos(ap.phase[i]);
    s.imag[i] = ap.amplitude[i] * std::sin(ap.phase[i]);
  }
  return s;
}

double normalized_radius(std::size_t u, std::size_t v, std::size_t height,
                         std::size_t width) {
  auto axis = [](std::size_t i, std::size_t n) {
    const double signed_freq = i <= n / 2 ? static_cast<double>(i)
                                          : static_cast<double>(i) -
                                                static_cast<double>(n);
    return signed_freq / (static_cast<double>(n) / 2.0);
  };
  return std::hypot(axis(u, height), axis(v, width));
}

BandEnergy band_energy(const AmpPhase& ap, double radial_cut) {
  if (!(radial_cut > 0.0 && radial_cut < 1.0)) {
    throw InvalidArgument("band_energy: radial cut must lie in (0, 1)");
  }
  BandEnergy total;
  for (std::size_t c = 0; c < ap.channels; ++c) {
    for (std::size_t u = 0; u < ap.height; ++u) {
      for (std::size_t v = 0; v < ap.width; ++v) {
        const double a = ap.amplitude[(c * ap.height + u) * ap.width + v];
        if (normalized_radius(u, v, ap.height, ap.width) <= radial_cut) {
          total.low += a * a;
        } else {
          total.high += a * a;
        }
      }
    }
  }
  const double channels = static_cast<double>(ap.channels);
  total.low /= channels;
  total.high /= channels;
  return total;
}

Matrix heatmap(const AmpPhase& ap) {
  Matrix out(ap.height, ap.width);
  for (std::size_t c = 0; c < ap.channels; ++c) {
    for (std::size_t u = 0; u < ap.height; ++u) {
      for (std::size_t v = 0; v < ap.width; ++v) {
        const double a = ap.amplitude[(c * ap.height + u) * ap.width + v];
        out(centered_index(u, ap.height), centered_index(v, ap.width)) +=
            std::log1p(std::abs(a));
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(ap.channels);
  for (double& v : out.data()) v *= inv;
  return out;
}

}  // namespace freqadapt
