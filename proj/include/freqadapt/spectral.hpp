#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "freqadapt/tensor.hpp"

namespace freqadapt {

// Regularizer inside the amplitude square root; keeps d|z| defined at z = 0.
inline constexpr double kAmplitudeEps = 1e-24;

// Per-channel 2D frequency representation, bins stored (c, u, v) row-major.
struct Spectrum {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> real;
  std::vector<double> imag;

  Spectrum() = default;
  Spectrum(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), real(c * h * w), imag(c * h * w) {}

  std::size_t size() const { return real.size(); }
  std::size_t plane_size() const { return height * width; }
  std::size_t index(std::size_t c, std::size_t u, std::size_t v) const {
    return (c * height + u) * width + v;
  }
  std::complex<double> at(std::size_t c, std::size_t u, std::size_t v) const {
    const std::size_t i = index(c, u, v);
    return {real[i], imag[i]};
  }
};

// Polar form of a Spectrum. Amplitude is non-negative straight out of
// decompose(); after amplitude normalization it may be signed, and a negative
// amplitude composes as a pi phase flip.
struct AmpPhase {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> amplitude;
  std::vector<double> phase;

  AmpPhase() = default;
  AmpPhase(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), amplitude(c * h * w),
        phase(c * h * w) {}

  std::size_t size() const { return amplitude.size(); }
  std::size_t plane_size() const { return height * width; }
};

// One-dimensional mixed-radix FFT of a fixed length. Lengths are factored
// into primes; each prime p gets a generic radix-p butterfly, so any length
// works (prime lengths degrade to a direct O(n^2) pass).
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }
  // In place; forward uses exp(-2 pi i jk/n), inverse uses the conjugate and
  // does not scale.
  void transform(std::complex<double>* data, bool inverse) const;

 private:
  void recurse(const std::complex<double>* in, std::size_t stride,
               std::complex<double>* out, std::size_t n, std::size_t level,
               bool inverse) const;
  std::complex<double> twiddle(std::size_t j, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<std::complex<double>> twiddles_;
};

// Unnormalized forward transform over H x W, independently per channel.
Spectrum fft2(const FeatureMap& x);
// Forward transform of complex data.
Spectrum fft2(const Spectrum& s);
// Complex inverse with 1/(H*W) scaling, no realness check.
Spectrum ifft2_complex(const Spectrum& s);

struct InverseResult {
  FeatureMap map;
  double imag_residue = 0.0;  // max |imag| over all samples
};

// Real part of the normalized inverse. Throws SymmetryError when the
// imaginary residue exceeds 1e-6 times the largest sample magnitude.
InverseResult ifft2(const Spectrum& s);

// Direct double-sum DFT, no factorization. Requires H*W <= 4096.
Spectrum dft2_oracle(const FeatureMap& x);
Spectrum dft2_oracle(const Spectrum& s);
// Direct inverse with 1/(H*W) scaling. Same size guard.
Spectrum idft2_oracle(const Spectrum& s);

AmpPhase decompose(const Spectrum& s);
Spectrum compose(const AmpPhase& ap);

struct BandEnergy {
  double low = 0.0;
  double high = 0.0;

  double high_fraction() const {
    const double total = low + high;
    return total > 0.0 ? high / total : 0.0;
  }
};

// Normalized radius of bin (u, v): signed frequency per axis divided by half
// the axis length, combined in quadrature. Axis Nyquist sits at radius 1.
double normalized_radius(std::size_t u, std::size_t v, std::size_t height,
                         std::size_t width);

// Sum of squared amplitude at radius <= cut (low) and > cut (high), averaged
// over channels.
BandEnergy band_energy(const AmpPhase& ap, double radial_cut);

// Channel-averaged log(1 + |amplitude|) with DC moved to (H/2, W/2).
Matrix heatmap(const AmpPhase& ap);

// Destination of index i under the centering shift for an axis of length n.
inline std::size_t centered_index(std::size_t i, std::size_t n) {
  return (i + n / 2) % n;
}

}  // namespace freqadapt
