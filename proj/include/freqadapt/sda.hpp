#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "freqadapt/spectral.hpp"
#include "freqadapt/tensor.hpp"

// Style diversification: per-channel style statistics are reweighted by a
// Dirichlet draw and applied as an affine map to every amplitude bin of the
// channel, while the phase passes through untouched.

namespace freqadapt::sda {

// Per-channel population mean and standard deviation over the H x W plane.
struct StyleStats {
  std::vector<double> mu_base;
  std::vector<double> sigma_base;
};

enum class ScaleMode {
  kRaw,     // weights used as drawn (sum to 1)
  kTimesC,  // weights multiplied by the channel count (mean 1)
};

struct StyleWeights {
  std::vector<double> alpha;
  std::vector<double> weights;  // on the simplex
  ScaleMode scale_mode = ScaleMode::kTimesC;

  // Weights after the optional x C rescaling.
  std::vector<double> effective() const;
};

// Final per-channel affine coefficients: amplitude -> sigma * a + mu.
struct AffineStyle {
  std::vector<double> mu;
  std::vector<double> sigma;

  static AffineStyle identity(std::size_t channels);
  std::size_t channels() const { return mu.size(); }
};

StyleStats channel_stats(const FeatureMap& x);

StyleWeights sample_dirichlet(std::span<const double> alpha, std::uint64_t seed,
                              ScaleMode mode = ScaleMode::kTimesC);

// mu = W * mu_base, sigma = W * sigma_base, element-wise.
AffineStyle fuse_coefficients(const StyleStats& stats, const StyleWeights& w);

AmpPhase style_fuse(const AmpPhase& ap, const AffineStyle& style);
AmpPhase style_fuse(const AmpPhase& ap, const StyleStats& stats,
                    const StyleWeights& w);

// Full transform with explicit coefficients. Also serves as the test hook for
// forcing an identity style.
FeatureMap sda_apply(const FeatureMap& x, const AffineStyle& style);

// Statistics from x, weights from Dirichlet(alpha) seeded by `seed`.
FeatureMap sda_forward(const FeatureMap& x, std::span<const double> alpha,
                       std::uint64_t seed, ScaleMode mode = ScaleMode::kTimesC);

}  // namespace freqadapt::sda
