#include "freqadapt/sda.hpp"

#include <cmath>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/random.hpp"
#include "freqadapt/simd/kernels.hpp"

namespace freqadapt::sda {

std::vector<double> StyleWeights::effective() const {
  std::vector<double> out = weights;
  if (scale_mode == ScaleMode::kTimesC) {
    const double c = static_cast<double>(out.size());
    for (double& w : out) w *= c;
  }
  return out;
}

AffineStyle AffineStyle::identity(std::size_t channels) {
  return {std::vector<double>(channels, 0.0),
          std::vector<double>(channels, 1.0)};
}

StyleStats channel_stats(const FeatureMap& x) {
  StyleStats stats;
  stats.mu_base.resize(x.channels());
  stats.sigma_base.resize(x.channels());
  const double n = static_cast<double>(x.plane_size());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto plane = x.channel(c);
    double sum = 0.0;
    for (double v : plane) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : plane) sq += (v - mean) * (v - mean);
    stats.mu_base[c] = mean;
    stats.sigma_base[c] = std::sqrt(sq / n);
  }
  return stats;
}

StyleWeights sample_dirichlet(std::span<const double> alpha, std::uint64_t seed,
                              ScaleMode mode) {
  Rng rng(seed);
  StyleWeights w;
  w.alpha.assign(alpha.begin(), alpha.end());
  w.weights = dirichlet(rng, alpha);
  w.scale_mode = mode;
  return w;
}

AffineStyle fuse_coefficients(const StyleStats& stats, const StyleWeights& w) {
  const std::size_t channels = stats.mu_base.size();
  if (stats.sigma_base.size() != channels || w.weights.size() != channels) {
    throw ShapeError("style fusion: " + std::to_string(w.weights.size()) +
                     " weights for " + std::to_string(channels) + " channels");
  }
  const std::vector<double> scale = w.effective();
  AffineStyle style;
  style.mu.resize(channels);
  style.sigma.resize(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    style.mu[c] = scale[c] * stats.mu_base[c];
    style.sigma[c] = scale[c] * stats.sigma_base[c];
  }
  return style;
}

AmpPhase style_fuse(const AmpPhase& ap, const AffineStyle& style) {
  if (style.mu.size() != ap.channels || style.sigma.size() != ap.channels) {
    throw ShapeError("style_fuse: coefficient count does not match channels");
  }
  AmpPhase out = ap;
  const auto& simd = simd::kernels();
  const std::size_t plane = ap.plane_size();
  for (std::size_t c = 0; c < ap.channels; ++c) {
    simd.affine(style.sigma[c], style.mu[c], ap.amplitude.data() + c * plane,
                out.amplitude.data() + c * plane, plane);
  }
  return out;
}

AmpPhase style_fuse(const AmpPhase& ap, const StyleStats& stats,
                    const StyleWeights& w) {
  return style_fuse(ap, fuse_coefficients(stats, w));
}

FeatureMap sda_apply(const FeatureMap& x, const AffineStyle& style) {
  const AmpPhase fused = style_fuse(decompose(fft2(x)), style);
  return ifft2(compose(fused)).map;
}

FeatureMap sda_forward(const FeatureMap& x, std::span<const double> alpha,
                       std::uint64_t seed, ScaleMode mode) {
  if (alpha.size() != x.channels()) {
    throw ShapeError("sda_forward: " + std::to_string(alpha.size()) +
                     " concentrations for " + std::to_string(x.channels()) +
                     " channels");
  }
  const StyleWeights w = sample_dirichlet(alpha, seed, mode);
  return sda_apply(x, fuse_coefficients(channel_stats(x), w));
}

}  // namespace freqadapt::sda
