#include "freqadapt/synth.hpp"

#include <cmath>

#include "freqadapt/error.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/random.hpp"

namespace freqadapt::synth {

std::optional<FeatureKind> parse_kind(std::string_view name) {
  if (name == "noise") return FeatureKind::kNoise;
  if (name == "smooth") return FeatureKind::kSmooth;
  if (name == "checker") return FeatureKind::kChecker;
  return std::nullopt;
}

std::string_view kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kNoise:
      return "noise";
    case FeatureKind::kSmooth:
      return "smooth";
    case FeatureKind::kChecker:
      return "checker";
  }
  return "noise";
}

namespace {

FeatureMap noise(std::size_t c, std::size_t h, std::size_t w,
                 std::uint64_t seed) {
  Rng rng(seed);
  FeatureMap x(c, h, w);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  return x;
}

// Depthwise: channel c of the output only sees channel c of the input.
ConvKernel gaussian_depthwise(std::size_t channels) {
  constexpr std::size_t kSize = 5;
  double taps[kSize][kSize];
  double total = 0.0;
  for (std::size_t y = 0; y < kSize; ++y) {
    for (std::size_t x = 0; x < kSize; ++x) {
      const double dy = static_cast<double>(y) - 2.0;
      const double dx = static_cast<double>(x) - 2.0;
      taps[y][x] = std::exp(-(dx * dx + dy * dy) / 2.0);
      total += taps[y][x];
    }
  }
  ConvKernel k(channels, channels, kSize);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t y = 0; y < kSize; ++y) {
      for (std::size_t x = 0; x < kSize; ++x) k.at(c, c, y, x) = taps[y][x] / total;
    }
  }
  return k;
}

}  // namespace

FeatureMap gen_features(FeatureKind kind, std::size_t channels,
                        std::size_t height, std::size_t width,
                        std::uint64_t seed) {
  if (channels == 0 || height == 0 || width == 0) {
    throw ShapeError("gen_features: dimensions must be >= 1");
  }
  switch (kind) {
    case FeatureKind::kNoise:
      return noise(channels, height, width, seed);
    case FeatureKind::kSmooth:
      return conv2d(noise(channels, height, width, seed),
                    gaussian_depthwise(channels), 2);
    case FeatureKind::kChecker: {
      FeatureMap x(channels, height, width);
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t h = 0; h < height; ++h) {
          for (std::size_t w = 0; w < width; ++w) {
            x(c, h, w) = (h + w) % 2 == 0 ? 1.0 : -1.0;
          }
        }
      }
      return x;
    }
  }
  throw InvalidArgument("gen_features: unknown kind");
}

}  // namespace freqadapt::synth
