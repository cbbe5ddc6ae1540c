#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "freqadapt/tensor.hpp"

namespace freqadapt::synth {

enum class FeatureKind {
  kNoise,    // uniform(-1, 1) from Rng(seed), row-major fill order
  kSmooth,   // noise convolved per channel with a normalized 5x5 Gaussian
             // (sigma 1, zero padding)
  kChecker,  // (-1)^(h + w)
};

std::optional<FeatureKind> parse_kind(std::string_view name);
std::string_view kind_name(FeatureKind kind);

FeatureMap gen_features(FeatureKind kind, std::size_t channels,
                        std::size_t height, std::size_t width,
                        std::uint64_t seed);

}  // namespace freqadapt::synth
