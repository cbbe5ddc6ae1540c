#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "freqadapt/cca.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/tensor.hpp"

namespace freqadapt::adapter {

// Weights of the plain adapter: three parallel "same" convolutions, a 1x1
// aggregation and a 1x1 projection, all C -> C and bias-free.
struct AdapterWeights {
  ConvKernel k3;
  ConvKernel k5;
  ConvKernel k7;
  ConvKernel agg;
  ConvKernel proj;

  std::size_t channels() const { return agg.out_channels; }
  void validate() const;

  // Every branch zero, projection identity: the adapter is the identity map.
  static AdapterWeights zero_branch(std::size_t channels);
  // Seeded N(0, scale^2 / fan_in) weights.
  static AdapterWeights random(std::size_t channels, std::uint64_t seed,
                               double scale = 1.0);
};

using Augment = std::function<FeatureMap(const FeatureMap&)>;

enum class ResidualOrder {
  kBeforeProjection,  // proj(x + branch)
  kAfterProjection,   // x + proj(branch)
};

// branch = augment(silu(agg((conv3(x) + conv5(x) + conv7(x)) / 3)))
FeatureMap plain_forward(const FeatureMap& x, const AdapterWeights& w,
                         const Augment& augment,
                         ResidualOrder order = ResidualOrder::kBeforeProjection);
FeatureMap plain_forward(const FeatureMap& x, const AdapterWeights& w);

enum class StageKind { kNone, kPlain, kSda, kCca };

std::string_view stage_kind_name(StageKind kind);
std::optional<StageKind> parse_stage_kind(std::string_view name);

struct PlacementConfig {
  std::size_t stage_count = 3;
  // Stage index (1-based) -> augmentation. Unlisted stages pass through.
  std::map<std::size_t, StageKind> stage_assignments;
  std::vector<double> sda_alpha;  // empty: all ones
  sda::ScaleMode sda_scale = sda::ScaleMode::kTimesC;
  std::optional<cca::AttentionParams> cca_params;  // empty: seeded per stage
  std::optional<TokenMatrix> text_tokens;          // empty: seeded per stage
  std::size_t text_token_count = 5;
  std::size_t text_dim = 16;
  std::size_t key_dim = cca::kDefaultKeyDim;
  bool attention_bias = false;  // only for seeded attention weights
  cca::NormMode norm_mode = cca::NormMode::kPerChannel;
  double adapter_weight_scale = 0.5;
  ResidualOrder residual = ResidualOrder::kBeforeProjection;
  std::uint64_t seed = 0;

  // SDA at stage 1, CCA at stage 3.
  static PlacementConfig default_placement();
};

// Seed used by stage `stage` (1-based); depends only on (seed, stage).
std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage);

// Synthetic text embeddings: rows ~ N(0, 1).
TokenMatrix random_text_tokens(std::size_t count, std::size_t dim,
                               std::uint64_t seed);

// Applies the configured adapter to each stage independently; unassigned or
// kNone stages are returned unchanged.
std::vector<FeatureMap> run_stack(const std::vector<FeatureMap>& features,
                                  const PlacementConfig& cfg);

}  // namespace freqadapt::adapter
