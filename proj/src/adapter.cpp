#include "freqadapt/adapter.hpp"

#include <cmath>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/parallel.hpp"
#include "freqadapt/random.hpp"

namespace freqadapt::adapter {

namespace {

void check_kernel(const ConvKernel& k, std::size_t channels, std::size_t size,
                  const char* name) {
  if (k.out_channels != channels || k.in_channels != channels ||
      k.size != size) {
    throw ShapeError(std::string("adapter weights: ") + name + " must be " +
                     std::to_string(channels) + "x" + std::to_string(channels) +
                     "x" + std::to_string(size) + "x" + std::to_string(size));
  }
}

ConvKernel random_kernel(Rng& rng, std::size_t channels, std::size_t size,
                         double scale) {
  ConvKernel k(channels, channels, size);
  const double std_dev =
      scale / std::sqrt(static_cast<double>(channels * size * size));
  for (double& w : k.weights) w = std_dev * rng.normal();
  return k;
}

}  // namespace

void AdapterWeights::validate() const {
  const std::size_t c = agg.out_channels;
  check_kernel(k3, c, 3, "k3");
  check_kernel(k5, c, 5, "k5");
  check_kernel(k7, c, 7, "k7");
  check_kernel(agg, c, 1, "agg");
  check_kernel(proj, c, 1, "proj");
}

AdapterWeights AdapterWeights::zero_branch(std::size_t channels) {
  return {ConvKernel(channels, channels, 3), ConvKernel(channels, channels, 5),
          ConvKernel(channels, channels, 7), ConvKernel(channels, channels, 1),
          ConvKernel::identity(channels)};
}

AdapterWeights AdapterWeights::random(std::size_t channels, std::uint64_t seed,
                                      double scale) {
  Rng rng(seed);
  AdapterWeights w;
  w.k3 = random_kernel(rng, channels, 3, scale);
  w.k5 = random_kernel(rng, channels, 5, scale);
  w.k7 = random_kernel(rng, channels, 7, scale);
  w.agg = random_kernel(rng, channels, 1, scale);
  w.proj = random_kernel(rng, channels, 1, 1.0);
  return w;
}

FeatureMap plain_forward(const FeatureMap& x, const AdapterWeights& w,
                         const Augment& augment, ResidualOrder order) {
  w.validate();
  if (w.channels() != x.channels()) {
    throw ShapeError("plain_forward: weights for " +
                     std::to_string(w.channels()) + " channels, map has " +
                     std::to_string(x.channels()));
  }
  FeatureMap mixed = conv2d(x, w.k3, 1) + conv2d(x, w.k5, 2) + conv2d(x, w.k7, 3);
  for (double& v : mixed.data()) v /= 3.0;
  FeatureMap branch = silu(conv2d(mixed, w.agg, 0));
  if (augment) branch = augment(branch);
  if (!branch.same_shape(x)) {
    throw ShapeError("plain_forward: augmentation changed the feature shape");
  }
  if (order == ResidualOrder::kBeforeProjection) {
    return conv2d(x + branch, w.proj, 0);
  }
  return x + conv2d(branch, w.proj, 0);
}

FeatureMap plain_forward(const FeatureMap& x, const AdapterWeights& w) {
  return plain_forward(x, w, Augment{});
}

std::string_view stage_kind_name(StageKind kind) {
  switch (kind) {
    case StageKind::kNone:
      return "none";
    case StageKind::kPlain:
      return "plain";
    case StageKind::kSda:
      return "sda";
    case StageKind::kCca:
      return "cca";
  }
  return "none";
}

std::optional<StageKind> parse_stage_kind(std::string_view name) {
  if (name == "none") return StageKind::kNone;
  if (name == "plain") return StageKind::kPlain;
  if (name == "sda") return StageKind::kSda;
  if (name == "cca") return StageKind::kCca;
  return std::nullopt;
}

PlacementConfig PlacementConfig::default_placement() {
  PlacementConfig cfg;
  cfg.stage_assignments = {{1, StageKind::kSda}, {3, StageKind::kCca}};
  return cfg;
}

std::uint64_t stage_seed(std::uint64_t seed, std::size_t stage) {
  return mix_seed(seed, stage);
}

TokenMatrix random_text_tokens(std::size_t count, std::size_t dim,
                               std::uint64_t seed) {
  Rng rng(seed);
  TokenMatrix t(count, dim);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

namespace {

// Independent sub-streams of one stage seed.
enum Stream : std::uint64_t {
  kWeightsStream = 1,
  kDirichletStream = 2,
  kAttentionStream = 3,
  kTextStream = 4,
};

FeatureMap run_stage(const FeatureMap& x, StageKind kind, std::size_t stage,
                     const PlacementConfig& cfg) {
  if (kind == StageKind::kNone) return x;
  const std::uint64_t seed = stage_seed(cfg.seed, stage);
  const AdapterWeights weights = AdapterWeights::random(
      x.channels(), mix_seed(seed, kWeightsStream), cfg.adapter_weight_scale);

  Augment augment;
  if (kind == StageKind::kSda) {
    std::vector<double> alpha = cfg.sda_alpha;
    if (alpha.empty()) alpha.assign(x.channels(), 1.0);
    const std::uint64_t draw = mix_seed(seed, kDirichletStream);
    augment = [alpha, draw, &cfg](const FeatureMap& branch) {
      return sda::sda_forward(branch, alpha, draw, cfg.sda_scale);
    };
  } else if (kind == StageKind::kCca) {
    cca::AttentionParams params =
        cfg.cca_params ? *cfg.cca_params
                       : cca::AttentionParams::random(
                             x.channels(), cfg.text_dim, cfg.key_dim,
                             mix_seed(seed, kAttentionStream),
                             cfg.attention_bias);
    TokenMatrix text = cfg.text_tokens
                           ? *cfg.text_tokens
                           : random_text_tokens(cfg.text_token_count,
                                                params.text_dim(),
                                                mix_seed(seed, kTextStream));
    augment = [params = std::move(params), text = std::move(text),
               mode = cfg.norm_mode](const FeatureMap& branch) {
      return cca::cca_forward(branch, text, params, mode);
    };
  }
  return plain_forward(x, weights, augment, cfg.residual);
}

}  // namespace

std::vector<FeatureMap> run_stack(const std::vector<FeatureMap>& features,
                                  const PlacementConfig& cfg) {
  if (features.size() != cfg.stage_count) {
    throw ShapeError("run_stack: " + std::to_string(features.size()) +
                     " feature maps for " + std::to_string(cfg.stage_count) +
                     " stages");
  }
  for (const auto& [stage, kind] : cfg.stage_assignments) {
    if (stage < 1 || stage > cfg.stage_count) {
      throw InvalidArgument("run_stack: stage " + std::to_string(stage) +
                            " outside 1.." + std::to_string(cfg.stage_count));
    }
  }
  std::vector<FeatureMap> out(features.size());
  parallel_for(features.size(), [&](std::size_t i) {
    const auto it = cfg.stage_assignments.find(i + 1);
    const StageKind kind =
        it == cfg.stage_assignments.end() ? StageKind::kNone : it->second;
    out[i] = run_stage(features[i], kind, i + 1, cfg);
  });
  return out;
}

}  // namespace freqadapt::adapter
