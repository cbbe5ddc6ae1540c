#pragma once

#include <cstdint>
#include <vector>

#include "freqadapt/spectral.hpp"
#include "freqadapt/tensor.hpp"

// Correlation constraint: visual tokens attend to text tokens, the result is
// mapped back to a feature map, and its amplitude spectrum is standardized
// before reconstruction with the original phase.

namespace freqadapt::cca {

// Single-head cross-attention weights. Visual tokens have dimension d_v,
// text tokens d_t.
struct AttentionParams {
  Matrix wq;  // d_v x d_k
  Matrix wk;  // d_t x d_k
  Matrix wv;  // d_t x d_k
  Matrix wo;  // d_k x d_v
  std::vector<double> bias;  // empty, or length d_v when the output projection has a bias

  std::size_t key_dim() const { return wq.cols(); }
  std::size_t visual_dim() const { return wq.rows(); }
  std::size_t text_dim() const { return wk.rows(); }

  // Throws ShapeError if the four matrices disagree.
  void validate() const;

  // Seeded N(0, 1/fan_in) weights; no bias unless `with_bias`.
  static AttentionParams random(std::size_t visual_dim, std::size_t text_dim,
                                std::size_t key_dim, std::uint64_t seed,
                                bool with_bias = false);
};

inline constexpr std::size_t kDefaultKeyDim = 64;

// Token i = h * W + w; channels become the embedding dimension.
TokenMatrix flatten_tokens(const FeatureMap& x);
FeatureMap unflatten_tokens(const TokenMatrix& t, std::size_t height,
                            std::size_t width);

// Intermediates of one attention pass, kept for derivative computations.
struct AttentionTrace {
  Matrix query;    // N x d_k
  Matrix key;      // M x d_k
  Matrix value;    // M x d_k
  Matrix weights;  // N x M, rows on the simplex
  Matrix output;   // N x d_v
};

AttentionTrace cross_attention_trace(const TokenMatrix& xv,
                                     const TokenMatrix& xt,
                                     const AttentionParams& p);

// out = softmax(Q K^T / sqrt(d_k)) V wo (+ bias), with Q = xv wq,
// K = xt wk, V = xt wv. No residual.
TokenMatrix cross_attention(const TokenMatrix& xv, const TokenMatrix& xt,
                            const AttentionParams& p);

enum class NormMode {
  kPerChannel,   // statistics over each channel's H x W bins
  kWholeTensor,  // one mean/std over all bins of all channels
};

// a -> (a - mean(a)) / std(a), population std. Throws DegenerateSpectrum when
// a group's std is <= 1e-12. Phase is copied unchanged.
AmpPhase amp_normalize(const AmpPhase& ap, NormMode mode = NormMode::kPerChannel);

// Frequency stage alone: fft2 -> decompose -> amp_normalize -> compose -> ifft2.
FeatureMap normalize_frequency(const FeatureMap& x,
                               NormMode mode = NormMode::kPerChannel);

FeatureMap cca_forward(const FeatureMap& x, const TokenMatrix& xt,
                       const AttentionParams& p,
                       NormMode mode = NormMode::kPerChannel);

// High-band energy fraction of `after` minus that of `before`.
double hf_shift(const FeatureMap& before, const FeatureMap& after,
                double radial_cut);

// Share of squared amplitude held by the DC bin of channel c.
double dc_share(const AmpPhase& ap, std::size_t channel);

}  // namespace freqadapt::cca
