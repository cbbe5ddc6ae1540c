#include "freqadapt/cca.hpp"

#include <cmath>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/random.hpp"
#include "freqadapt/simd/kernels.hpp"

namespace freqadapt::cca {

void AttentionParams::validate() const {
  const std::size_t dk = wq.cols();
  if (dk == 0) throw ShapeError("attention: key dimension must be >= 1");
  if (wk.cols() != dk || wv.cols() != dk || wo.rows() != dk) {
    throw ShapeError("attention: projections disagree on the key dimension");
  }
  if (wk.rows() != wv.rows()) {
    throw ShapeError("attention: key and value projections take different "
                     "text dimensions");
  }
  if (wo.cols() != wq.rows()) {
    throw ShapeError("attention: output projection must map back to the "
                     "visual dimension");
  }
  if (!bias.empty() && bias.size() != wo.cols()) {
    throw ShapeError("attention: bias length does not match visual dimension");
  }
}

AttentionParams AttentionParams::random(std::size_t visual_dim,
                                        std::size_t text_dim,
                                        std::size_t key_dim, std::uint64_t seed,
                                        bool with_bias) {
  Rng rng(seed);
  auto fill = [&rng](std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
  };
  AttentionParams p;
  p.wq = fill(visual_dim, key_dim);
  p.wk = fill(text_dim, key_dim);
  p.wv = fill(text_dim, key_dim);
  p.wo = fill(key_dim, visual_dim);
  if (with_bias) {
    p.bias.resize(visual_dim);
    for (double& b : p.bias) b = 0.1 * rng.normal();
  }
  return p;
}

TokenMatrix flatten_tokens(const FeatureMap& x) {
  TokenMatrix t(x.plane_size(), x.channels());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    auto plane = x.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) t(i, c) = plane[i];
  }
  return t;
}

FeatureMap unflatten_tokens(const TokenMatrix& t, std::size_t height,
                            std::size_t width) {
  if (t.rows() != height * width) {
    throw ShapeError("unflatten_tokens: " + std::to_string(t.rows()) +
                     " tokens cannot form a " + std::to_string(height) + "x" +
                     std::to_string(width) + " plane");
  }
  FeatureMap x(t.cols(), height, width);
  for (std::size_t c = 0; c < t.cols(); ++c) {
    auto plane = x.channel(c);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = t(i, c);
  }
  return x;
}

AttentionTrace cross_attention_trace(const TokenMatrix& xv,
                                     const TokenMatrix& xt,
                                     const AttentionParams& p) {
  p.validate();
  if (xv.cols() != p.visual_dim()) {
    throw ShapeError("cross_attention: visual tokens have dim " +
                     std::to_string(xv.cols()) + ", query projection expects " +
                     std::to_string(p.visual_dim()));
  }
  if (xt.cols() != p.text_dim()) {
    throw ShapeError("cross_attention: text tokens have dim " +
                     std::to_string(xt.cols()) + ", key projection expects " +
                     std::to_string(p.text_dim()));
  }
  if (xt.rows() == 0) throw ShapeError("cross_attention: no text tokens");

  AttentionTrace tr;
  tr.query = matmul(xv, p.wq);
  tr.key = matmul(xt, p.wk);
  tr.value = matmul(xt, p.wv);
  Matrix scores = matmul(tr.query, tr.key.transposed());
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(p.key_dim()));
  for (double& s : scores.data()) s *= inv_scale;
  tr.weights = softmax_rows(scores);
  tr.output = matmul(matmul(tr.weights, tr.value), p.wo);
  if (!p.bias.empty()) {
    for (std::size_t i = 0; i < tr.output.rows(); ++i) {
      auto row = tr.output.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += p.bias[j];
    }
  }
  return tr;
}

TokenMatrix cross_attention(const TokenMatrix& xv, const TokenMatrix& xt,
                            const AttentionParams& p) {
  return cross_attention_trace(xv, xt, p).output;
}

namespace {

struct Moments {
  double mean;
  double stddev;
};

Moments moments(const double* a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i];
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) sq += (a[i] - mean) * (a[i] - mean);
  return {mean, std::sqrt(sq / static_cast<double>(n))};
}

}  // namespace

AmpPhase amp_normalize(const AmpPhase& ap, NormMode mode) {
  AmpPhase out = ap;
  const std::size_t group =
      mode == NormMode::kPerChannel ? ap.plane_size() : ap.size();
  const std::size_t groups = ap.size() / group;
  const auto& simd = simd::kernels();
  for (std::size_t g = 0; g < groups; ++g) {
    const double* src = ap.amplitude.data() + g * group;
    const Moments m = moments(src, group);
    if (!(m.stddev > 1e-12)) {
      throw DegenerateSpectrum("amp_normalize: amplitude spread " +
                               std::to_string(m.stddev) + " in group " +
                               std::to_string(g) +
                               " is too small to normalize");
    }
    simd.standardize(m.mean, m.stddev, src, out.amplitude.data() + g * group,
                     group);
  }
  return out;
}

FeatureMap normalize_frequency(const FeatureMap& x, NormMode mode) {
  return ifft2(compose(amp_normalize(decompose(fft2(x)), mode))).map;
}

FeatureMap cca_forward(const FeatureMap& x, const TokenMatrix& xt,
                       const AttentionParams& p, NormMode mode) {
  const TokenMatrix enhanced = cross_attention(flatten_tokens(x), xt, p);
  return normalize_frequency(unflatten_tokens(enhanced, x.height(), x.width()),
                             mode);
}

double hf_shift(const FeatureMap& before, const FeatureMap& after,
                double radial_cut) {
  if (!before.same_shape(after)) {
    throw ShapeError("hf_shift: maps differ in shape");
  }
  const double f_before =
      band_energy(decompose(fft2(before)), radial_cut).high_fraction();
  const double f_after =
      band_energy(decompose(fft2(after)), radial_cut).high_fraction();
  return f_after - f_before;
}

double dc_share(const AmpPhase& ap, std::size_t channel) {
  const std::size_t plane = ap.plane_size();
  const double* a = ap.amplitude.data() + channel * plane;
  double total = 0.0;
  for (std::size_t i = 0; i < plane; ++i) total += a[i] * a[i];
  return total > 0.0 ? a[0] * a[0] / total : 0.0;
}

}  // namespace freqadapt::cca
