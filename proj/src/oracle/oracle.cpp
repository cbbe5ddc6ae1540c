#include "freqadapt/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "freqadapt/error.hpp"

namespace freqadapt::oracle {

FeatureMap conv2d_naive(const FeatureMap& input, const ConvKernel& kernel) {
  const long k = static_cast<long>(kernel.size);
  const long pad = (k - 1) / 2;
  const long height = static_cast<long>(input.height());
  const long width = static_cast<long>(input.width());
  FeatureMap out(kernel.out_channels, input.height(), input.width());
  for (std::size_t co = 0; co < kernel.out_channels; ++co) {
    for (long y = 0; y < height; ++y) {
      for (long x = 0; x < width; ++x) {
        long double acc = 0.0L;
        for (std::size_t ci = 0; ci < kernel.in_channels; ++ci) {
          for (long ky = 0; ky < k; ++ky) {
            for (long kx = 0; kx < k; ++kx) {
              const long sy = y + ky - pad;
              const long sx = x + kx - pad;
              if (sy < 0 || sy >= height || sx < 0 || sx >= width) continue;
              acc += static_cast<long double>(
                         kernel.at(co, ci, static_cast<std::size_t>(ky),
                                   static_cast<std::size_t>(kx))) *
                     input(ci, static_cast<std::size_t>(sy),
                           static_cast<std::size_t>(sx));
            }
          }
        }
        out(co, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
            static_cast<double>(acc);
      }
    }
  }
  return out;
}

namespace {

using LMatrix = std::vector<std::vector<long double>>;

LMatrix widen(const Matrix& m) {
  LMatrix out(m.rows(), std::vector<long double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

LMatrix product(const LMatrix& a, const LMatrix& b, std::size_t b_cols) {
  LMatrix out(a.size(), std::vector<long double>(b_cols, 0.0L));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b_cols; ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < b.size(); ++k) acc += a[i][k] * b[k][j];
      out[i][j] = acc;
    }
  }
  return out;
}

}  // namespace

Matrix matmul_naive(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul_naive: dimensions");
  const LMatrix p = product(widen(a), widen(b), b.cols());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) = static_cast<double>(p[i][j]);
  }
  return out;
}

std::vector<long double> softmax_extended(std::span<const double> row) {
  std::vector<long double> out(row.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i] = std::exp(static_cast<long double>(row[i]));
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return out;
}

Matrix attention_dense(const Matrix& xv, const Matrix& xt,
                       const cca::AttentionParams& p) {
  const std::size_t dk = p.wq.cols();
  const LMatrix q = product(widen(xv), widen(p.wq), dk);
  const LMatrix k = product(widen(xt), widen(p.wk), dk);
  const LMatrix v = product(widen(xt), widen(p.wv), dk);
  const long double scale = std::sqrt(static_cast<long double>(dk));
  LMatrix attn(q.size(), std::vector<long double>(k.size()));
  for (std::size_t i = 0; i < q.size(); ++i) {
    long double peak = -INFINITY;
    for (std::size_t j = 0; j < k.size(); ++j) {
      long double s = 0.0L;
      for (std::size_t d = 0; d < dk; ++d) s += q[i][d] * k[j][d];
      attn[i][j] = s / scale;
      peak = std::max(peak, attn[i][j]);
    }
    long double total = 0.0L;
    for (auto& a : attn[i]) {
      a = std::exp(a - peak);
      total += a;
    }
    for (auto& a : attn[i]) a /= total;
  }
  const LMatrix mixed = product(attn, v, dk);
  const LMatrix out = product(mixed, widen(p.wo), p.wo.cols());
  Matrix result(xv.rows(), p.wo.cols());
  for (std::size_t i = 0; i < result.rows(); ++i) {
    for (std::size_t j = 0; j < result.cols(); ++j) {
      long double value = out[i][j];
      if (!p.bias.empty()) value += p.bias[j];
      result(i, j) = static_cast<double>(value);
    }
  }
  return result;
}

sda::StyleStats channel_stats_extended(const FeatureMap& x) {
  sda::StyleStats stats;
  const long double n = static_cast<long double>(x.plane_size());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    long double sum = 0.0L;
    for (double v : x.channel(c)) sum += v;
    const long double mean = sum / n;
    long double sq = 0.0L;
    for (double v : x.channel(c)) sq += (v - mean) * (v - mean);
    stats.mu_base.push_back(static_cast<double>(mean));
    stats.sigma_base.push_back(static_cast<double>(std::sqrt(sq / n)));
  }
  return stats;
}

BandEnergy band_energy_direct(const FeatureMap& x, double radial_cut) {
  const Spectrum s = dft2_oracle(x);
  const long h = static_cast<long>(x.height());
  const long w = static_cast<long>(x.width());
  long double low = 0.0L;
  long double high = 0.0L;
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (long u = 0; u < h; ++u) {
      for (long v = 0; v < w; ++v) {
        // Offset from the DC position after centering.
        const long cu = (u + h / 2) % h - h / 2;
        const long cv = (v + w / 2) % w - w / 2;
        const long double ru = static_cast<long double>(cu) / (h / 2.0L);
        const long double rv = static_cast<long double>(cv) / (w / 2.0L);
        const long double radius = std::sqrt(ru * ru + rv * rv);
        const std::size_t i = s.index(c, static_cast<std::size_t>(u),
                                      static_cast<std::size_t>(v));
        const long double e = static_cast<long double>(s.real[i]) * s.real[i] +
                              static_cast<long double>(s.imag[i]) * s.imag[i];
        (radius <= radial_cut ? low : high) += e;
      }
    }
  }
  const long double channels = static_cast<long double>(x.channels());
  return {static_cast<double>(low / channels), static_cast<double>(high / channels)};
}

Matrix heatmap_direct(const FeatureMap& x) {
  const Spectrum s = dft2_oracle(x);
  Matrix out(x.height(), x.width());
  for (std::size_t u = 0; u < x.height(); ++u) {
    for (std::size_t v = 0; v < x.width(); ++v) {
      long double acc = 0.0L;
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const std::size_t i = s.index(c, u, v);
        acc += std::log1p(std::hypot(static_cast<long double>(s.real[i]),
                                     static_cast<long double>(s.imag[i])));
      }
      const std::size_t cu = (u + x.height() / 2) % x.height();
      const std::size_t cv = (v + x.width() / 2) % x.width();
      out(cu, cv) = static_cast<double>(acc / x.channels());
    }
  }
  return out;
}

namespace {

FeatureMap real_part(const Spectrum& s) {
  return FeatureMap(s.channels, s.height, s.width, s.real);
}

}  // namespace

FeatureMap sda_direct(const FeatureMap& x, const sda::AffineStyle& style) {
  Spectrum s = dft2_oracle(x);
  const std::size_t plane = s.plane_size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t c = i / plane;
    const long double re = s.real[i];
    const long double im = s.imag[i];
    const long double amp = std::sqrt(re * re + im * im + 1e-24L);
    const long double phase = std::atan2(im, re);
    const long double fused = style.sigma[c] * amp + style.mu[c];
    s.real[i] = static_cast<double>(fused * std::cos(phase));
    s.imag[i] = static_cast<double>(fused * std::sin(phase));
  }
  return real_part(idft2_oracle(s));
}

FeatureMap normalize_frequency_direct(const FeatureMap& x) {
  Spectrum s = dft2_oracle(x);
  const std::size_t plane = s.plane_size();
  for (std::size_t c = 0; c < s.channels; ++c) {
    std::vector<long double> amp(plane);
    std::vector<long double> phase(plane);
    long double sum = 0.0L;
    for (std::size_t j = 0; j < plane; ++j) {
      const long double re = s.real[c * plane + j];
      const long double im = s.imag[c * plane + j];
      amp[j] = std::sqrt(re * re + im * im + 1e-24L);
      phase[j] = std::atan2(im, re);
      sum += amp[j];
    }
    const long double mean = sum / plane;
    long double sq = 0.0L;
    for (auto a : amp) sq += (a - mean) * (a - mean);
    const long double sd = std::sqrt(sq / plane);
    for (std::size_t j = 0; j < plane; ++j) {
      const long double n = (amp[j] - mean) / sd;
      s.real[c * plane + j] = static_cast<double>(n * std::cos(phase[j]));
      s.imag[c * plane + j] = static_cast<double>(n * std::sin(phase[j]));
    }
  }
  return real_part(idft2_oracle(s));
}

FeatureMap cca_direct(const FeatureMap& x, const Matrix& xt,
                      const cca::AttentionParams& p) {
  Matrix tokens(x.plane_size(), x.channels());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t i = 0; i < x.plane_size(); ++i) tokens(i, c) = x.channel(c)[i];
  }
  const Matrix enhanced = attention_dense(tokens, xt, p);
  FeatureMap y(enhanced.cols(), x.height(), x.width());
  for (std::size_t c = 0; c < enhanced.cols(); ++c) {
    for (std::size_t i = 0; i < x.plane_size(); ++i) y.channel(c)[i] = enhanced(i, c);
  }
  return normalize_frequency_direct(y);
}

}  // namespace freqadapt::oracle
