#include "freqadapt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freqadapt/error.hpp"
#include "freqadapt/simd/kernels.hpp"

namespace freqadapt {

FeatureMap conv2d(const FeatureMap& input, const ConvKernel& kernel,
                  std::size_t padding) {
  const std::size_t k = kernel.size;
  if (k == 0 || k % 2 == 0) {
    throw InvalidArgument("conv2d: kernel size must be odd, got " +
                          std::to_string(k));
  }
  if (kernel.in_channels != input.channels()) {
    throw ShapeError("conv2d: kernel expects " +
                     std::to_string(kernel.in_channels) +
                     " input channels, map has " +
                     std::to_string(input.channels()));
  }
  if (padding != (k - 1) / 2) {
    throw ShapeError("conv2d: padding must be (k-1)/2 for same-size output");
  }
  if (kernel.out_channels == 0) {
    throw ShapeError("conv2d: kernel has no output channels");
  }

  const auto& simd = simd::kernels();
  const std::size_t height = input.height();
  const std::size_t width = input.width();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(padding);
  const std::ptrdiff_t h_len = static_cast<std::ptrdiff_t>(height);
  const std::ptrdiff_t w_len = static_cast<std::ptrdiff_t>(width);
  FeatureMap out(kernel.out_channels, height, width);

  // Each output row accumulates, in (ci, ky, kx) order, a shifted input row
  // times one weight; taps that fall in the zero padding are skipped.
  for (std::size_t co = 0; co < kernel.out_channels; ++co) {
    for (std::size_t y = 0; y < height; ++y) {
      double* dst = &out(co, y, 0);
      for (std::size_t ci = 0; ci < kernel.in_channels; ++ci) {
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - pad;
          if (sy < 0 || sy >= h_len) continue;
          const double* src_row =
              input.channel(ci).data() + static_cast<std::size_t>(sy) * width;
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - pad;
            const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -shift);
            const std::ptrdiff_t x1 = std::min(w_len, w_len - shift);
            if (x1 <= x0) continue;
            simd.axpy(kernel.at(co, ci, ky, kx), src_row + x0 + shift, dst + x0,
                      static_cast<std::size_t>(x1 - x0));
          }
        }
      }
    }
  }
  return out;
}

double silu(double x) { return x / (1.0 + std::exp(-x)); }

double silu_derivative(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

FeatureMap silu(const FeatureMap& input) {
  FeatureMap out = input;
  for (double& v : out.data()) v = silu(v);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " times " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const auto& simd = simd::kernels();
  Matrix out(a.rows(), b.cols());
  // i-k-j order: every output element accumulates over k in sequence.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      simd.axpy(a(i, k), b.row(k).data(), dst, b.cols());
    }
  }
  return out;
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    auto dst = out.row(r);
    if (src.empty()) continue;
    const double peak = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (std::size_t c = 0; c < src.size(); ++c) {
      dst[c] = std::exp(src[c] - peak);
      total += dst[c];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

}  // namespace freqadapt
