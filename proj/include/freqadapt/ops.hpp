#pragma once

#include "freqadapt/tensor.hpp"

namespace freqadapt {

// "Same" 2D convolution with zero padding. `padding` must equal (k - 1) / 2
// and k must be odd; output shape is [out_channels, H, W].
FeatureMap conv2d(const FeatureMap& input, const ConvKernel& kernel,
                  std::size_t padding);

double silu(double x);
double silu_derivative(double x);
FeatureMap silu(const FeatureMap& input);

Matrix matmul(const Matrix& a, const Matrix& b);

// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& m);

}  // namespace freqadapt
