#include "freqadapt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "freqadapt/error.hpp"

namespace freqadapt {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": non-finite value");
    }
  }
}

std::string dims3(std::size_t c, std::size_t h, std::size_t w) {
  return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

}  // namespace

FeatureMap::FeatureMap(std::size_t channels, std::size_t height,
                       std::size_t width)
    : FeatureMap(channels, height, width,
                 std::vector<double>(channels * height * width, 0.0)) {}

FeatureMap::FeatureMap(std::size_t channels, std::size_t height,
                       std::size_t width, std::vector<double> data)
    : channels_(channels), height_(height), width_(width),
      data_(std::move(data)) {
  if (channels == 0 || height == 0 || width == 0) {
    throw ShapeError("FeatureMap: zero dimension in " +
                     dims3(channels, height, width));
  }
  if (data_.size() != channels * height * width) {
    throw ShapeError("FeatureMap: data length " + std::to_string(data_.size()) +
                     " does not match " + dims3(channels, height, width));
  }
  require_finite(data_, "FeatureMap");
}

std::span<const double> FeatureMap::channel(std::size_t c) const {
  return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
}

std::span<double> FeatureMap::channel(std::size_t c) {
  return std::span<double>(data_).subspan(c * plane_size(), plane_size());
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

ConvKernel::ConvKernel(std::size_t out, std::size_t in, std::size_t k)
    : out_channels(out), in_channels(in), size(k), weights(out * in * k * k) {}

ConvKernel::ConvKernel(std::size_t out, std::size_t in, std::size_t k,
                       std::vector<double> w)
    : out_channels(out), in_channels(in), size(k), weights(std::move(w)) {
  if (weights.size() != out * in * k * k) {
    throw ShapeError("ConvKernel: weight count does not match shape");
  }
  require_finite(weights, "ConvKernel");
}

ConvKernel ConvKernel::identity(std::size_t channels) {
  ConvKernel k(channels, channels, 1);
  for (std::size_t c = 0; c < channels; ++c) k.at(c, c, 0, 0) = 1.0;
  return k;
}

namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("FeatureMap shapes differ: " +
                     dims3(a.channels(), a.height(), a.width()) + " vs " +
                     dims3(b.channels(), b.height(), b.width()));
  }
}

}  // namespace

FeatureMap operator+(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b);
  FeatureMap out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

FeatureMap operator-(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b);
  FeatureMap out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

FeatureMap operator*(double s, const FeatureMap& a) {
  FeatureMap out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

double max_abs_diff(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) {
    worst = std::max(worst, std::abs(ad[i] - bd[i]));
  }
  return worst;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("Matrix shapes differ");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

double inner(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

}  // namespace freqadapt
