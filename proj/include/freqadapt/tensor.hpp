#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace freqadapt {

// Dense C x H x W activation tensor, row-major (c, h, w), double precision.
class FeatureMap {
 public:
  FeatureMap() = default;
  // Zero-filled map.
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width);
  // Takes ownership of `data`; throws ShapeError on a length mismatch or a
  // zero dimension and InvalidArgument on a non-finite value.
  FeatureMap(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> data);

  std::size_t channels() const { return channels_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t plane_size() const { return height_ * width_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> channel(std::size_t c) const;
  std::span<double> channel(std::size_t c);

  double operator()(std::size_t c, std::size_t h, std::size_t w) const {
    return data_[(c * height_ + h) * width_ + w];
  }
  double& operator()(std::size_t c, std::size_t h, std::size_t w) {
    return data_[(c * height_ + h) * width_ + w];
  }

  bool same_shape(const FeatureMap& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// Row-major real matrix. Token matrices use rows as tokens and columns as the
// embedding dimension.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) {
    return std::span<double>(data_).subspan(r * cols_, cols_);
  }

  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using TokenMatrix = Matrix;

// Convolution weights laid out [out_channels, in_channels, k, k].
struct ConvKernel {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t size = 0;
  std::vector<double> weights;

  ConvKernel() = default;
  ConvKernel(std::size_t out, std::size_t in, std::size_t k);
  ConvKernel(std::size_t out, std::size_t in, std::size_t k,
             std::vector<double> w);

  // 1x1 identity mapping of `channels` channels.
  static ConvKernel identity(std::size_t channels);

  double& at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) {
    return weights[((o * in_channels + i) * size + y) * size + x];
  }
  double at(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
    return weights[((o * in_channels + i) * size + y) * size + x];
  }
};

// Elementwise helpers used across modules.
FeatureMap operator+(const FeatureMap& a, const FeatureMap& b);
FeatureMap operator-(const FeatureMap& a, const FeatureMap& b);
FeatureMap operator*(double s, const FeatureMap& a);
double max_abs_diff(const FeatureMap& a, const FeatureMap& b);
double max_abs_diff(const Matrix& a, const Matrix& b);
double inner(const FeatureMap& a, const FeatureMap& b);

}  // namespace freqadapt
