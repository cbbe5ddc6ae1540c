#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freqadapt/tensor.hpp"

// Binary tensor files ("FTNS"):
//
//   offset  size        field
//   0       4           magic "FTNS"
//   4       4           version, u32 little-endian, = 1
//   8       4           ndim, u32 little-endian
//   12      8 * ndim    dims, u64 little-endian each
//   ...     8 * prod    payload, IEEE-754 binary64 little-endian, row-major
//
// Nothing may follow the payload.

namespace freqadapt::io {

inline constexpr std::uint32_t kTensorFileVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
// Throws ParseError on any malformed input.
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

void write_feature_map(const std::filesystem::path& path, const FeatureMap& x);
// Throws ShapeError unless the file holds a 3-axis tensor.
FeatureMap read_feature_map(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

// Binary PGM ("P5", maxval 255) of `m` min-max scaled to [0, 255]. A constant
// field maps to all zeros.
std::vector<std::uint8_t> encode_pgm(const Matrix& m);
void write_pgm(const std::filesystem::path& path, const Matrix& m);

// One matrix row per line, comma separated, 17 significant digits.
std::string encode_csv(const Matrix& m);
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace freqadapt::io
