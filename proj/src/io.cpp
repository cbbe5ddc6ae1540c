#include "freqadapt/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "freqadapt/error.hpp"

namespace freqadapt::io {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'N', 'S'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint64_t take(std::size_t width, const char* what) {
    if (bytes_.size() - pos_ < width) {
      throw ParseError(std::string("tensor file truncated in ") + what);
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::uint64_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.values.size()) {
    throw ShapeError("encode_tensor: payload length does not match dims");
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kTensorFileVersion);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u64(out, d);
  for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic),
                                      bytes.begin())) {
    throw ParseError("tensor file: bad magic (expected FTNS)");
  }
  Reader r(bytes);
  r.take(4, "magic");
  const auto version = r.take(4, "version");
  if (version != kTensorFileVersion) {
    throw ParseError("tensor file: unsupported version " + std::to_string(version));
  }
  const auto ndim = r.take(4, "ndim");
  if (ndim > r.remaining() / 8) throw ParseError("tensor file: truncated dims");
  Tensor t;
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < ndim; ++i) {
    const auto d = r.take(8, "dims");
    if (d != 0 && count > UINT64_MAX / d) {
      throw ParseError("tensor file: element count overflows");
    }
    count *= d;
    t.dims.push_back(d);
  }
  if (count > r.remaining() / 8 || r.remaining() != count * 8) {
    throw ParseError("tensor file: payload holds " +
                     std::to_string(r.remaining()) + " bytes, dims require " +
                     std::to_string(count * 8));
  }
  t.values.resize(count);
  for (auto& v : t.values) v = std::bit_cast<double>(r.take(8, "payload"));
  return t;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw ParseError("read failure on " + path.string());
  return bytes;
}

namespace {

void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError("write failure on " + path.string());
}

void require_finite(const Tensor& t, const std::filesystem::path& path) {
  for (double v : t.values) {
    if (!std::isfinite(v)) {
      throw ParseError(path.string() + ": payload holds a non-finite value");
    }
  }
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_bytes(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_bytes(path));
}

void write_feature_map(const std::filesystem::path& path, const FeatureMap& x) {
  write_tensor(path, {{x.channels(), x.height(), x.width()},
                      std::vector<double>(x.data().begin(), x.data().end())});
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (t.dims.size() != 3) {
    throw ShapeError(path.string() + ": expected a 3-axis C x H x W tensor, got " +
                     std::to_string(t.dims.size()) + " axes");
  }
  require_finite(t, path);
  return FeatureMap(t.dims[0], t.dims[1], t.dims[2], std::move(t.values));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_tensor(path, {{m.rows(), m.cols()},
                      std::vector<double>(m.data().begin(), m.data().end())});
}

Matrix read_matrix(const std::filesystem::path& path) {
  Tensor t = read_tensor(path);
  if (t.dims.size() != 2) {
    throw ShapeError(path.string() + ": expected a 2-axis matrix, got " +
                     std::to_string(t.dims.size()) + " axes");
  }
  require_finite(t, path);
  return Matrix(t.dims[0], t.dims[1], std::move(t.values));
}

std::vector<std::uint8_t> encode_pgm(const Matrix& m) {
  const std::string header = "P5\n" + std::to_string(m.cols()) + " " +
                             std::to_string(m.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto [lo_it, hi_it] = std::minmax_element(m.data().begin(), m.data().end());
  const double lo = m.size() ? *lo_it : 0.0;
  const double hi = m.size() ? *hi_it : 0.0;
  for (double v : m.data()) {
    std::uint8_t level = 0;
    if (hi > lo) {
      level = static_cast<std::uint8_t>(std::lround(255.0 * (v - lo) / (hi - lo)));
    }
    out.push_back(level);
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Matrix& m) {
  write_bytes(path, encode_pgm(m));
}

std::string encode_csv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace freqadapt::io
