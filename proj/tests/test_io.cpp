#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "freqadapt/config.hpp"
#include "freqadapt/error.hpp"
#include "freqadapt/io.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/synth.hpp"
#include "support.hpp"

using namespace freqadapt;
using testing::bitwise_equal;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "freqadapt_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::uint8_t> header(std::uint32_t version, std::uint32_t ndim,
                                 std::initializer_list<std::uint64_t> dims) {
  std::vector<std::uint8_t> b{'F', 'T', 'N', 'S'};
  auto put = [&b](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(version, 4);
  put(ndim, 4);
  for (auto d : dims) put(d, 8);
  return b;
}

}  // namespace

TEST_CASE("tensor encoding layout is little-endian and exact") {
  io::Tensor t{{1, 2}, {1.0, -0.0}};
  const auto bytes = io::encode_tensor(t);
  REQUIRE(bytes.size() == 4 + 4 + 4 + 16 + 16);
  CHECK(std::memcmp(bytes.data(), "FTNS", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 1);
  CHECK(bytes[20] == 2);
  // 1.0 = 0x3FF0000000000000, -0.0 = 0x8000000000000000
  CHECK(bytes[28 + 7] == 0x3F);
  CHECK(bytes[28 + 6] == 0xF0);
  CHECK(bytes[36 + 7] == 0x80);
  CHECK(bytes[36] == 0x00);
}

TEST_CASE("tensor round trip is bitwise for every finite double") {
  Rng rng(61);
  std::vector<double> values{0.0,
                             -0.0,
                             1.0,
                             -1.0,
                             std::numeric_limits<double>::min(),
                             std::numeric_limits<double>::denorm_min(),
                             -std::numeric_limits<double>::denorm_min(),
                             std::numeric_limits<double>::max(),
                             std::numeric_limits<double>::lowest(),
                             std::numeric_limits<double>::epsilon()};
  for (int i = 0; i < 2000; ++i) {
    // Random bit patterns, skipping NaN and infinity.
    double v;
    do {
      const std::uint64_t bits = rng.next_u64();
      v = std::bit_cast<double>(bits);
    } while (!std::isfinite(v));
    values.push_back(v);
  }
  const io::Tensor t{{2, static_cast<std::uint64_t>(values.size() / 2)}, values};
  const io::Tensor back = io::decode_tensor(io::encode_tensor(t));
  CHECK(back.dims == t.dims);
  CHECK(bitwise_equal(back.values, t.values));

  const fs::path p = scratch("roundtrip.ftns");
  io::write_tensor(p, t);
  CHECK(bitwise_equal(io::read_tensor(p).values, t.values));
}

TEST_CASE("tensor round trip for assorted ranks") {
  Rng rng(62);
  for (std::uint64_t ndim = 0; ndim <= 4; ++ndim) {
    io::Tensor t;
    std::uint64_t count = 1;
    for (std::uint64_t d = 0; d < ndim; ++d) {
      t.dims.push_back(1 + rng.next_u64() % 4);
      count *= t.dims.back();
    }
    for (std::uint64_t i = 0; i < count; ++i) t.values.push_back(rng.normal());
    const io::Tensor back = io::decode_tensor(io::encode_tensor(t));
    CHECK(back.dims == t.dims);
    CHECK(bitwise_equal(back.values, t.values));
  }
  io::Tensor empty{{3, 0}, {}};
  CHECK(io::decode_tensor(io::encode_tensor(empty)).dims == empty.dims);
}

TEST_CASE("malformed tensor files are parse errors") {
  auto good = header(1, 1, {2});
  for (int i = 0; i < 16; ++i) good.push_back(0);
  CHECK_NOTHROW(io::decode_tensor(good));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(io::decode_tensor(bad_magic), ParseError);

  auto bad_version = header(2, 1, {2});
  bad_version.resize(bad_version.size() + 16);
  CHECK_THROWS_AS(io::decode_tensor(bad_version), ParseError);

  auto truncated = good;
  truncated.pop_back();
  CHECK_THROWS_AS(io::decode_tensor(truncated), ParseError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(io::decode_tensor(trailing), ParseError);

  CHECK_THROWS_AS(io::decode_tensor({'F', 'T', 'N'}), ParseError);
  CHECK_THROWS_AS(io::decode_tensor(header(1, 3, {2})), ParseError);

  auto huge = header(1, 2, {std::uint64_t{1} << 40, std::uint64_t{1} << 40});
  CHECK_THROWS_AS(io::decode_tensor(huge), ParseError);

  CHECK_THROWS_AS(io::read_tensor(scratch("does_not_exist.ftns")), ParseError);
}

TEST_CASE("feature map and matrix files") {
  Rng rng(63);
  const FeatureMap x = testing::random_map(rng, 2, 3, 4);
  const fs::path p = scratch("map.ftns");
  io::write_feature_map(p, x);
  CHECK(io::read_feature_map(p) == x);
  CHECK_THROWS_AS(io::read_matrix(p), ShapeError);

  const Matrix m = testing::random_matrix(rng, 3, 5);
  const fs::path q = scratch("matrix.ftns");
  io::write_matrix(q, m);
  CHECK(io::read_matrix(q) == m);
  CHECK_THROWS_AS(io::read_feature_map(q), ShapeError);

  io::write_tensor(p, {{1, 1, 2}, {1.0, std::numeric_limits<double>::quiet_NaN()}});
  CHECK_THROWS_AS(io::read_feature_map(p), ParseError);
}

TEST_CASE("PGM encoding") {
  const Matrix m(2, 3, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  const auto pgm = io::encode_pgm(m);
  const std::string head = "P5\n3 2\n255\n";
  REQUIRE(pgm.size() == head.size() + 6);
  CHECK(std::string(pgm.begin(), pgm.begin() + head.size()) == head);
  const std::uint8_t expected[] = {0, 51, 102, 153, 204, 255};
  for (int i = 0; i < 6; ++i) CHECK(pgm[head.size() + i] == expected[i]);

  const auto flat = io::encode_pgm(Matrix(2, 2, {3.0, 3.0, 3.0, 3.0}));
  for (std::size_t i = flat.size() - 4; i < flat.size(); ++i) CHECK(flat[i] == 0);
}

TEST_CASE("heatmap PGM of a constant map lights only the centre") {
  const FeatureMap c(1, 4, 6, std::vector<double>(24, 2.0));
  const auto pgm = io::encode_pgm(heatmap(decompose(fft2(c))));
  const std::size_t offset = pgm.size() - 24;
  for (std::size_t u = 0; u < 4; ++u) {
    for (std::size_t v = 0; v < 6; ++v) {
      CHECK(pgm[offset + u * 6 + v] == ((u == 2 && v == 3) ? 255 : 0));
    }
  }
  const auto zero = io::encode_pgm(heatmap(decompose(fft2(FeatureMap(1, 3, 3)))));
  for (std::size_t i = zero.size() - 9; i < zero.size(); ++i) CHECK(zero[i] == 0);
}

TEST_CASE("CSV keeps full precision") {
  const Matrix m(2, 2, {0.1, -1.0 / 3.0, 1e-300, 2.0});
  const std::string csv = io::encode_csv(m);
  CHECK(csv == "0.10000000000000001,-0.33333333333333331\n1e-300,2\n");
}

TEST_CASE("config text parsing") {
  const auto entries = config::parse_config_text(
      "# comment\n\nseed = 5\n  alpha=1,2 \ncut = 0.3  # trailing\nseed = 9\n");
  config::RunConfig cfg;
  cfg.apply(entries);
  CHECK(cfg.seed == 9);
  CHECK(cfg.alpha == std::vector<double>{1.0, 2.0});
  CHECK(cfg.cut == 0.3);
  CHECK_THROWS_AS(config::parse_config_text("seed 5\n"), ParseError);
}

TEST_CASE("config values are validated") {
  config::RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("colour", "red"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("seed", "-1"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("seed", "12x"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("alpha", "1,0"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("alpha", ""), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("cut", "1.0"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("cut", "0"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("dk", "0"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("stage", "1=wavelet"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("stage", "x=sda"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("kind", "stripes"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("scale_mode", "cubed"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("bias", "maybe"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("channels", "0"), InvalidArgument);
  CHECK_THROWS_AS(cfg.set("probes", "0"), InvalidArgument);

  cfg.set("stage", "1=sda,3=cca");
  CHECK(cfg.stages_given);
  CHECK(cfg.stages.at(1) == adapter::StageKind::kSda);
  CHECK(cfg.stages.at(3) == adapter::StageKind::kCca);
  cfg.set("scale_mode", "raw");
  CHECK(cfg.scale_mode == sda::ScaleMode::kRaw);
  cfg.set("norm_mode", "tensor");
  CHECK(cfg.norm_mode == cca::NormMode::kWholeTensor);
  cfg.set("residual", "after");
  CHECK(cfg.residual == adapter::ResidualOrder::kAfterProjection);
  cfg.set("bias", "true");
  CHECK(cfg.bias);
  cfg.set("in", "a.ftns,b.ftns");
  CHECK(cfg.in.size() == 2);
}

TEST_CASE("alpha broadcasting") {
  config::RunConfig cfg;
  CHECK(cfg.alpha_for(3) == std::vector<double>{1.0, 1.0, 1.0});
  cfg.set("alpha", "0.5");
  CHECK(cfg.alpha_for(2) == std::vector<double>{0.5, 0.5});
  cfg.set("alpha", "1,2,3");
  CHECK(cfg.alpha_for(3) == std::vector<double>{1.0, 2.0, 3.0});
  CHECK_THROWS_AS(cfg.alpha_for(4), ShapeError);
}

TEST_CASE("synthetic features") {
  const FeatureMap ch = synth::gen_features(synth::FeatureKind::kChecker, 1, 2, 2, 0);
  CHECK(ch == FeatureMap(1, 2, 2, {1.0, -1.0, -1.0, 1.0}));

  const FeatureMap noise = synth::gen_features(synth::FeatureKind::kNoise, 2, 5, 5, 3);
  CHECK(noise == synth::gen_features(synth::FeatureKind::kNoise, 2, 5, 5, 3));
  for (double v : noise.data()) {
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
  const FeatureMap noise16 = synth::gen_features(synth::FeatureKind::kNoise, 2, 16, 16, 3);
  const FeatureMap smooth16 = synth::gen_features(synth::FeatureKind::kSmooth, 2, 16, 16, 3);
  CHECK(band_energy(decompose(fft2(smooth16)), 0.25).high_fraction() <
        band_energy(decompose(fft2(noise16)), 0.25).high_fraction());

  CHECK_THROWS_AS(synth::gen_features(synth::FeatureKind::kNoise, 0, 2, 2, 0), ShapeError);
  CHECK(synth::parse_kind("smooth") == synth::FeatureKind::kSmooth);
  CHECK_FALSE(synth::parse_kind("plaid").has_value());
  CHECK(synth::kind_name(synth::FeatureKind::kChecker) == "checker");
}

TEST_CASE("smooth features are the noise blurred by a normalized Gaussian") {
  const FeatureMap noise = synth::gen_features(synth::FeatureKind::kNoise, 1, 9, 9, 4);
  const FeatureMap smooth = synth::gen_features(synth::FeatureKind::kSmooth, 1, 9, 9, 4);
  long double norm = 0.0L;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) norm += std::exp(-(dx * dx + dy * dy) / 2.0L);
  }
  long double acc = 0.0L;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      acc += std::exp(-(dx * dx + dy * dy) / 2.0L) / norm * noise(0, 4 + dy, 4 + dx);
    }
  }
  CHECK(std::abs(smooth(0, 4, 4) - static_cast<double>(acc)) < 1e-14);
  long double corner = 0.0L;
  for (int dy = 0; dy <= 2; ++dy) {
    for (int dx = 0; dx <= 2; ++dx) {
      corner += std::exp(-(dx * dx + dy * dy) / 2.0L) / norm * noise(0, dy, dx);
    }
  }
  CHECK(std::abs(smooth(0, 0, 0) - static_cast<double>(corner)) < 1e-14);
}

TEST_CASE("noise golden file, 1x4x4 seed 7") {
  const io::Tensor golden = io::read_tensor(FREQADAPT_GOLDEN_DIR "/noise_1x4x4_seed7.ftns");
  CHECK(golden.dims == std::vector<std::uint64_t>{1, 4, 4});
  const FeatureMap x = synth::gen_features(synth::FeatureKind::kNoise, 1, 4, 4, 7);
  CHECK(bitwise_equal(x.data(), golden.values));
}
