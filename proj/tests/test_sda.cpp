#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "freqadapt/error.hpp"
#include "freqadapt/oracle.hpp"
#include "freqadapt/random.hpp"
#include "freqadapt/sda.hpp"
#include "support.hpp"

using namespace freqadapt;
using testing::bitwise_equal;
using testing::random_map;

TEST_CASE("engine: reference 10000th output of the default-seeded mt19937_64") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next_u64();
  CHECK(v == 9981545732273789042ULL);
}

TEST_CASE("uniform draws use the top 53 bits") {
  Rng a(3);
  std::mt19937_64 e(3);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == static_cast<double>(e() >> 11) * 0x1p-53);
  }
  Rng b(4);
  for (int i = 0; i < 10000; ++i) {
    const double u = b.uniform_open();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have unit moments") {
  Rng rng(5);
  constexpr int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("mix_seed separates streams deterministically") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0, 1) != mix_seed(0, 2));
  CHECK(mix_seed(0, 0) == 0);
}

TEST_CASE("gamma variates have the right mean, including tiny shapes") {
  for (double shape : {0.05, 0.5, 1.0, 2.5, 40.0}) {
    Rng rng(static_cast<std::uint64_t>(shape * 1000));
    constexpr int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += gamma_variate(rng, shape);
    const double sd_of_mean = std::sqrt(shape / n);
    CHECK(std::abs(sum / n - shape) < 5.0 * sd_of_mean);
  }
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) CHECK(std::isfinite(log_gamma_variate(rng, 1e-3)));
  CHECK_THROWS_AS(gamma_variate(rng, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gamma_variate(rng, -1.0), InvalidArgument);
}

TEST_CASE("dirichlet draws") {
  Rng rng(7);
  const std::vector<double> one{2.5};
  CHECK(dirichlet(rng, one) == std::vector<double>{1.0});

  const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
  for (int n = 0; n < 1000; ++n) {
    const auto w = dirichlet(rng, flat);
    double total = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  const std::vector<double> tiny{1e-3, 1e-3, 1e-3};
  for (int n = 0; n < 100; ++n) {
    const auto w = dirichlet(rng, tiny);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS(dirichlet(rng, std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(dirichlet(rng, std::vector<double>{1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(dirichlet(rng, std::vector<double>{1.0, -2.0}), InvalidArgument);
}

TEST_CASE("dirichlet concentrates for large alpha") {
  const std::vector<double> alpha(8, 1000.0);
  int outside = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    for (double w : sda::sample_dirichlet(alpha, seed, sda::ScaleMode::kRaw).weights) {
      if (std::abs(w - 0.125) > 0.05) ++outside;
    }
  }
  CHECK(outside == 0);
}

TEST_CASE("dirichlet golden draw, alpha (1,1,1), seed 42") {
  std::ifstream in(FREQADAPT_GOLDEN_DIR "/dirichlet_111_seed42.txt");
  REQUIRE(in);
  std::vector<double> expected;
  for (double v; in >> v;) expected.push_back(v);
  REQUIRE(expected.size() == 3);
  const std::vector<double> alpha{1.0, 1.0, 1.0};
  const auto w = sda::sample_dirichlet(alpha, 42, sda::ScaleMode::kRaw).weights;
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(w[i] - expected[i]) <= 1e-12);
}

TEST_CASE("channel statistics") {
  const FeatureMap x(2, 2, 2, {1.0, 2.0, 3.0, 4.0, 7.0, 7.0, 7.0, 7.0});
  const auto s = sda::channel_stats(x);
  CHECK(s.mu_base[0] == 2.5);
  CHECK(s.sigma_base[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
  CHECK(s.sigma_base[0] == doctest::Approx(1.118034).epsilon(1e-6));
  CHECK(s.mu_base[1] == 7.0);
  CHECK(s.sigma_base[1] == 0.0);

  Rng rng(8);
  const FeatureMap r = random_map(rng, 3, 8, 8, -5.0, 9.0);
  const auto got = sda::channel_stats(r);
  const auto ref = oracle::channel_stats_extended(r);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(std::abs(got.mu_base[c] - ref.mu_base[c]) < 1e-12);
    CHECK(std::abs(got.sigma_base[c] - ref.sigma_base[c]) < 1e-12);
  }
}

TEST_CASE("sample_dirichlet") {
  const std::vector<double> single{0.7};
  for (std::uint64_t seed : {0, 1, 99}) {
    CHECK(sda::sample_dirichlet(single, seed, sda::ScaleMode::kRaw).weights ==
          std::vector<double>{1.0});
  }
  const std::vector<double> alpha{1.0, 2.0, 3.0};
  const auto w = sda::sample_dirichlet(alpha, 5);
  CHECK(w.scale_mode == sda::ScaleMode::kTimesC);
  const auto eff = w.effective();
  for (std::size_t i = 0; i < 3; ++i) CHECK(eff[i] == 3.0 * w.weights[i]);
  const auto raw = sda::sample_dirichlet(alpha, 5, sda::ScaleMode::kRaw);
  CHECK(raw.effective() == raw.weights);
  CHECK(raw.weights == w.weights);
}

TEST_CASE("style_fuse") {
  Rng rng(9);
  AmpPhase ap(2, 3, 3);
  for (double& a : ap.amplitude) a = rng.uniform(0.0, 4.0);
  for (double& p : ap.phase) p = rng.uniform(-3.0, 3.0);

  SUBCASE("identity affine leaves amplitude exactly unchanged") {
    sda::StyleStats stats{{0.0, 0.0}, {1.0, 0.5}};
    sda::StyleWeights w{{1.0, 1.0}, {1.0, 2.0}, sda::ScaleMode::kRaw};
    const AmpPhase out = sda::style_fuse(ap, stats, w);
    CHECK(bitwise_equal(out.amplitude, ap.amplitude));
    CHECK(bitwise_equal(out.phase, ap.phase));
  }
  SUBCASE("zero weights collapse the amplitude, phase untouched") {
    sda::StyleStats stats{{0.3, -1.0}, {2.0, 0.5}};
    sda::StyleWeights w{{1.0, 1.0}, {0.0, 0.0}, sda::ScaleMode::kRaw};
    const AmpPhase out = sda::style_fuse(ap, stats, w);
    for (double a : out.amplitude) CHECK(a == 0.0);
    CHECK(bitwise_equal(out.phase, ap.phase));
  }
  SUBCASE("per-bin affine map matches a scalar loop") {
    sda::StyleStats stats{{0.3, -1.0}, {2.0, 0.5}};
    const std::vector<double> alpha{1.0, 1.0};
    const auto w = sda::sample_dirichlet(alpha, 3);
    const auto style = sda::fuse_coefficients(stats, w);
    const AmpPhase out = sda::style_fuse(ap, stats, w);
    const auto eff = w.effective();
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(style.mu[c] == eff[c] * stats.mu_base[c]);
      CHECK(style.sigma[c] == eff[c] * stats.sigma_base[c]);
      for (std::size_t j = 0; j < 9; ++j) {
        const double a = ap.amplitude[c * 9 + j];
        CHECK(std::abs(out.amplitude[c * 9 + j] -
                       (eff[c] * stats.sigma_base[c] * a + eff[c] * stats.mu_base[c])) <
              1e-12);
      }
    }
  }
  SUBCASE("coefficient count must match") {
    CHECK_THROWS_AS(sda::style_fuse(ap, sda::AffineStyle::identity(3)), ShapeError);
  }
}

TEST_CASE("sda_apply: identity hook reproduces the input") {
  Rng rng(10);
  for (int n = 0; n < 20; ++n) {
    const FeatureMap x = random_map(rng, 1 + n % 4, 2 + n % 7, 3 + n % 5);
    CHECK(max_abs_diff(sda::sda_apply(x, sda::AffineStyle::identity(x.channels())), x) <
          1e-9);
  }
}

TEST_CASE("sda_forward: constant input") {
  // sigma_base is 0, so every bin's amplitude becomes mu with phase 0 and the
  // inverse is an impulse of height mu at the origin.
  const FeatureMap x(2, 4, 4, std::vector<double>(32, 3.0));
  const std::vector<double> alpha{1.0, 1.0};
  const FeatureMap y = sda::sda_forward(x, alpha, 17);
  const auto eff = sda::sample_dirichlet(alpha, 17).effective();
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(y(c, 0, 0) == doctest::Approx(3.0 * eff[c]).epsilon(1e-12));
    for (std::size_t j = 1; j < 16; ++j) CHECK(std::abs(y.channel(c)[j]) < 1e-12);
  }
}

TEST_CASE("sda_forward matches the direct-DFT pipeline") {
  Rng rng(11);
  const FeatureMap x = random_map(rng, 4, 8, 8);
  const std::vector<double> alpha{1.0, 1.0, 1.0, 1.0};
  const std::uint64_t seed = 1234;
  const auto w = sda::sample_dirichlet(alpha, seed);
  const auto style = sda::fuse_coefficients(oracle::channel_stats_extended(x), w);
  CHECK(max_abs_diff(sda::sda_forward(x, alpha, seed), oracle::sda_direct(x, style)) <
        1e-9);
}

TEST_CASE("sda_forward preserves phase, shape and determinism") {
  Rng rng(12);
  for (int n = 0; n < 100; ++n) {
    const std::size_t c = 1 + n % 3;
    const FeatureMap x = random_map(rng, c, 3 + n % 6, 2 + n % 9);
    const std::vector<double> alpha(c, rng.uniform(0.3, 4.0));
    const FeatureMap y = sda::sda_forward(x, alpha, n);
    CHECK(y.same_shape(x));
    CHECK(y == sda::sda_forward(x, alpha, n));
    const Spectrum sx = fft2(x);
    const Spectrum sy = fft2(y);
    for (std::size_t i = 0; i < sx.size(); ++i) {
      if (std::hypot(sx.real[i], sx.imag[i]) <= 1e-6) continue;
      const double dev = std::remainder(std::atan2(sy.imag[i], sy.real[i]) -
                                            std::atan2(sx.imag[i], sx.real[i]),
                                        std::numbers::pi);
      CHECK(std::abs(dev) <= 1e-6);
    }
  }
}

TEST_CASE("sda_forward argument checks") {
  const FeatureMap x(2, 3, 3);
  CHECK_THROWS_AS(sda::sda_forward(x, std::vector<double>{1.0}, 0), ShapeError);
  CHECK_THROWS_AS(sda::sda_forward(x, std::vector<double>{1.0, 0.0}, 0),
                  InvalidArgument);
}
