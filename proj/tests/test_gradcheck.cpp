#include <doctest.h>

#include <cmath>

#include "freqadapt/cca.hpp"
#include "freqadapt/error.hpp"
#include "freqadapt/gradcheck.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/sda.hpp"
#include "support.hpp"

using namespace freqadapt;
using namespace freqadapt::grad;
using testing::random_map;
using testing::random_matrix;

namespace {

double total(const FeatureMap& m) {
  double s = 0.0;
  for (double v : m.data()) s += v;
  return s;
}

FeatureMap basis(const FeatureMap& like, std::size_t i) {
  FeatureMap e(like.channels(), like.height(), like.width());
  e.data()[i] = 1.0;
  return e;
}

FeatureMap as_map(const Matrix& m) {
  return FeatureMap(1, m.rows(), m.cols(),
                    std::vector<double>(m.data().begin(), m.data().end()));
}

}  // namespace

TEST_CASE("fd_directional: quadratic and constant functions") {
  Rng rng(51);
  const FeatureMap x = random_map(rng, 2, 3, 3);
  const ScalarFn sq = [](const FeatureMap& m) { return inner(m, m); };
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fd = fd_directional(sq, x, basis(x, i), 1e-4);
    CHECK(std::abs(fd - 2.0 * x.data()[i]) < 1e-8);
  }
  const ScalarFn constant = [](const FeatureMap&) { return 3.5; };
  CHECK(std::abs(fd_directional(constant, x, random_map(rng, 2, 3, 3), 1e-5)) <= 1e-12);
}

TEST_CASE("fd_directional argument checks") {
  const FeatureMap x(1, 2, 2, {1, 2, 3, 4});
  const ScalarFn f = [](const FeatureMap& m) { return total(m); };
  CHECK_THROWS_AS(fd_directional(f, x, FeatureMap(1, 2, 2), 1e-5), InvalidArgument);
  CHECK_THROWS_AS(fd_directional(f, x, x, 0.0), InvalidArgument);
  CHECK_THROWS_AS(fd_directional(f, x, x, -1e-5), InvalidArgument);
  CHECK_THROWS_AS(fd_directional(f, x, FeatureMap(1, 2, 3), 1e-5), ShapeError);
}

TEST_CASE("relative_error") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK(relative_error(0.0, 1e-12) == doctest::Approx(1e-4));
}

TEST_CASE("jvp_silu against finite differences") {
  Rng rng(52);
  const FeatureMap x = random_map(rng, 2, 4, 5, -4.0, 4.0);
  const FeatureMap d = random_map(rng, 2, 4, 5);
  const FeatureMap g = random_map(rng, 2, 4, 5);
  const double analytic = inner(g, jvp_silu(x, d));
  const ScalarFn f = [&](const FeatureMap& m) { return inner(g, silu(m)); };
  CHECK(relative_error(analytic, fd_directional(f, x, d, 1e-5)) < 1e-7);
}

TEST_CASE("jvp_sda against finite differences at step 1e-5") {
  Rng rng(53);
  const FeatureMap x = random_map(rng, 3, 6, 5);
  const FeatureMap d = random_map(rng, 3, 6, 5);
  const std::vector<double> alpha{1.0, 1.0, 1.0};
  const auto style = sda::fuse_coefficients(sda::channel_stats(x),
                                            sda::sample_dirichlet(alpha, 8));
  const ScalarFn f = [&](const FeatureMap& m) { return total(sda::sda_apply(m, style)); };
  CHECK(relative_error(total(jvp_sda(x, d, style)), fd_directional(f, x, d, 1e-5)) < 1e-5);
}

TEST_CASE("JVP of the linear transform pair is the direction itself") {
  // With the identity affine the SDA map is ifft2(fft2(x)) up to the epsilon
  // floor, so its derivative returns the direction.
  Rng rng(54);
  const FeatureMap x = random_map(rng, 2, 5, 6);
  const FeatureMap d = random_map(rng, 2, 5, 6);
  const FeatureMap j = jvp_sda(x, d, sda::AffineStyle::identity(2));
  CHECK(max_abs_diff(j, d) < 1e-12);
}

TEST_CASE("jvp_amp_normalize on an already normalized amplitude") {
  AmpPhase ap(1, 2, 2);
  ap.amplitude = {-1.3416407864998738, -0.4472135954999579, 0.4472135954999579,
                  1.3416407864998738};
  ap.phase = {0.0, 0.0, 0.0, 0.0};
  AmpPhase dir = ap;
  dir.phase = {0.0, 0.0, 0.0, 0.0};
  const AmpPhase j = jvp_amp_normalize(ap, dir);
  // Along the normalized vector itself the projection removes everything.
  for (double v : j.amplitude) CHECK(std::abs(v) < 1e-12);

  AmpPhase other = ap;
  other.amplitude = {0.3, -0.1, 0.7, 0.2};
  const AmpPhase jo = jvp_amp_normalize(ap, other);
  const double h = 1e-6;
  AmpPhase plus = ap, minus = ap;
  for (std::size_t i = 0; i < 4; ++i) {
    plus.amplitude[i] += h * other.amplitude[i];
    minus.amplitude[i] -= h * other.amplitude[i];
  }
  const AmpPhase np = cca::amp_normalize(plus);
  const AmpPhase nm = cca::amp_normalize(minus);
  for (std::size_t i = 0; i < 4; ++i) {
    const double fd = (np.amplitude[i] - nm.amplitude[i]) / (2 * h);
    CHECK(relative_error(jo.amplitude[i], fd) < 1e-6);
  }
}

TEST_CASE("jvp_cross_attention with one text token is zero") {
  Rng rng(55);
  const Matrix xv = random_matrix(rng, 5, 3);
  const Matrix dir = random_matrix(rng, 5, 3);
  const Matrix xt = random_matrix(rng, 1, 4);
  const auto p = cca::AttentionParams::random(3, 4, 6, 2);
  const Matrix j = jvp_cross_attention(xv, dir, xt, p);
  for (double v : j.data()) CHECK(v == 0.0);
}

TEST_CASE("jvp_cross_attention and jvp_cca against finite differences") {
  Rng rng(56);
  const Matrix xv = random_matrix(rng, 6, 3);
  const Matrix dir = random_matrix(rng, 6, 3);
  Matrix xt = random_matrix(rng, 4, 5);
  for (double& v : xt.data()) v *= 3.0;
  const auto p = cca::AttentionParams::random(3, 5, 4, 3);
  const Matrix g = random_matrix(rng, 6, 3);
  const FeatureMap gm = as_map(g);
  const ScalarFn f = [&](const FeatureMap& m) {
    const Matrix tokens(m.height(), m.width(),
                        std::vector<double>(m.data().begin(), m.data().end()));
    return inner(gm, as_map(cca::cross_attention(tokens, xt, p)));
  };
  const double analytic = inner(gm, as_map(jvp_cross_attention(xv, dir, xt, p)));
  CHECK(relative_error(analytic, fd_directional(f, as_map(xv), as_map(dir), 1e-5)) < 1e-6);

  const FeatureMap x = random_map(rng, 3, 6, 6, -1.5, 1.5);
  const FeatureMap d = random_map(rng, 3, 6, 6);
  const FeatureMap gx = random_map(rng, 3, 6, 6);
  const ScalarFn fc = [&](const FeatureMap& m) {
    return inner(gx, cca::cca_forward(m, xt, p));
  };
  CHECK(relative_error(inner(gx, jvp_cca(x, d, xt, p)), fd_directional(fc, x, d, 1e-5)) <
        1e-5);
}

TEST_CASE("JVPs are linear in the direction") {
  Rng rng(57);
  const FeatureMap x = random_map(rng, 2, 5, 4);
  const FeatureMap d1 = random_map(rng, 2, 5, 4);
  const FeatureMap d2 = random_map(rng, 2, 5, 4);
  const double a = 0.7, b = -1.3;
  const FeatureMap mix = a * d1 + b * d2;
  auto check = [&](const auto& jvp) {
    const FeatureMap lhs = jvp(mix);
    const FeatureMap rhs = a * jvp(d1) + b * jvp(d2);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-10);
  };
  check([&](const FeatureMap& d) { return jvp_silu(x, d); });
  const std::vector<double> alpha{1.0, 2.0};
  const auto style = sda::fuse_coefficients(sda::channel_stats(x),
                                            sda::sample_dirichlet(alpha, 4));
  check([&](const FeatureMap& d) { return jvp_sda(x, d, style); });
  const Matrix xt = random_matrix(rng, 3, 4);
  const auto p = cca::AttentionParams::random(2, 4, 5, 6);
  check([&](const FeatureMap& d) { return jvp_cca(x, d, xt, p); });
  check([&](const FeatureMap& d) {
    return jvp_cca(x, d, xt, p, cca::NormMode::kWholeTensor);
  });
}

TEST_CASE("target names") {
  for (Target t : all_targets()) CHECK(parse_target(target_name(t)) == t);
  CHECK(parse_target("sda") == Target::kSda);
  CHECK(parse_target("cca") == Target::kCca);
  CHECK_FALSE(parse_target("relu").has_value());
  CHECK(all_targets().size() == 5);
}

TEST_CASE("run_gradcheck suites") {
  const Target silu_only[] = {Target::kSilu};
  for (std::uint64_t seed : {0, 1, 2, 3}) {
    const auto r = run_gradcheck(silu_only, seed, 20);
    REQUIRE(r.size() == 1);
    CHECK(r[0].op_name == "silu");
    CHECK(r[0].max_rel_err < 1e-7);
  }
  const Target sda_only[] = {Target::kSda};
  CHECK(run_gradcheck(sda_only, 0, 50)[0].max_rel_err < 1e-5);
  const Target cca_only[] = {Target::kCca};
  CHECK(run_gradcheck(cca_only, 0, 50)[0].max_rel_err < 1e-5);

  const auto all = all_targets();
  const auto reports = run_gradcheck(all, 7, 50);
  REQUIRE(reports.size() == 5);
  for (const auto& r : reports) {
    CAPTURE(r.op_name);
    CHECK(r.num_probes == 50);
    CHECK(r.max_rel_err < 1e-5);
    CHECK(r.convergence_fraction >= 0.9);
    CHECK((r.step == 1e-4 || r.step == 1e-5 || r.step == 1e-6));
  }
  CHECK(run_gradcheck(all, 7, 50)[4].max_rel_err == reports[4].max_rel_err);
  CHECK_THROWS_AS(run_gradcheck(all, 0, 0), InvalidArgument);
}
