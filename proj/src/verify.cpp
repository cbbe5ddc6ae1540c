#include "freqadapt/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "freqadapt/adapter.hpp"
#include "freqadapt/cca.hpp"
#include "freqadapt/error.hpp"
#include "freqadapt/gradcheck.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/oracle.hpp"
#include "freqadapt/random.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/synth.hpp"

namespace freqadapt::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.next_u64() % (hi - lo + 1));
}

FeatureMap random_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
  FeatureMap x(c, h, w);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  return x;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool bitwise_equal(const FeatureMap& a, const FeatureMap& b) {
  return a.same_shape(b) && bitwise_equal(a.data(), b.data());
}

bool plain_forward_matches(const FeatureMap& x, const adapter::AdapterWeights& w,
                           adapter::ResidualOrder order) {
  const adapter::Augment pass = [](const FeatureMap& m) { return m; };
  return adapter::plain_forward(x, w, pass, order) == x;
}

}  // namespace

std::vector<CheckResult> check_spectral(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const auto start = Clock::now();
  Rng rng(mix_seed(seed, 101));

  double worst = 0.0;
  for (std::size_t c : {1, 3}) {
    for (std::size_t h : {2, 3, 4, 5, 8}) {
      for (std::size_t w : {2, 3, 4, 5, 8}) {
        const FeatureMap x = random_map(rng, c, h, w);
        const Spectrum fast = fft2(x);
        const Spectrum ref = dft2_oracle(x);
        for (std::size_t i = 0; i < fast.size(); ++i) {
          worst = std::max(worst, std::abs(fast.real[i] - ref.real[i]));
          worst = std::max(worst, std::abs(fast.imag[i] - ref.imag[i]));
        }
      }
    }
  }
  const double t_oracle = seconds_since(start);
  out.push_back({1, "fft2 vs direct DFT", worst <= 1e-10,
                 fmt("max abs diff %.3g (tol 1e-10) over 50 shapes", worst),
                 t_oracle});

  const auto start_parseval = Clock::now();
  double worst_rel = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const FeatureMap x =
        random_map(rng, pick(rng, 1, 3), pick(rng, 2, 16), pick(rng, 2, 16));
    long double spatial = 0.0L;
    for (double v : x.data()) spatial += static_cast<long double>(v) * v;
    const Spectrum s = fft2(x);
    long double spectral = 0.0L;
    for (std::size_t i = 0; i < s.size(); ++i) {
      spectral += static_cast<long double>(s.real[i]) * s.real[i] +
                  static_cast<long double>(s.imag[i]) * s.imag[i];
    }
    spatial *= static_cast<long double>(x.plane_size());
    const double rel = static_cast<double>(std::abs(spectral - spatial) / spatial);
    worst_rel = std::max(worst_rel, rel);
  }
  const double t_parseval = seconds_since(start_parseval);
  out.push_back({1, "Parseval identity", worst_rel <= 1e-8,
                 fmt("max rel err %.3g (tol 1e-8) over 1000 maps", worst_rel),
                 t_parseval});

  const double total = seconds_since(start);
  out.push_back({1, "spectral runtime", total < 30.0,
                 fmt("%.2f s (limit 30 s)", total), total});
  return out;
}

std::vector<CheckResult> check_sda(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const auto start = Clock::now();
  Rng rng(mix_seed(seed, 102));

  double worst_phase = 0.0;
  double worst_identity = 0.0;
  std::size_t bins = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t c = pick(rng, 1, 4);
    const FeatureMap x = random_map(rng, c, pick(rng, 2, 10), pick(rng, 2, 10));
    std::vector<double> alpha(c);
    for (double& a : alpha) a = rng.uniform(0.2, 3.0);
    const std::uint64_t draw_seed = rng.next_u64();

    const FeatureMap y = sda::sda_forward(x, alpha, draw_seed);
    const Spectrum sx = fft2(x);
    const Spectrum sy = fft2(y);
    for (std::size_t i = 0; i < sx.size(); ++i) {
      const double ax = std::hypot(sx.real[i], sx.imag[i]);
      if (ax <= 1e-6) continue;
      const double dev = std::remainder(std::atan2(sy.imag[i], sy.real[i]) -
                                            std::atan2(sx.imag[i], sx.real[i]),
                                        std::numbers::pi);
      worst_phase = std::max(worst_phase, std::abs(dev));
      ++bins;
    }

    const FeatureMap id = sda::sda_apply(x, sda::AffineStyle::identity(c));
    worst_identity = std::max(worst_identity, max_abs_diff(id, x));
  }
  const double total = seconds_since(start);
  out.push_back({2, "SDA phase preservation", worst_phase <= 1e-6,
                 fmt("max deviation %.3g rad mod pi (tol 1e-6) over %zu bins",
                     worst_phase, bins),
                 total});
  out.push_back({2, "SDA identity hook", worst_identity <= 1e-9,
                 fmt("max abs diff %.3g (tol 1e-9) over 1000 maps",
                     worst_identity),
                 0.0});
  out.push_back({2, "SDA runtime", total < 60.0,
                 fmt("%.2f s (limit 60 s)", total), total});
  return out;
}

std::vector<CheckResult> check_cca_normalization(std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed, 103));
  double worst_mean = 0.0;
  double worst_std = 0.0;
  bool phase_identical = true;
  for (int n = 0; n < 1000; ++n) {
    AmpPhase ap(pick(rng, 1, 4), pick(rng, 2, 12), pick(rng, 2, 12));
    for (double& a : ap.amplitude) a = rng.uniform(0.0, 3.0);
    for (double& p : ap.phase) p = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const AmpPhase z = cca::amp_normalize(ap);
    const std::size_t plane = z.plane_size();
    for (std::size_t c = 0; c < z.channels; ++c) {
      long double sum = 0.0L;
      for (std::size_t j = 0; j < plane; ++j) sum += z.amplitude[c * plane + j];
      const long double mean = sum / plane;
      long double sq = 0.0L;
      for (std::size_t j = 0; j < plane; ++j) {
        const long double d = z.amplitude[c * plane + j] - mean;
        sq += d * d;
      }
      worst_mean = std::max(worst_mean, static_cast<double>(std::abs(mean)));
      worst_std = std::max(
          worst_std, static_cast<double>(std::abs(std::sqrt(sq / plane) - 1.0L)));
    }
    phase_identical = phase_identical && bitwise_equal(z.phase, ap.phase);
  }
  const bool ok = worst_mean <= 1e-10 && worst_std <= 1e-10 && phase_identical;
  return {{3, "CCA amplitude normalization", ok,
           fmt("max |mean| %.3g, max |std-1| %.3g (tol 1e-10), phase %s",
               worst_mean, worst_std,
               phase_identical ? "bit-identical" : "CHANGED"),
           seconds_since(start)}};
}

std::vector<CheckResult> check_hf_emphasis(std::uint64_t seed) {
  const auto start = Clock::now();
  constexpr std::size_t kCases = 100;
  constexpr std::size_t kChannels = 4;
  constexpr std::size_t kSide = 16;
  constexpr std::size_t kTextTokens = 5;
  constexpr std::size_t kTextDim = 16;
  constexpr double kCut = 0.25;

  std::size_t positive = 0;
  std::size_t dc_down = 0;
  double shift_sum = 0.0;
  for (std::size_t n = 0; n < kCases; ++n) {
    const std::uint64_t s = mix_seed(mix_seed(seed, 104), n);
    const FeatureMap before = synth::gen_features(synth::FeatureKind::kSmooth,
                                                  kChannels, kSide, kSide, s);
    const auto params = cca::AttentionParams::random(
        kChannels, kTextDim, cca::kDefaultKeyDim, mix_seed(s, 1));
    const TokenMatrix text =
        adapter::random_text_tokens(kTextTokens, kTextDim, mix_seed(s, 2));
    const FeatureMap after = cca::cca_forward(before, text, params);

    const double shift = cca::hf_shift(before, after, kCut);
    shift_sum += shift;
    if (shift > 0.0) ++positive;

    const AmpPhase ap_before = decompose(fft2(before));
    const AmpPhase ap_after = decompose(fft2(after));
    bool all_down = true;
    for (std::size_t c = 0; c < kChannels; ++c) {
      all_down = all_down &&
                 cca::dc_share(ap_after, c) < cca::dc_share(ap_before, c);
    }
    if (all_down) ++dc_down;
  }
  const double t = seconds_since(start);
  return {
      {4, "high-band shift after CCA", positive >= 95,
       fmt("%zu/100 positive (need 95), mean shift %.4f", positive,
           shift_sum / kCases),
       t},
      {4, "DC share decrease after CCA", dc_down == kCases,
       fmt("%zu/100 cases with every channel decreasing (need 100)", dc_down),
       0.0},
  };
}

std::vector<CheckResult> check_attention(std::uint64_t seed) {
  const auto start = Clock::now();
  Rng rng(mix_seed(seed, 105));
  double worst = 0.0;
  for (int n = 0; n < 500; ++n) {
    const std::size_t dv = pick(rng, 1, 6);
    const std::size_t dt = pick(rng, 1, 6);
    const std::size_t dk = pick(rng, 1, 8);
    const Matrix xv = random_matrix(rng, pick(rng, 1, 12), dv);
    const Matrix xt = random_matrix(rng, pick(rng, 1, 6), dt);
    const auto p =
        cca::AttentionParams::random(dv, dt, dk, rng.next_u64(), n % 2 == 1);
    worst = std::max(worst, max_abs_diff(cca::cross_attention(xv, xt, p),
                                         oracle::attention_dense(xv, xt, p)));
  }
  const double t_dense = seconds_since(start);

  // One text token: every softmax row is exactly [1], so each output row is
  // the single value token pushed through the output projection.
  const auto start_single = Clock::now();
  bool exact = true;
  for (int n = 0; n < 100; ++n) {
    const std::size_t dv = pick(rng, 1, 6);
    const std::size_t dt = pick(rng, 1, 6);
    const Matrix xv = random_matrix(rng, pick(rng, 1, 12), dv);
    const Matrix xt = random_matrix(rng, 1, dt);
    const auto p = cca::AttentionParams::random(dv, dt, pick(rng, 1, 8),
                                                rng.next_u64());
    const Matrix row = matmul(matmul(xt, p.wv), p.wo);
    const Matrix got = cca::cross_attention(xv, xt, p);
    for (std::size_t i = 0; i < got.rows(); ++i) {
      exact = exact && bitwise_equal(got.row(i), row.row(0));
    }
  }
  return {
      {5, "attention vs extended-precision oracle", worst <= 1e-12,
       fmt("max abs diff %.3g (tol 1e-12) over 500 instances", worst), t_dense},
      {5, "attention with one text token", exact,
       exact ? "exact over 100 instances" : "output differs from the value row",
       seconds_since(start_single)},
  };
}

std::vector<CheckResult> check_gradients(std::uint64_t seed, std::size_t probes) {
  const auto start = Clock::now();
  const auto targets = grad::all_targets();
  const auto reports = grad::run_gradcheck(targets, seed, probes);
  const double total = seconds_since(start);
  std::vector<CheckResult> out;
  for (const auto& r : reports) {
    const bool ok = r.max_rel_err < 1e-5 && r.convergence_fraction >= 0.9;
    out.push_back({6, "gradient " + r.op_name, ok,
                   fmt("max rel err %.3g (tol 1e-5) at h=%g, converging %.0f%% "
                       "of %zu probes (need 90%%)",
                       r.max_rel_err, r.step, 100.0 * r.convergence_fraction,
                       r.num_probes),
                   0.0});
  }
  out.push_back({6, "gradient runtime", total < 180.0,
                 fmt("%.2f s (limit 180 s)", total), total});
  return out;
}

std::vector<CheckResult> check_adapter(std::uint64_t seed) {
  const auto start = Clock::now();
  std::vector<CheckResult> out;
  Rng rng(mix_seed(seed, 106));

  bool identity = true;
  for (int n = 0; n < 20; ++n) {
    const std::size_t c = pick(rng, 1, 4);
    const FeatureMap x = random_map(rng, c, pick(rng, 1, 9), pick(rng, 1, 9));
    identity = identity &&
               plain_forward_matches(x, adapter::AdapterWeights::zero_branch(c),
                                     adapter::ResidualOrder::kBeforeProjection);
    adapter::AdapterWeights zero = adapter::AdapterWeights::zero_branch(c);
    zero.proj = ConvKernel(c, c, 1);
    identity = identity &&
               plain_forward_matches(x, zero,
                                     adapter::ResidualOrder::kAfterProjection);
  }
  out.push_back({7, "zero-weight adapter is the identity", identity,
                 identity ? "bitwise over 20 maps, both residual orders"
                          : "output differs from input",
                 seconds_since(start)});

  const auto start_stack = Clock::now();
  std::vector<FeatureMap> stages;
  for (std::size_t s = 0; s < 3; ++s) {
    stages.push_back(synth::gen_features(synth::FeatureKind::kSmooth, 4, 12, 12,
                                         mix_seed(seed, 200 + s)));
  }
  auto cfg = adapter::PlacementConfig::default_placement();
  cfg.seed = seed;
  const auto first = adapter::run_stack(stages, cfg);
  const auto second = adapter::run_stack(stages, cfg);
  const bool untouched = bitwise_equal(first[1], stages[1]);
  const bool changed = !bitwise_equal(first[0], stages[0]) &&
                       !bitwise_equal(first[2], stages[2]);
  out.push_back({7, "default placement leaves stage 2 untouched",
                 untouched && changed,
                 untouched ? (changed ? "stage 2 bitwise equal, stages 1 and 3 "
                                        "transformed"
                                      : "stage 1 or 3 was not transformed")
                           : "stage 2 modified",
                 seconds_since(start_stack)});

  bool deterministic = true;
  for (std::size_t s = 0; s < 3; ++s) {
    deterministic = deterministic && bitwise_equal(first[s], second[s]);
  }
  // A stage's result must not depend on which other stages are configured.
  auto only_third = cfg;
  only_third.stage_assignments = {{3, adapter::StageKind::kCca}};
  const auto alone = adapter::run_stack(stages, only_third);
  deterministic = deterministic && bitwise_equal(alone[2], first[2]);
  out.push_back({7, "stack determinism", deterministic,
                 deterministic ? "repeat runs and reduced placement bitwise equal"
                               : "results differ between runs",
                 0.0});
  return out;
}

bool is_suite(std::string_view name) {
  return name == "spectral" || name == "sda" || name == "cca" ||
         name == "grad" || name == "adapter" || name == "all";
}

std::vector<CheckResult> run_suite(std::string_view suite, std::uint64_t seed,
                                   std::size_t probes) {
  if (!is_suite(suite)) {
    throw InvalidArgument("unknown verify suite '" + std::string(suite) +
                          "' (spectral, sda, cca, grad, adapter, all)");
  }
  std::vector<CheckResult> out;
  auto add = [&out](std::vector<CheckResult> part) {
    out.insert(out.end(), part.begin(), part.end());
  };
  const bool all = suite == "all";
  if (all || suite == "spectral") add(check_spectral(seed));
  if (all || suite == "sda") add(check_sda(seed));
  if (all || suite == "cca") {
    add(check_cca_normalization(seed));
    add(check_hf_emphasis(seed));
    add(check_attention(seed));
  }
  if (all || suite == "grad") add(check_gradients(seed, probes));
  if (all || suite == "adapter") add(check_adapter(seed));
  return out;
}

std::string format_result(const CheckResult& r) {
  return fmt("%s  [%d] %s: %s  (%.2f s)", r.passed ? "PASS" : "FAIL",
             r.criterion, r.name.c_str(), r.detail.c_str(), r.seconds);
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed; });
}

}  // namespace freqadapt::verify
