#include "freqadapt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "freqadapt/error.hpp"
#include "freqadapt/ops.hpp"
#include "freqadapt/random.hpp"

namespace freqadapt::grad {

using cd = std::complex<double>;

double fd_directional(const ScalarFn& f, const FeatureMap& x,
                      const FeatureMap& dir, double step) {
  if (!(step > 0.0)) throw InvalidArgument("fd_directional: step must be > 0");
  if (!x.same_shape(dir)) throw ShapeError("fd_directional: direction shape");
  const bool nonzero = std::any_of(dir.data().begin(), dir.data().end(),
                                   [](double v) { return v != 0.0; });
  if (!nonzero) throw InvalidArgument("fd_directional: zero direction");
  const FeatureMap plus = x + step * dir;
  const FeatureMap minus = x - step * dir;
  return (f(plus) - f(minus)) / (2.0 * step);
}

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

FeatureMap jvp_silu(const FeatureMap& x, const FeatureMap& dir) {
  if (!x.same_shape(dir)) throw ShapeError("jvp_silu: direction shape");
  FeatureMap out = dir;
  auto xs = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= silu_derivative(xs[i]);
  return out;
}

namespace {

// Polar pieces of one spectrum bin: modulus r, regularized amplitude a and
// unit direction u = z / r.
struct Polar {
  double r;
  double a;
  cd u;
};

Polar polar(const Spectrum& s, std::size_t i) {
  const cd z(s.real[i], s.imag[i]);
  const double r = std::abs(z);
  const double a = std::sqrt(s.real[i] * s.real[i] + s.imag[i] * s.imag[i] +
                             kAmplitudeEps);
  return {r, a, r > 0.0 ? z / r : cd(1.0, 0.0)};
}

// d(amplitude) and d(unit direction) of bin i along dz.
void polar_derivative(const Polar& pz, cd dz, double& da, cd& du) {
  const cd proj = std::conj(pz.u) * dz;
  da = pz.r / pz.a * proj.real();
  du = pz.r > 0.0 ? cd(0.0, 1.0) * pz.u * (proj.imag() / pz.r) : cd(0.0, 0.0);
}

FeatureMap real_inverse(Spectrum s) {
  Spectrum full = ifft2_complex(s);
  return FeatureMap(s.channels, s.height, s.width, std::move(full.real));
}

FeatureMap as_map(const Matrix& m) {
  return FeatureMap(1, m.rows(), m.cols(),
                    std::vector<double>(m.data().begin(), m.data().end()));
}

Matrix as_matrix(const FeatureMap& x) {
  return Matrix(x.height(), x.width(),
                std::vector<double>(x.data().begin(), x.data().end()));
}

FeatureMap amplitude_map(const AmpPhase& ap) {
  return FeatureMap(ap.channels, ap.height, ap.width, ap.amplitude);
}

}  // namespace

FeatureMap jvp_sda(const FeatureMap& x, const FeatureMap& dir,
                   const sda::AffineStyle& style) {
  if (!x.same_shape(dir)) throw ShapeError("jvp_sda: direction shape");
  if (style.channels() != x.channels()) {
    throw ShapeError("jvp_sda: style coefficient count");
  }
  const Spectrum z = fft2(x);
  const Spectrum dz = fft2(dir);
  Spectrum out(z.channels, z.height, z.width);
  const std::size_t plane = z.plane_size();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const std::size_t c = i / plane;
    const Polar pz = polar(z, i);
    double da = 0.0;
    cd du;
    polar_derivative(pz, {dz.real[i], dz.imag[i]}, da, du);
    const double fused = style.sigma[c] * pz.a + style.mu[c];
    const cd dout = style.sigma[c] * da * pz.u + fused * du;
    out.real[i] = dout.real();
    out.imag[i] = dout.imag();
  }
  return real_inverse(std::move(out));
}

AmpPhase jvp_amp_normalize(const AmpPhase& ap, const AmpPhase& dir,
                           cca::NormMode mode) {
  if (ap.size() != dir.size()) {
    throw ShapeError("jvp_amp_normalize: direction shape");
  }
  AmpPhase out = dir;
  const std::size_t group =
      mode == cca::NormMode::kPerChannel ? ap.plane_size() : ap.size();
  const double n = static_cast<double>(group);
  for (std::size_t g = 0; g < ap.size() / group; ++g) {
    const double* a = ap.amplitude.data() + g * group;
    const double* da = dir.amplitude.data() + g * group;
    double mean = 0.0;
    for (std::size_t i = 0; i < group; ++i) mean += a[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < group; ++i) var += (a[i] - mean) * (a[i] - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 1e-12)) {
      throw DegenerateSpectrum("jvp_amp_normalize: degenerate amplitude group");
    }
    double mean_da = 0.0;
    double mean_nda = 0.0;
    for (std::size_t i = 0; i < group; ++i) {
      mean_da += da[i];
      mean_nda += (a[i] - mean) / sd * da[i];
    }
    mean_da /= n;
    mean_nda /= n;
    double* o = out.amplitude.data() + g * group;
    for (std::size_t i = 0; i < group; ++i) {
      const double normed = (a[i] - mean) / sd;
      o[i] = (da[i] - mean_da - normed * mean_nda) / sd;
    }
  }
  return out;
}

TokenMatrix jvp_cross_attention(const TokenMatrix& xv, const TokenMatrix& dir,
                                const TokenMatrix& xt,
                                const cca::AttentionParams& p) {
  if (xv.rows() != dir.rows() || xv.cols() != dir.cols()) {
    throw ShapeError("jvp_cross_attention: direction shape");
  }
  const cca::AttentionTrace tr = cca::cross_attention_trace(xv, xt, p);
  const Matrix dq = matmul(dir, p.wq);
  Matrix ds = matmul(dq, tr.key.transposed());
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(p.key_dim()));
  for (double& v : ds.data()) v *= inv_scale;
  // Softmax Jacobian row by row: dA = A * (dS - <A, dS>).
  Matrix dw(ds.rows(), ds.cols());
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    auto a = tr.weights.row(i);
    auto s = ds.row(i);
    double centre = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) centre += a[j] * s[j];
    for (std::size_t j = 0; j < s.size(); ++j) dw(i, j) = a[j] * (s[j] - centre);
  }
  return matmul(matmul(dw, tr.value), p.wo);
}

FeatureMap jvp_cca(const FeatureMap& x, const FeatureMap& dir,
                   const TokenMatrix& xt, const cca::AttentionParams& p,
                   cca::NormMode mode) {
  if (!x.same_shape(dir)) throw ShapeError("jvp_cca: direction shape");
  const TokenMatrix tokens = cca::flatten_tokens(x);
  const TokenMatrix enhanced = cca::cross_attention(tokens, xt, p);
  const TokenMatrix d_enhanced =
      jvp_cross_attention(tokens, cca::flatten_tokens(dir), xt, p);

  const Spectrum z =
      fft2(cca::unflatten_tokens(enhanced, x.height(), x.width()));
  const Spectrum dz =
      fft2(cca::unflatten_tokens(d_enhanced, x.height(), x.width()));

  AmpPhase ap(z.channels, z.height, z.width);
  AmpPhase dap(z.channels, z.height, z.width);
  std::vector<cd> units(z.size());
  std::vector<cd> dunits(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Polar pz = polar(z, i);
    ap.amplitude[i] = pz.a;
    units[i] = pz.u;
    polar_derivative(pz, {dz.real[i], dz.imag[i]}, dap.amplitude[i], dunits[i]);
  }
  const AmpPhase normed = cca::amp_normalize(ap, mode);
  const AmpPhase dnormed = jvp_amp_normalize(ap, dap, mode);

  Spectrum out(z.channels, z.height, z.width);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const cd dout = dnormed.amplitude[i] * units[i] + normed.amplitude[i] * dunits[i];
    out.real[i] = dout.real();
    out.imag[i] = dout.imag();
  }
  return real_inverse(std::move(out));
}

std::string_view target_name(Target t) {
  switch (t) {
    case Target::kSilu:
      return "silu";
    case Target::kAmpNormalize:
      return "amp_normalize";
    case Target::kCrossAttention:
      return "cross_attention";
    case Target::kSda:
      return "sda_forward";
    case Target::kCca:
      return "cca_forward";
  }
  return "unknown";
}

std::optional<Target> parse_target(std::string_view name) {
  if (name == "silu") return Target::kSilu;
  if (name == "amp_normalize") return Target::kAmpNormalize;
  if (name == "cross_attention") return Target::kCrossAttention;
  if (name == "sda" || name == "sda_forward") return Target::kSda;
  if (name == "cca" || name == "cca_forward") return Target::kCca;
  return std::nullopt;
}

std::vector<Target> all_targets() {
  return {Target::kSilu, Target::kAmpNormalize, Target::kCrossAttention,
          Target::kSda, Target::kCca};
}

namespace {

FeatureMap random_map(Rng& rng, std::size_t c, std::size_t h, std::size_t w,
                      double lo, double hi) {
  FeatureMap m(c, h, w);
  for (double& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

bool spectrum_clear_of_zero(const FeatureMap& x) {
  const Spectrum s = fft2(x);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::hypot(s.real[i], s.imag[i]) < 1e-4) return false;
  }
  return true;
}

// Directions are large enough that the O(h^2) truncation error at h = 1e-4
// stays well above round-off at h = 1e-5, so step convergence is observable.
// Text tokens span (-3, 3) for the same reason: softer attention has a third
// derivative too weak to rise above round-off.
constexpr double kDirectionScale = 3.0;

// One probe: a scalar functional, its analytic directional derivative, the
// probe point and the direction.
struct Probe {
  ScalarFn f;
  double analytic;
  FeatureMap x;
  FeatureMap dir;
};

Probe make_probe(Target target, Rng& rng) {
  switch (target) {
    case Target::kSilu: {
      FeatureMap x = random_map(rng, 2, 4, 5, -4.0, 4.0);
      FeatureMap d = random_map(rng, 2, 4, 5, -kDirectionScale, kDirectionScale);
      FeatureMap g = random_map(rng, 2, 4, 5, -1.0, 1.0);
      const double an = inner(g, jvp_silu(x, d));
      return {[g](const FeatureMap& v) { return inner(g, silu(v)); }, an,
              std::move(x), std::move(d)};
    }
    case Target::kAmpNormalize: {
      FeatureMap a = random_map(rng, 2, 5, 6, 0.1, 3.0);
      FeatureMap d = random_map(rng, 2, 5, 6, -kDirectionScale, kDirectionScale);
      FeatureMap g = random_map(rng, 2, 5, 6, -1.0, 1.0);
      auto wrap = [](const FeatureMap& m) {
        AmpPhase ap(m.channels(), m.height(), m.width());
        ap.amplitude.assign(m.data().begin(), m.data().end());
        return ap;
      };
      const double an =
          inner(g, amplitude_map(jvp_amp_normalize(wrap(a), wrap(d))));
      ScalarFn f = [g, wrap](const FeatureMap& m) {
        return inner(g, amplitude_map(cca::amp_normalize(wrap(m))));
      };
      return {std::move(f), an, std::move(a), std::move(d)};
    }
    case Target::kCrossAttention: {
      const auto params = cca::AttentionParams::random(4, 5, 3, rng.next_u64());
      Matrix text = as_matrix(random_map(rng, 1, 3, 5, -3.0, 3.0));
      FeatureMap xv = random_map(rng, 1, 7, 4, -1.5, 1.5);
      FeatureMap d = random_map(rng, 1, 7, 4, -kDirectionScale, kDirectionScale);
      FeatureMap g = random_map(rng, 1, 7, 4, -1.0, 1.0);
      const double an = inner(
          g, as_map(jvp_cross_attention(as_matrix(xv), as_matrix(d), text,
                                        params)));
      ScalarFn f = [g, text, params](const FeatureMap& m) {
        return inner(g, as_map(cca::cross_attention(as_matrix(m), text, params)));
      };
      return {std::move(f), an, std::move(xv), std::move(d)};
    }
    case Target::kSda: {
      FeatureMap x;
      do {
        x = random_map(rng, 3, 6, 7, -1.0, 1.0);
      } while (!spectrum_clear_of_zero(x));
      std::vector<double> alpha(3, 1.0);
      const auto style = sda::fuse_coefficients(
          sda::channel_stats(x), sda::sample_dirichlet(alpha, rng.next_u64()));
      FeatureMap d = random_map(rng, 3, 6, 7, -kDirectionScale, kDirectionScale);
      FeatureMap g = random_map(rng, 3, 6, 7, -1.0, 1.0);
      const double an = inner(g, jvp_sda(x, d, style));
      ScalarFn f = [g, style](const FeatureMap& m) {
        return inner(g, sda::sda_apply(m, style));
      };
      return {std::move(f), an, std::move(x), std::move(d)};
    }
    case Target::kCca: {
      const auto params = cca::AttentionParams::random(3, 5, 8, rng.next_u64());
      Matrix text = as_matrix(random_map(rng, 1, 4, 5, -3.0, 3.0));
      FeatureMap x;
      do {
        x = random_map(rng, 3, 6, 6, -1.5, 1.5);
      } while (!spectrum_clear_of_zero(cca::unflatten_tokens(
          cca::cross_attention(cca::flatten_tokens(x), text, params), 6, 6)));
      FeatureMap d = random_map(rng, 3, 6, 6, -kDirectionScale, kDirectionScale);
      FeatureMap g = random_map(rng, 3, 6, 6, -1.0, 1.0);
      const double an = inner(g, jvp_cca(x, d, text, params));
      ScalarFn f = [g, text, params](const FeatureMap& m) {
        return inner(g, cca::cca_forward(m, text, params));
      };
      return {std::move(f), an, std::move(x), std::move(d)};
    }
  }
  throw InvalidArgument("run_gradcheck: unknown target");
}

}  // namespace

std::vector<GradReport> run_gradcheck(std::span<const Target> suite,
                                      std::uint64_t seed, std::size_t probes) {
  if (probes == 0) throw InvalidArgument("run_gradcheck: probes must be >= 1");
  std::vector<GradReport> reports;
  for (const Target target : suite) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(target) + 1));
    GradReport report;
    report.op_name = std::string(target_name(target));
    report.num_probes = probes;
    std::size_t converged = 0;
    for (std::size_t k = 0; k < probes; ++k) {
      const Probe probe = make_probe(target, rng);
      double best = std::numeric_limits<double>::infinity();
      double best_step = kProbeSteps[0];
      double discrepancy[3] = {};
      for (std::size_t s = 0; s < 3; ++s) {
        const double fd =
            fd_directional(probe.f, probe.x, probe.dir, kProbeSteps[s]);
        discrepancy[s] = std::abs(fd - probe.analytic);
        const double err = relative_error(probe.analytic, fd);
        if (err < best) {
          best = err;
          best_step = kProbeSteps[s];
        }
      }
      if (discrepancy[1] < discrepancy[0]) ++converged;
      if (k == 0 || best > report.max_rel_err) {
        report.max_rel_err = best;
        report.step = best_step;
      }
    }
    report.convergence_fraction =
        static_cast<double>(converged) / static_cast<double>(probes);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace freqadapt::grad
