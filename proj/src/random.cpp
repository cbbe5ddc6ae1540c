#include "freqadapt/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freqadapt/error.hpp"

namespace freqadapt {

namespace {
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * kTwoPow53Inv;
}

double Rng::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * kTwoPow53Inv;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double log_gamma_variate(Rng& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw InvalidArgument("gamma: shape must be positive and finite");
  }
  if (shape < 1.0) {
    const double boosted = log_gamma_variate(rng, shape + 1.0);
    return boosted + std::log(rng.uniform_open()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return std::log(d * v);
    }
  }
}

double gamma_variate(Rng& rng, double shape) {
  return std::exp(log_gamma_variate(rng, shape));
}

std::vector<double> dirichlet(Rng& rng, std::span<const double> alpha) {
  if (alpha.empty()) throw InvalidArgument("dirichlet: empty alpha");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("dirichlet: every alpha must be positive");
    }
  }
  std::vector<double> logs(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    logs[i] = log_gamma_variate(rng, alpha[i]);
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  std::vector<double> weights(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    weights[i] = std::exp(logs[i] - peak);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace freqadapt
