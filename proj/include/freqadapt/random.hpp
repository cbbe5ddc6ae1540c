#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace freqadapt {

// Seeded random stream with a fixed, documented algorithm so that golden
// files are portable:
//   - engine: std::mt19937_64 seeded with the 64-bit seed (output sequence is
//     fixed by the C++ standard);
//   - uniform [0,1): top 53 bits of one engine draw times 2^-53;
//   - uniform (0,1): (top 53 bits + 0.5) times 2^-53;
//   - normal: Marsaglia polar method, second variate cached.
// The standard library distributions are avoided on purpose: their output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer applied to seed + stream * golden-ratio increment.
// Used to derive independent, order-free sub-seeds (e.g. per stage).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Natural log of a Gamma(shape, 1) variate (Marsaglia-Tsang). For shape < 1
// the boost Gamma(shape) = Gamma(shape + 1) * U^(1/shape) is applied in log
// space so tiny shapes never underflow to zero.
double log_gamma_variate(Rng& rng, double shape);
double gamma_variate(Rng& rng, double shape);

// Dirichlet(alpha) draw: independent gamma variates normalized by their sum.
// Throws InvalidArgument if any alpha <= 0 or alpha is empty.
std::vector<double> dirichlet(Rng& rng, std::span<const double> alpha);

}  // namespace freqadapt
