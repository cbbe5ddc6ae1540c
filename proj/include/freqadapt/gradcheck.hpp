#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "freqadapt/cca.hpp"
#include "freqadapt/sda.hpp"
#include "freqadapt/spectral.hpp"
#include "freqadapt/tensor.hpp"

// Forward-mode directional derivatives of the adapter transforms, checked
// against central finite differences.

namespace freqadapt::grad {

using ScalarFn = std::function<double(const FeatureMap&)>;

// (f(x + h d) - f(x - h d)) / 2h. Throws InvalidArgument if h <= 0 or d == 0.
double fd_directional(const ScalarFn& f, const FeatureMap& x,
                      const FeatureMap& dir, double step);

// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

FeatureMap jvp_silu(const FeatureMap& x, const FeatureMap& dir);

// Derivative of x -> sda_apply(x, style) with `style` held fixed.
FeatureMap jvp_sda(const FeatureMap& x, const FeatureMap& dir,
                   const sda::AffineStyle& style);

// Derivative of the amplitude normalization, mean and std differentiated
// through. The phase component of `dir` passes through unchanged.
AmpPhase jvp_amp_normalize(const AmpPhase& ap, const AmpPhase& dir,
                           cca::NormMode mode = cca::NormMode::kPerChannel);

// Derivative of cross_attention with respect to the visual tokens.
TokenMatrix jvp_cross_attention(const TokenMatrix& xv, const TokenMatrix& dir,
                                const TokenMatrix& xt,
                                const cca::AttentionParams& p);

// Derivative of cca_forward with respect to x.
FeatureMap jvp_cca(const FeatureMap& x, const FeatureMap& dir,
                   const TokenMatrix& xt, const cca::AttentionParams& p,
                   cca::NormMode mode = cca::NormMode::kPerChannel);

enum class Target { kSilu, kAmpNormalize, kCrossAttention, kSda, kCca };

std::string_view target_name(Target t);
std::optional<Target> parse_target(std::string_view name);
std::vector<Target> all_targets();

struct GradReport {
  std::string op_name;
  double max_rel_err = 0.0;   // worst probe, each probe at its best step
  std::size_t num_probes = 0;
  double step = 0.0;          // best step of the worst probe
  // Probes whose fd discrepancy shrinks when the step goes 1e-4 -> 1e-5.
  double convergence_fraction = 0.0;
};

inline constexpr double kProbeSteps[] = {1e-4, 1e-5, 1e-6};

std::vector<GradReport> run_gradcheck(std::span<const Target> suite,
                                      std::uint64_t seed, std::size_t probes);

}  // namespace freqadapt::grad
