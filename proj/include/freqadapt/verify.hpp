#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Self-checks behind `freqadapt verify` and the acceptance binary. Every check
// compares the library against an independent reference or an exact
// property and reports the worst measured deviation.

namespace freqadapt::verify {

struct CheckResult {
  int criterion = 0;  // acceptance item the check belongs to
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CheckResult> check_spectral(std::uint64_t seed);
std::vector<CheckResult> check_sda(std::uint64_t seed);
std::vector<CheckResult> check_cca_normalization(std::uint64_t seed);
std::vector<CheckResult> check_hf_emphasis(std::uint64_t seed);
std::vector<CheckResult> check_attention(std::uint64_t seed);
std::vector<CheckResult> check_gradients(std::uint64_t seed, std::size_t probes);
std::vector<CheckResult> check_adapter(std::uint64_t seed);

bool is_suite(std::string_view name);

// spectral | sda | cca | grad | adapter | all. Throws InvalidArgument on an
// unknown suite.
std::vector<CheckResult> run_suite(std::string_view suite, std::uint64_t seed,
                                   std::size_t probes);

// "PASS  name  detail  (1.23 s)"
std::string format_result(const CheckResult& r);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace freqadapt::verify
