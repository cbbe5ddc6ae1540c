#include <cstdlib>
#include <string>

#include "freqadapt/simd/kernels.hpp"

namespace freqadapt::simd {

#if !defined(FREQADAPT_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  const KernelTable* avx2 = cpu_has_avx2() ? avx2_kernels() : nullptr;
  if (const char* env = std::getenv("FREQADAPT_SIMD")) {
    std::string want(env);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2" && avx2 != nullptr) return *avx2;
  }
  return avx2 != nullptr ? *avx2 : scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace freqadapt::simd
