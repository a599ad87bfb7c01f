#include <cstdlib>

#include "erfit/simd/kernels.hpp"

namespace erfit::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::vector<const KernelSet*> detect() {
  std::vector<const KernelSet*> out{&scalar_kernels()};
#if defined(ERFIT_HAVE_AVX2)
  if (cpu_has_avx2()) out.push_back(detail::avx2_kernels());
#endif
#if defined(ERFIT_HAVE_NEON)
  out.push_back(detail::neon_kernels());
#endif
  return out;
}

}  // namespace

#if !defined(ERFIT_HAVE_AVX2)
const KernelSet* detail::avx2_kernels() { return nullptr; }
#endif
#if !defined(ERFIT_HAVE_NEON)
const KernelSet* detail::neon_kernels() { return nullptr; }
#endif

std::vector<const KernelSet*> available_kernels() {
  static const std::vector<const KernelSet*> kernels = detect();
  return kernels;
}

const KernelSet* find_kernels(std::string_view name) {
  for (const auto* k : available_kernels()) {
    if (k->name == name) return k;
  }
  return nullptr;
}

const KernelSet& active_kernels() {
  static const KernelSet& chosen = [] () -> const KernelSet& {
    if (const char* env = std::getenv("ERFIT_SIMD")) {
      const auto* k = find_kernels(env);
      return k ? *k : scalar_kernels();
    }
    return *available_kernels().back();
  }();
  return chosen;
}

}  // namespace erfit::simd
