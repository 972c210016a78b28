#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"
#include "triage/common/error.hpp"

namespace triage::simd {

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
  }
  return "unknown";
}

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::kScalar: return true;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(__i386__)
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Backend backend) {
  if (!backend_supported(backend))
    fail(ErrorCode::kInvalidArgument,
         "SIMD backend not available: " + std::string(to_string(backend)));
  if (backend == Backend::kAvx2) return *detail::avx2_table();
  return scalar_kernels();
}

const KernelTable& active_kernels() {
  static const KernelTable* selected = [] {
    const char* force = std::getenv("TRIAGE_SIMD");
    if (force != nullptr && std::string(force) == "scalar") return &scalar_kernels();
    if (backend_supported(Backend::kAvx2)) return detail::avx2_table();
    return &scalar_kernels();
  }();
  return *selected;
}

}  // namespace triage::simd
