#include "kernels_internal.hpp"

namespace triage::simd::detail {

const KernelTable* avx2_table() { return nullptr; }

}  // namespace triage::simd::detail
