#pragma once

#include "triage/simd/kernels.hpp"

namespace triage::simd::detail {

// Null when the AVX2 translation unit was not built for this target.
const KernelTable* avx2_table();

}  // namespace triage::simd::detail
