#pragma once

#include <cstddef>
#include <string_view>

// Arithmetic inner loops shared by pairwise scoring, dense matmul and sparse
// aggregation. Every kernel exists as a scalar reference and as an AVX2
// variant; the AVX2 variants reproduce the scalar results bit-for-bit:
//
//   * reductions accumulate element i into lane (i % 4) and combine the lanes
//     as (l0 + l1) + (l2 + l3), in both implementations;
//   * no fused multiply-add is used anywhere (the build also disables
//     contraction), so element-wise kernels round identically.
//
// That property lets results files stay bit-identical regardless of the
// machine that produced them.

namespace triage::simd {

enum class Backend { kScalar, kAvx2 };

std::string_view to_string(Backend backend);

// Exponent of a Minkowski term |a_i - b_i|^p. The fixed exponents are
// evaluated by repeated multiplication; kGeneral calls std::pow.
enum class PowerKind { kAbs, kSquare, kFourth, kTenth, kGeneral };

PowerKind power_kind_for(double p);

struct KernelTable {
  Backend backend;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i |a[i] - b[i]|^p
  double (*power_sum)(const double* a, const double* b, std::size_t n, PowerKind kind,
                      double p);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // y[i] = max(y[i], x[i]) with the index of the winning source recorded in
  // arg[i] whenever x strictly exceeds y.
  void (*max_update)(const double* x, double* y, int* arg, int source, std::size_t n);
};

const KernelTable& scalar_kernels();

// True when the variant was compiled in and the CPU supports it.
bool backend_supported(Backend backend);

// Throws triage::Error when the backend is unsupported.
const KernelTable& kernels_for(Backend backend);

// Best supported backend. Setting TRIAGE_SIMD=scalar in the environment
// forces the reference kernels.
const KernelTable& active_kernels();

}  // namespace triage::simd
