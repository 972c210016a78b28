// Compiled with -mavx2 (and deliberately without -mfma).
#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace triage::simd::detail {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double combine(const double lane[4]) {
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t i = n4; i < n; ++i) lane[i % 4] += a[i] * b[i];
  return combine(lane);
}

double power_sum_avx2(const double* a, const double* b, std::size_t n, PowerKind kind,
                      double p) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  alignas(32) double lane[4];
  if (kind == PowerKind::kGeneral) {
    // No vector pow: vectorize the difference, evaluate pow per lane.
    lane[0] = lane[1] = lane[2] = lane[3] = 0.0;
    alignas(32) double diff[4];
    for (std::size_t i = 0; i < n4; i += 4) {
      _mm256_store_pd(diff, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
      for (int k = 0; k < 4; ++k) lane[k] += std::pow(diff[k], p);
    }
    for (std::size_t i = n4; i < n; ++i) lane[i % 4] += std::pow(std::fabs(a[i] - b[i]), p);
    return combine(lane);
  }
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    __m256d t;
    switch (kind) {
      case PowerKind::kAbs: t = d; break;
      case PowerKind::kSquare: t = _mm256_mul_pd(d, d); break;
      case PowerKind::kFourth: {
        const __m256d d2 = _mm256_mul_pd(d, d);
        t = _mm256_mul_pd(d2, d2);
        break;
      }
      default: {
        const __m256d d2 = _mm256_mul_pd(d, d);
        const __m256d d4 = _mm256_mul_pd(d2, d2);
        const __m256d d8 = _mm256_mul_pd(d4, d4);
        t = _mm256_mul_pd(d8, d2);
        break;
      }
    }
    acc = _mm256_add_pd(acc, t);
  }
  _mm256_store_pd(lane, acc);
  for (std::size_t i = n4; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    double t = d;
    switch (kind) {
      case PowerKind::kAbs: break;
      case PowerKind::kSquare: t = d * d; break;
      case PowerKind::kFourth: {
        const double d2 = d * d;
        t = d2 * d2;
        break;
      }
      default: {
        const double d2 = d * d;
        const double d4 = d2 * d2;
        const double d8 = d4 * d4;
        t = d8 * d2;
        break;
      }
    }
    lane[i % 4] += t;
  }
  return combine(lane);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] += alpha * x[i];
}

void max_update_avx2(const double* x, double* y, int* arg, int source, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d gt = _mm256_cmp_pd(vx, vy, _CMP_GT_OQ);
    const int mask = _mm256_movemask_pd(gt);
    if (mask == 0) continue;
    _mm256_storeu_pd(y + i, _mm256_blendv_pd(vy, vx, gt));
    for (int k = 0; k < 4; ++k)
      if (mask & (1 << k)) arg[i + k] = source;
  }
  for (std::size_t i = n4; i < n; ++i) {
    if (x[i] > y[i]) {
      y[i] = x[i];
      arg[i] = source;
    }
  }
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Backend::kAvx2, &dot_avx2, &power_sum_avx2, &axpy_avx2,
                                 &max_update_avx2};
  return &table;
}

}  // namespace triage::simd::detail
