#include <cmath>

#include "kernels_internal.hpp"

namespace triage::simd {
namespace {

double term(double diff, PowerKind kind, double p) {
  const double a = std::fabs(diff);
  switch (kind) {
    case PowerKind::kAbs: return a;
    case PowerKind::kSquare: return a * a;
    case PowerKind::kFourth: {
      const double a2 = a * a;
      return a2 * a2;
    }
    case PowerKind::kTenth: {
      const double a2 = a * a;
      const double a4 = a2 * a2;
      const double a8 = a4 * a4;
      return a8 * a2;
    }
    case PowerKind::kGeneral: return std::pow(a, p);
  }
  return 0.0;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i % 4] += a[i] * b[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double power_sum_scalar(const double* a, const double* b, std::size_t n, PowerKind kind,
                        double p) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i % 4] += term(a[i] - b[i], kind, p);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void max_update_scalar(const double* x, double* y, int* arg, int source, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > y[i]) {
      y[i] = x[i];
      arg[i] = source;
    }
  }
}

}  // namespace

PowerKind power_kind_for(double p) {
  if (p == 1.0) return PowerKind::kAbs;
  if (p == 2.0) return PowerKind::kSquare;
  if (p == 4.0) return PowerKind::kFourth;
  if (p == 10.0) return PowerKind::kTenth;
  return PowerKind::kGeneral;
}

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::kScalar, &dot_scalar, &power_sum_scalar, &axpy_scalar,
                                 &max_update_scalar};
  return table;
}

}  // namespace triage::simd
