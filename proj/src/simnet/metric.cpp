#include "triage/simnet/metric.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "triage/common/error.hpp"

namespace triage::simnet {

SimilarityMetric SimilarityMetric::minkowski(double p) {
  require(p >= 1.0 && std::isfinite(p), ErrorCode::kInvalidArgument,
          "Minkowski exponent must be >= 1");
  return {MetricKind::kMinkowski, p};
}

SimilarityMetric SimilarityMetric::parse(std::string_view text) {
  if (text == "cosine") return cosine();
  if (text == "euclidean") return euclidean();
  if (text == "manhattan") return manhattan();
  if (text.rfind("minkowski", 0) == 0) {
    std::string rest(text.substr(9));
    if (!rest.empty() && (rest[0] == ':' || rest[0] == '-' || rest[0] == '=')) rest.erase(0, 1);
    if (rest.empty()) fail(ErrorCode::kInvalidArgument, "minkowski metric needs an exponent");
    char* end = nullptr;
    const double p = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || *end != '\0')
      fail(ErrorCode::kInvalidArgument, "bad minkowski exponent: " + rest);
    return minkowski(p);
  }
  fail(ErrorCode::kInvalidArgument, "unknown metric: " + std::string(text));
}

double SimilarityMetric::exponent() const {
  switch (kind) {
    case MetricKind::kCosine: return 2.0;
    case MetricKind::kEuclidean: return 2.0;
    case MetricKind::kManhattan: return 1.0;
    case MetricKind::kMinkowski: return p;
  }
  return p;
}

std::string SimilarityMetric::name() const {
  switch (kind) {
    case MetricKind::kCosine: return "cosine";
    case MetricKind::kEuclidean: return "euclidean";
    case MetricKind::kManhattan: return "manhattan";
    case MetricKind::kMinkowski: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "minkowski%g", p);
      return buf;
    }
  }
  return "cosine";
}

void SimilarityMetric::validate_threshold(double threshold) const {
  if (is_similarity()) {
    require(threshold >= -1.0 && threshold <= 1.0, ErrorCode::kInvalidArgument,
            "cosine threshold must lie in [-1, 1]");
  } else {
    require(threshold >= 0.0 && threshold <= 1.0, ErrorCode::kInvalidArgument,
            "distance threshold must lie in [0, 1]");
  }
}

PairwiseScores::PairwiseScores(const ingest::FeatureMatrix& x, SimilarityMetric metric,
                               const simd::KernelTable& kernels)
    : x_(&x), metric_(metric), kernels_(&kernels) {
  for (double v : x.values)
    require(!std::isnan(v), ErrorCode::kInvalidArgument, "NaN in feature matrix");
  const double p = metric.exponent();
  power_kind_ = simd::power_kind_for(p);
  inv_p_ = 1.0 / p;
  normalizer_ = p == 1.0   ? static_cast<double>(x.d)
                : p == 2.0 ? std::sqrt(static_cast<double>(x.d))
                           : std::pow(static_cast<double>(x.d), inv_p_);
  if (metric.is_similarity()) {
    norms_.resize(x.n);
    for (std::size_t i = 0; i < x.n; ++i) norms_[i] = norm_of(x.row(i));
  }
}

double PairwiseScores::norm_of(const double* v) const {
  return std::sqrt(kernels_->dot(v, v, x_->d));
}

double PairwiseScores::score_query(const double* query, double query_norm, std::size_t j) const {
  const double* row = x_->row(j);
  if (metric_.is_similarity()) {
    const double denom = query_norm * norms_[j];
    if (denom == 0.0) return 0.0;
    return kernels_->dot(query, row, x_->d) / denom;
  }
  const double sum = kernels_->power_sum(query, row, x_->d, power_kind_, metric_.p);
  double root;
  switch (power_kind_) {
    case simd::PowerKind::kAbs: root = sum; break;
    case simd::PowerKind::kSquare: root = std::sqrt(sum); break;
    default: root = std::pow(sum, inv_p_); break;
  }
  return root / normalizer_;
}

}  // namespace triage::simnet
