#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "triage/ingest/preprocess.hpp"
#include "triage/simd/kernels.hpp"

namespace triage::simnet {

enum class MetricKind { kCosine, kEuclidean, kManhattan, kMinkowski };

// Cosine is a similarity (edge when score > threshold); the Minkowski family
// are distances (edge when score < threshold), normalized by d^(1/p) so that
// inputs in [0,1]^d give distances in [0,1].
struct SimilarityMetric {
  MetricKind kind = MetricKind::kCosine;
  double p = 2.0;

  static SimilarityMetric cosine() { return {MetricKind::kCosine, 2.0}; }
  static SimilarityMetric euclidean() { return {MetricKind::kEuclidean, 2.0}; }
  static SimilarityMetric manhattan() { return {MetricKind::kManhattan, 1.0}; }
  static SimilarityMetric minkowski(double p);

  // Accepts "cosine", "euclidean", "manhattan", "minkowski4", "minkowski:10".
  static SimilarityMetric parse(std::string_view text);

  bool is_similarity() const { return kind == MetricKind::kCosine; }
  double exponent() const;
  std::string name() const;

  bool passes(double score, double threshold) const {
    return is_similarity() ? score > threshold : score < threshold;
  }
  // Edge weight: the cosine itself, or 1 - normalized distance.
  double weight(double score) const { return is_similarity() ? score : 1.0 - score; }
  // True when `a` is a strictly closer pair than `b`.
  bool closer(double a, double b) const { return is_similarity() ? a > b : a < b; }

  void validate_threshold(double threshold) const;

  friend bool operator==(const SimilarityMetric&, const SimilarityMetric&) = default;
};

// Score accessor over a feature matrix. Nothing n x n is materialized;
// callers stream pairs or rows.
class PairwiseScores {
 public:
  PairwiseScores(const ingest::FeatureMatrix& x, SimilarityMetric metric,
                 const simd::KernelTable& kernels = simd::active_kernels());

  double operator()(std::size_t i, std::size_t j) const {
    return score_query(x_->row(i), norms_.empty() ? 0.0 : norms_[i], j);
  }

  // Score of an arbitrary query vector against stored row j. `query_norm` is
  // only read for cosine.
  double score_query(const double* query, double query_norm, std::size_t j) const;

  double norm_of(const double* v) const;

  std::size_t size() const { return x_->n; }
  std::size_t dim() const { return x_->d; }
  const SimilarityMetric& metric() const { return metric_; }
  const simd::KernelTable& kernels() const { return *kernels_; }

 private:
  const ingest::FeatureMatrix* x_;
  SimilarityMetric metric_;
  const simd::KernelTable* kernels_;
  simd::PowerKind power_kind_;
  double inv_p_ = 1.0;
  double normalizer_ = 1.0;
  std::vector<double> norms_;
};

}  // namespace triage::simnet
