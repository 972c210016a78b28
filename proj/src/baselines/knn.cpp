#include "triage/baselines/knn.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "triage/common/error.hpp"

namespace triage::baselines {

KnnModel knn_fit(const ingest::FeatureMatrix& x, const ingest::LabelVector& y, std::size_t k,
                 simnet::SimilarityMetric metric, const std::vector<std::uint8_t>& mask) {
  require(y.size() == x.n, ErrorCode::kShapeMismatch, "labels do not match feature rows");
  require(mask.empty() || mask.size() == x.n, ErrorCode::kShapeMismatch,
          "mask does not match feature rows");
  KnnModel m;
  m.k = k;
  m.metric = metric;
  m.train.d = x.d;
  for (std::size_t i = 0; i < x.n; ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    m.train.values.insert(m.train.values.end(), x.row(i), x.row(i) + x.d);
    m.labels.push_back(y[i]);
  }
  m.train.n = m.labels.size();
  require(m.train.n > 0, ErrorCode::kInvalidArgument, "knn fitted on no rows");
  require(k >= 1 && k <= m.train.n, ErrorCode::kInvalidArgument,
          "k must be between 1 and the training size");
  return m;
}

ingest::LabelVector knn_predict(const KnnModel& model, const ingest::FeatureMatrix& queries) {
  require(model.train.n > 0, ErrorCode::kInvalidArgument, "knn model is empty");
  require(queries.d == model.train.d, ErrorCode::kShapeMismatch, "query dimension mismatch");
  const simnet::PairwiseScores scores(model.train, model.metric);
  const auto& metric = model.metric;
  ingest::LabelVector out(queries.n);
  std::vector<std::pair<double, std::uint32_t>> cand(model.train.n);
  for (std::size_t q = 0; q < queries.n; ++q) {
    const double* row = queries.row(q);
    const double norm = scores.norm_of(row);
    for (std::size_t j = 0; j < model.train.n; ++j)
      cand[j] = {scores.score_query(row, norm, j), static_cast<std::uint32_t>(j)};
    const auto nearer = [&metric](const auto& a, const auto& b) {
      if (a.first != b.first) return metric.closer(a.first, b.first);
      return a.second < b.second;
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(model.k),
                      cand.end(), nearer);
    std::array<std::size_t, ingest::kClassCount> votes{};
    for (std::size_t i = 0; i < model.k; ++i) {
      const int label = model.labels[cand[i].second];
      if (label >= 0 && static_cast<std::size_t>(label) < votes.size()) ++votes[label];
    }
    out[q] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

}  // namespace triage::baselines
