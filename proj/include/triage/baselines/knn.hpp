#pragma once

#include <cstddef>
#include <vector>

#include "triage/ingest/preprocess.hpp"
#include "triage/simnet/metric.hpp"

namespace triage::baselines {

struct KnnModel {
  ingest::FeatureMatrix train;
  ingest::LabelVector labels;
  std::size_t k = 5;
  simnet::SimilarityMetric metric = simnet::SimilarityMetric::euclidean();
};

// Keeps the rows of x with mask[i] != 0 (all rows when mask is empty).
KnnModel knn_fit(const ingest::FeatureMatrix& x, const ingest::LabelVector& y, std::size_t k,
                 simnet::SimilarityMetric metric = simnet::SimilarityMetric::euclidean(),
                 const std::vector<std::uint8_t>& mask = {});

// Majority vote among the k nearest training rows. Score ties go to the
// lower training row, vote ties to the smaller class index.
ingest::LabelVector knn_predict(const KnnModel& model, const ingest::FeatureMatrix& queries);

}  // namespace triage::baselines
