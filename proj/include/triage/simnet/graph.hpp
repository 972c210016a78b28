#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "triage/ingest/preprocess.hpp"
#include "triage/simnet/metric.hpp"

namespace triage::simnet {

struct GraphStats {
  std::size_t edge_count = 0;  // undirected pairs
  std::size_t isolated_node_count = 0;
  SimilarityMetric metric;
  double threshold = 0.0;
};

struct SplitMasks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> eval;
  std::vector<std::uint8_t> test;

  bool empty() const { return train.empty(); }
};

// Symmetric weighted adjacency in CSR form. No self edges are stored;
// targets are sorted within each row.
struct PatientGraph {
  std::size_t n = 0;
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> targets;
  std::vector<float> weights;
  ingest::FeatureMatrix features;
  ingest::LabelVector labels;
  SplitMasks masks;
  GraphStats stats;

  std::size_t degree(std::size_t u) const {
    return static_cast<std::size_t>(offsets[u + 1] - offsets[u]);
  }
  std::span<const std::uint32_t> neighbors(std::size_t u) const {
    return {targets.data() + offsets[u], degree(u)};
  }
  std::span<const float> neighbor_weights(std::size_t u) const {
    return {weights.data() + offsets[u], degree(u)};
  }
  std::size_t max_degree() const;
};

// Checks CSR shape, sortedness, symmetry (with equal weights) and the
// absence of self edges. Throws triage::Error on the first violation.
void validate(const PatientGraph& g);

}  // namespace triage::simnet
