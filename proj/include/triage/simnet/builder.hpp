#pragma once

#include <cstddef>
#include <vector>

#include "triage/simnet/graph.hpp"

namespace triage::simnet {

struct BuildOptions {
  std::size_t tile = 256;  // rows per tile; 256 x 16 doubles stays in L2
  std::size_t workers = 0;  // 0 = hardware concurrency
  const simd::KernelTable* kernels = nullptr;  // null = active backend
};

// Thresholded similarity graph. Pairs are scored tile by tile over the upper
// triangle in parallel and merged in row order, so the result does not depend
// on the worker count.
PatientGraph build_graph(const ingest::FeatureMatrix& x, const ingest::LabelVector& labels,
                         SimilarityMetric metric, double threshold,
                         const BuildOptions& options = {});

GraphStats graph_stats(const PatientGraph& g);

// Edge and isolated-node counts for many thresholds from a single pass over
// the pairs. Output order follows the input thresholds.
std::vector<GraphStats> threshold_sweep(const ingest::FeatureMatrix& x,
                                        SimilarityMetric metric,
                                        const std::vector<double>& thresholds,
                                        const BuildOptions& options = {});

}  // namespace triage::simnet
