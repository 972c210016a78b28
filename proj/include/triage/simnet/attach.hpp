#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "triage/simnet/view.hpp"

namespace triage::simnet {

struct AttachedNeighborhood {
  std::vector<std::uint32_t> neighbors;  // ascending ids
  std::vector<double> scores;            // metric score per neighbour
  bool fallback_used = false;
};

// Connects a new (already scaled) feature vector to every node passing the
// threshold rule. When none passes, the `fallback_k` closest nodes are used
// instead (ties to the lower id) and the result is flagged.
AttachedNeighborhood attach_node(const PatientGraph& g, std::span<const double> x_new,
                                 SimilarityMetric metric, double threshold,
                                 std::size_t fallback_k);

// The base graph plus the attached node (id n). The base graph is never
// modified.
class AttachedView final : public GraphView {
 public:
  AttachedView(const PatientGraph& g, std::vector<double> x_new, AttachedNeighborhood nb);

  std::size_t num_nodes() const override { return g_->n + 1; }
  std::size_t feature_dim() const override { return g_->features.d; }
  const double* features(std::size_t u) const override;
  std::size_t degree(std::size_t u) const override;
  void neighbors(std::size_t u, std::vector<std::uint32_t>& out) const override;

  std::size_t new_node() const { return g_->n; }
  const AttachedNeighborhood& attachment() const { return nb_; }
  const PatientGraph& base() const { return *g_; }

 private:
  bool linked(std::size_t u) const;

  const PatientGraph* g_;
  std::vector<double> x_new_;
  AttachedNeighborhood nb_;
};

// Copies the base graph with the attached node materialized as node n.
PatientGraph materialize(const AttachedView& view, int new_label = 0);

}  // namespace triage::simnet
