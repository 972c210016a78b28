#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "triage/simnet/graph.hpp"

namespace triage::simnet {

// Read-only neighbourhood access shared by the full graph and by graphs
// augmented with an attached query node. Neighbour lists are reported in
// ascending id order.
class GraphView {
 public:
  virtual ~GraphView() = default;
  virtual std::size_t num_nodes() const = 0;
  virtual std::size_t feature_dim() const = 0;
  virtual const double* features(std::size_t u) const = 0;
  virtual std::size_t degree(std::size_t u) const = 0;
  virtual void neighbors(std::size_t u, std::vector<std::uint32_t>& out) const = 0;
};

class FullGraphView final : public GraphView {
 public:
  explicit FullGraphView(const PatientGraph& g) : g_(&g) {}

  std::size_t num_nodes() const override { return g_->n; }
  std::size_t feature_dim() const override { return g_->features.d; }
  const double* features(std::size_t u) const override { return g_->features.row(u); }
  std::size_t degree(std::size_t u) const override { return g_->degree(u); }
  void neighbors(std::size_t u, std::vector<std::uint32_t>& out) const override {
    const auto nb = g_->neighbors(u);
    out.assign(nb.begin(), nb.end());
  }

 private:
  const PatientGraph* g_;
};

}  // namespace triage::simnet
