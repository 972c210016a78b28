#include "triage/simnet/attach.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "triage/common/error.hpp"
#include "triage/simnet/builder.hpp"

namespace triage::simnet {

AttachedNeighborhood attach_node(const PatientGraph& g, std::span<const double> x_new,
                                 SimilarityMetric metric, double threshold,
                                 std::size_t fallback_k) {
  require(x_new.size() == g.features.d, ErrorCode::kShapeMismatch,
          "new node has " + std::to_string(x_new.size()) + " features, graph has " +
              std::to_string(g.features.d));
  for (double v : x_new) require(!std::isnan(v), ErrorCode::kInvalidArgument, "NaN in new node");
  metric.validate_threshold(threshold);

  const PairwiseScores scores(g.features, metric);
  const double norm = metric.is_similarity() ? scores.norm_of(x_new.data()) : 0.0;
  std::vector<double> all(g.n);
  for (std::size_t j = 0; j < g.n; ++j) all[j] = scores.score_query(x_new.data(), norm, j);

  AttachedNeighborhood out;
  for (std::size_t j = 0; j < g.n; ++j) {
    if (metric.passes(all[j], threshold)) {
      out.neighbors.push_back(static_cast<std::uint32_t>(j));
      out.scores.push_back(all[j]);
    }
  }
  if (!out.neighbors.empty() || fallback_k == 0) return out;

  out.fallback_used = true;
  std::vector<std::uint32_t> order(g.n);
  std::iota(order.begin(), order.end(), 0u);
  const std::size_t k = std::min(fallback_k, g.n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (all[a] != all[b]) return metric.closer(all[a], all[b]);
                      return a < b;
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  for (auto j : order) {
    out.neighbors.push_back(j);
    out.scores.push_back(all[j]);
  }
  return out;
}

AttachedView::AttachedView(const PatientGraph& g, std::vector<double> x_new,
                           AttachedNeighborhood nb)
    : g_(&g), x_new_(std::move(x_new)), nb_(std::move(nb)) {
  require(x_new_.size() == g.features.d, ErrorCode::kShapeMismatch,
          "attached node dimension mismatch");
}

const double* AttachedView::features(std::size_t u) const {
  return u == g_->n ? x_new_.data() : g_->features.row(u);
}

bool AttachedView::linked(std::size_t u) const {
  return std::binary_search(nb_.neighbors.begin(), nb_.neighbors.end(),
                            static_cast<std::uint32_t>(u));
}

std::size_t AttachedView::degree(std::size_t u) const {
  if (u == g_->n) return nb_.neighbors.size();
  return g_->degree(u) + (linked(u) ? 1 : 0);
}

void AttachedView::neighbors(std::size_t u, std::vector<std::uint32_t>& out) const {
  if (u == g_->n) {
    out = nb_.neighbors;
    return;
  }
  const auto base = g_->neighbors(u);
  out.assign(base.begin(), base.end());
  if (linked(u)) out.push_back(static_cast<std::uint32_t>(g_->n));
}

PatientGraph materialize(const AttachedView& view, int new_label) {
  const PatientGraph& g = view.base();
  const auto& nb = view.attachment();
  const SimilarityMetric metric = g.stats.metric;
  const std::size_t n = g.n;

  PatientGraph out;
  out.n = n + 1;
  out.offsets.assign(n + 2, 0);
  std::vector<float> new_weights(nb.neighbors.size());
  for (std::size_t k = 0; k < nb.neighbors.size(); ++k)
    new_weights[k] = static_cast<float>(metric.weight(nb.scores[k]));
  std::size_t k = 0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto base = g.neighbors(u);
    const auto bw = g.neighbor_weights(u);
    out.targets.insert(out.targets.end(), base.begin(), base.end());
    out.weights.insert(out.weights.end(), bw.begin(), bw.end());
    if (k < nb.neighbors.size() && nb.neighbors[k] == u) {
      out.targets.push_back(static_cast<std::uint32_t>(n));
      out.weights.push_back(new_weights[k]);
      ++k;
    }
    out.offsets[u + 1] = out.targets.size();
  }
  out.targets.insert(out.targets.end(), nb.neighbors.begin(), nb.neighbors.end());
  out.weights.insert(out.weights.end(), new_weights.begin(), new_weights.end());
  out.offsets[n + 1] = out.targets.size();

  out.features = g.features;
  out.features.n = n + 1;
  const double* x = view.features(n);
  out.features.values.insert(out.features.values.end(), x, x + g.features.d);
  out.labels = g.labels;
  out.labels.push_back(new_label);
  if (!g.masks.empty()) {
    out.masks = g.masks;
    out.masks.train.push_back(0);
    out.masks.eval.push_back(0);
    out.masks.test.push_back(0);
  }
  out.stats = g.stats;
  out.stats = graph_stats(out);
  return out;
}

}  // namespace triage::simnet
