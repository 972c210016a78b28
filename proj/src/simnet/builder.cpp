#include "triage/simnet/builder.hpp"

#include <algorithm>
#include <numeric>

#include "triage/common/error.hpp"
#include "triage/common/parallel.hpp"

namespace triage::simnet {
namespace {

struct UpperRow {
  std::vector<std::uint32_t> targets;
  std::vector<float> weights;
};

std::size_t resolve_workers(const BuildOptions& o) {
  return o.workers == 0 ? default_workers() : o.workers;
}

const simd::KernelTable& resolve_kernels(const BuildOptions& o) {
  return o.kernels != nullptr ? *o.kernels : simd::active_kernels();
}

// Visits every pair (i, j), i < j, with i in row tile `tile_index`, walking
// column tiles so a row tile and a column tile stay cache resident.
template <typename Fn>
void for_each_pair_in_row_tile(std::size_t n, std::size_t tile, std::size_t tile_index, Fn&& fn) {
  const std::size_t r0 = tile_index * tile;
  const std::size_t r1 = std::min(n, r0 + tile);
  for (std::size_t c0 = r0; c0 < n; c0 += tile) {
    const std::size_t c1 = std::min(n, c0 + tile);
    for (std::size_t i = r0; i < r1; ++i) {
      for (std::size_t j = std::max(c0, i + 1); j < c1; ++j) fn(i, j);
    }
  }
}

}  // namespace

PatientGraph build_graph(const ingest::FeatureMatrix& x, const ingest::LabelVector& labels,
                         SimilarityMetric metric, double threshold, const BuildOptions& options) {
  require(x.n >= 2, ErrorCode::kInvalidArgument, "graph construction needs at least 2 rows");
  require(labels.size() == x.n, ErrorCode::kShapeMismatch, "labels and rows differ in count");
  require(options.tile >= 1, ErrorCode::kInvalidArgument, "tile must be positive");
  metric.validate_threshold(threshold);
  const PairwiseScores scores(x, metric, resolve_kernels(options));
  const std::size_t n = x.n;
  const std::size_t tile = options.tile;
  const std::size_t tiles = (n + tile - 1) / tile;

  // Upper-triangle neighbours per row; each tile owns a disjoint row range.
  std::vector<UpperRow> upper(n);
  parallel_for(tiles, resolve_workers(options), [&](std::size_t t) {
    for_each_pair_in_row_tile(n, tile, t, [&](std::size_t i, std::size_t j) {
      const double s = scores(i, j);
      if (metric.passes(s, threshold)) {
        upper[i].targets.push_back(static_cast<std::uint32_t>(j));
        upper[i].weights.push_back(static_cast<float>(metric.weight(s)));
      }
    });
  });
  // Column tiles are visited in ascending order, so each row is sorted.

  PatientGraph g;
  g.n = n;
  std::vector<std::uint64_t> lower_count(n, 0);
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pairs += upper[i].targets.size();
    for (auto j : upper[i].targets) ++lower_count[j];
  }
  g.offsets.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u)
    g.offsets[u + 1] = g.offsets[u] + lower_count[u] + upper[u].targets.size();
  g.targets.resize(2 * pairs);
  g.weights.resize(2 * pairs);
  std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  // Lower entries arrive in ascending source order, then the row's own
  // upper entries follow; rows end up sorted.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < upper[i].targets.size(); ++k) {
      const std::size_t j = upper[i].targets[k];
      g.targets[cursor[j]] = static_cast<std::uint32_t>(i);
      g.weights[cursor[j]] = upper[i].weights[k];
      ++cursor[j];
    }
  }
  for (std::size_t u = 0; u < n; ++u) {
    std::copy(upper[u].targets.begin(), upper[u].targets.end(), g.targets.begin() + static_cast<std::ptrdiff_t>(cursor[u]));
    std::copy(upper[u].weights.begin(), upper[u].weights.end(), g.weights.begin() + static_cast<std::ptrdiff_t>(cursor[u]));
    upper[u] = UpperRow{};
  }

  g.features = x;
  g.labels = labels;
  g.stats = graph_stats(g);
  g.stats.metric = metric;
  g.stats.threshold = threshold;
  return g;
}

GraphStats graph_stats(const PatientGraph& g) {
  GraphStats s = g.stats;
  s.edge_count = static_cast<std::size_t>(g.offsets.back() / 2);
  s.isolated_node_count = 0;
  for (std::size_t u = 0; u < g.n; ++u)
    if (g.degree(u) == 0) ++s.isolated_node_count;
  return s;
}

std::vector<GraphStats> threshold_sweep(const ingest::FeatureMatrix& x, SimilarityMetric metric,
                                        const std::vector<double>& thresholds,
                                        const BuildOptions& options) {
  require(x.n >= 2, ErrorCode::kInvalidArgument, "sweep needs at least 2 rows");
  require(!thresholds.empty(), ErrorCode::kInvalidArgument, "no thresholds given");
  for (double t : thresholds) metric.validate_threshold(t);
  const PairwiseScores scores(x, metric, resolve_kernels(options));
  const std::size_t n = x.n;
  const std::size_t tile = options.tile;
  const std::size_t tiles = (n + tile - 1) / tile;

  std::vector<double> sorted = thresholds;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t m = sorted.size();
  const bool similarity = metric.is_similarity();

  // Per tile: histogram of pairs by the number of thresholds they pass, and
  // the closest score seen for every node.
  std::vector<std::vector<std::uint64_t>> hist(tiles, std::vector<std::uint64_t>(m + 1, 0));
  std::vector<std::vector<double>> best(tiles);
  const double worst = similarity ? -2.0 : 2.0;
  parallel_for(tiles, resolve_workers(options), [&](std::size_t t) {
    auto& h = hist[t];
    auto& b = best[t];
    b.assign(n, worst);
    for_each_pair_in_row_tile(n, tile, t, [&](std::size_t i, std::size_t j) {
      const double s = scores(i, j);
      // Bucket = index of the first threshold the pair fails (similarity)
      // or first threshold it passes (distance).
      const std::size_t idx =
          similarity
              ? static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), s) - sorted.begin())
              : static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), s) - sorted.begin());
      ++h[idx];
      if (metric.closer(s, b[i])) b[i] = s;
      if (metric.closer(s, b[j])) b[j] = s;
    });
  });

  std::vector<std::uint64_t> total(m + 1, 0);
  std::vector<double> node_best(n, worst);
  for (std::size_t t = 0; t < tiles; ++t) {
    for (std::size_t k = 0; k <= m; ++k) total[k] += hist[t][k];
    for (std::size_t u = 0; u < n; ++u)
      if (metric.closer(best[t][u], node_best[u])) node_best[u] = best[t][u];
  }

  std::vector<GraphStats> per_sorted(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::uint64_t edges = 0;
    if (similarity) {
      for (std::size_t idx = k + 1; idx <= m; ++idx) edges += total[idx];
    } else {
      for (std::size_t idx = 0; idx <= k; ++idx) edges += total[idx];
    }
    std::size_t isolated = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (!metric.passes(node_best[u], sorted[k])) ++isolated;
    per_sorted[k] = GraphStats{static_cast<std::size_t>(edges), isolated, metric, sorted[k]};
  }

  std::vector<GraphStats> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto k = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    out.push_back(per_sorted[k]);
  }
  return out;
}

}  // namespace triage::simnet
