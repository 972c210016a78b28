#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "triage/common/random.hpp"
#include "triage/ingest/dataset_io.hpp"
#include "triage/ingest/preprocess.hpp"
#include "triage/ingest/synth.hpp"
#include "triage/ingest/table.hpp"
#include "triage/simnet/graph.hpp"
#include "triage/simnet/metric.hpp"

namespace fixtures {

inline triage::ingest::FeatureMatrix random_features(std::size_t n, std::size_t d,
                                                     std::uint64_t seed) {
  triage::Rng rng(seed);
  triage::ingest::FeatureMatrix x;
  x.n = n;
  x.d = d;
  x.values.resize(n * d);
  for (double& v : x.values) v = rng.uniform();
  x.column_mins.assign(d, 0.0);
  x.column_maxs.assign(d, 1.0);
  return x;
}

inline triage::ingest::LabelVector random_labels(std::size_t n, std::uint64_t seed) {
  triage::Rng rng(seed ^ 0xabcdef);
  triage::ingest::LabelVector y(n);
  for (int& v : y) v = static_cast<int>(rng.index(4));
  return y;
}

// Metric score computed the obvious way: sequential sums and std::pow.
inline double naive_score(const double* a, const double* b, std::size_t d,
                          const triage::simnet::SimilarityMetric& m) {
  if (m.is_similarity()) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < d; ++k) {
      ab += a[k] * b[k];
      aa += a[k] * a[k];
      bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / (std::sqrt(aa) * std::sqrt(bb));
  }
  const double p = m.exponent();
  double s = 0;
  for (std::size_t k = 0; k < d; ++k) s += std::pow(std::fabs(a[k] - b[k]), p);
  return std::pow(s, 1.0 / p) / std::pow(static_cast<double>(d), 1.0 / p);
}

// (u, v, score) for every pair u < v passing the threshold, double loop.
inline std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> brute_force_edges(
    const triage::ingest::FeatureMatrix& x, const triage::simnet::SimilarityMetric& m,
    double threshold) {
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> out;
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = i + 1; j < x.n; ++j) {
      const double s = naive_score(x.row(i), x.row(j), x.d, m);
      if (m.passes(s, threshold))
        out.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), s);
    }
  return out;
}

// Symmetric CSR graph from an undirected edge list (u != v, no duplicates).
inline triage::simnet::PatientGraph graph_from_edges(
    std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    triage::ingest::FeatureMatrix features, triage::ingest::LabelVector labels) {
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  triage::simnet::PatientGraph g;
  g.n = n;
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    for (auto v : row) {
      g.targets.push_back(v);
      g.weights.push_back(1.0f);
    }
    g.offsets.push_back(g.targets.size());
  }
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.stats.edge_count = edges.size();
  return g;
}

inline triage::simnet::PatientGraph random_graph(std::size_t n, double p_edge, std::size_t d,
                                                 std::uint64_t seed) {
  triage::Rng rng(seed);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      if (rng.uniform() < p_edge) edges.emplace_back(u, v);
  return graph_from_edges(n, edges, random_features(n, d, seed + 1), random_labels(n, seed + 2));
}

// Synthetic CSV run through the full preprocessing pipeline.
inline triage::ingest::Dataset small_dataset(std::size_t rows, std::uint64_t seed) {
  triage::ingest::SynthOptions so;
  so.rows = rows;
  so.seed = seed;
  const auto raw = triage::ingest::parse_csv(triage::ingest::synthesize_patient_csv(so),
                                             triage::ingest::HeaderMapping::defaults());
  auto r = triage::ingest::preprocess_table(raw, {5, seed});
  return {std::move(r.features), std::move(r.labels), std::move(r.encoders), r.report};
}

// Fresh empty directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("triage_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace fixtures
