#include "triage/simnet/graph_io.hpp"

#include <cstdio>
#include <sstream>

#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"
#include "triage/simnet/builder.hpp"

namespace triage::simnet {
namespace {

constexpr char kMagic[4] = {'T', 'R', 'G', 'G'};

}  // namespace

void save_graph(const std::string& path, const PatientGraph& g) {
  const auto& x = g.features;
  require(x.n == g.n && g.labels.size() == g.n, ErrorCode::kShapeMismatch,
          "graph node arrays inconsistent");
  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kGraphVersion);
  w.put<std::uint64_t>(g.n);
  w.put<std::uint64_t>(g.targets.size() / 2);
  w.put_span<std::uint64_t>(g.offsets);
  w.put_span<std::uint32_t>(g.targets);
  w.put_span<float>(g.weights);
  w.put<std::uint64_t>(x.d);
  w.put_span<double>(x.values);
  std::vector<double> mins = x.column_mins, maxs = x.column_maxs;
  mins.resize(x.d, 0.0);
  maxs.resize(x.d, 1.0);
  w.put_span<double>(mins);
  w.put_span<double>(maxs);
  std::vector<std::int32_t> labels(g.labels.begin(), g.labels.end());
  w.put_span<std::int32_t>(labels);
  const std::vector<std::uint8_t> none(g.n, 0);
  w.put_span<std::uint8_t>(g.masks.empty() ? none : g.masks.train);
  w.put_span<std::uint8_t>(g.masks.empty() ? none : g.masks.eval);
  w.put_span<std::uint8_t>(g.masks.empty() ? none : g.masks.test);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(g.stats.metric.kind));
  w.put<double>(g.stats.metric.p);
  w.put<double>(g.stats.threshold);
  w.put<std::uint64_t>(g.stats.isolated_node_count);
  write_file_atomic(path, w.bytes());
}

PatientGraph load_graph(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.get_raw(4) != std::string_view(kMagic, 4))
    fail(ErrorCode::kParse, path + " is not a graph file");
  const auto version = r.get<std::uint32_t>();
  if (version != kGraphVersion)
    fail(ErrorCode::kVersionMismatch, "graph version " + std::to_string(version) + " unsupported");
  PatientGraph g;
  g.n = r.get<std::uint64_t>();
  const auto edges = r.get<std::uint64_t>();
  g.offsets = r.get_vector<std::uint64_t>(g.n + 1);
  g.targets = r.get_vector<std::uint32_t>(2 * edges);
  g.weights = r.get_vector<float>(2 * edges);
  auto& x = g.features;
  x.n = g.n;
  x.d = r.get<std::uint64_t>();
  x.values = r.get_vector<double>(x.n * x.d);
  x.column_mins = r.get_vector<double>(x.d);
  x.column_maxs = r.get_vector<double>(x.d);
  const auto labels = r.get_vector<std::int32_t>(g.n);
  g.labels.assign(labels.begin(), labels.end());
  g.masks.train = r.get_vector<std::uint8_t>(g.n);
  g.masks.eval = r.get_vector<std::uint8_t>(g.n);
  g.masks.test = r.get_vector<std::uint8_t>(g.n);
  const auto kind = r.get<std::uint32_t>();
  require(kind <= static_cast<std::uint32_t>(MetricKind::kMinkowski), ErrorCode::kParse,
          "bad metric kind in graph file");
  g.stats.metric = SimilarityMetric{static_cast<MetricKind>(kind), r.get<double>()};
  g.stats.threshold = r.get<double>();
  g.stats.isolated_node_count = r.get<std::uint64_t>();
  g.stats.edge_count = edges;
  require(g.offsets.back() == g.targets.size(), ErrorCode::kParse, "graph CSR inconsistent");
  return g;
}

std::string edges_to_csv(const PatientGraph& g) {
  std::ostringstream out;
  out << "source,target,weight\n";
  char buf[32];
  for (std::size_t u = 0; u < g.n; ++u) {
    const auto nb = g.neighbors(u);
    const auto w = g.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] <= u) continue;
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(w[k]));
      out << u << ',' << nb[k] << ',' << buf << '\n';
    }
  }
  return out.str();
}

}  // namespace triage::simnet
