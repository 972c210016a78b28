#include "triage/simnet/graph.hpp"

#include <algorithm>
#include <string>

#include "triage/common/error.hpp"

namespace triage::simnet {

std::size_t PatientGraph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t u = 0; u < n; ++u) best = std::max(best, degree(u));
  return best;
}

void validate(const PatientGraph& g) {
  require(g.offsets.size() == g.n + 1 && g.offsets.front() == 0, ErrorCode::kInvalidArgument,
          "CSR offsets malformed");
  require(g.offsets.back() == g.targets.size() && g.targets.size() == g.weights.size(),
          ErrorCode::kInvalidArgument, "CSR arrays disagree in length");
  for (std::size_t u = 0; u < g.n; ++u) {
    require(g.offsets[u] <= g.offsets[u + 1], ErrorCode::kInvalidArgument,
            "CSR offsets decrease at row " + std::to_string(u));
    const auto nb = g.neighbors(u);
    const auto w = g.neighbor_weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const std::size_t v = nb[k];
      require(v < g.n, ErrorCode::kInvalidArgument, "CSR target out of range");
      require(v != u, ErrorCode::kInvalidArgument, "self edge at node " + std::to_string(u));
      require(k == 0 || nb[k - 1] < v, ErrorCode::kInvalidArgument,
              "targets not strictly sorted in row " + std::to_string(u));
      const auto back = g.neighbors(v);
      const auto it = std::lower_bound(back.begin(), back.end(), static_cast<std::uint32_t>(u));
      require(it != back.end() && *it == u, ErrorCode::kInvalidArgument,
              "asymmetric edge " + std::to_string(u) + "->" + std::to_string(v));
      require(g.neighbor_weights(v)[static_cast<std::size_t>(it - back.begin())] == w[k],
              ErrorCode::kInvalidArgument, "asymmetric weight on edge");
    }
  }
}

}  // namespace triage::simnet
