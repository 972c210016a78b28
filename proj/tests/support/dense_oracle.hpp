#pragma once

// Plain-loop forward passes over the whole graph, written independently of
// the block/sparse machinery. Used as oracles for the model code.

#include <algorithm>
#include <cmath>
#include <vector>

#include "triage/gnn/params.hpp"
#include "triage/gnn/sampler.hpp"
#include "triage/gnn/spec.hpp"
#include "triage/simnet/view.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const triage::ag::Tensor& t) {
  Mat m(t.rows, std::vector<double>(t.cols));
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) m[i][j] = t.at(i, j);
  return m;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline void add_bias_relu(Mat& h, const Mat& bias, bool relu) {
  for (auto& row : h)
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] += bias[0][j];
      if (relu) row[j] = std::max(0.0, row[j]);
    }
}

inline Mat features(const triage::simnet::GraphView& g) {
  Mat x(g.num_nodes(), std::vector<double>(g.feature_dim()));
  for (std::size_t u = 0; u < g.num_nodes(); ++u)
    std::copy(g.features(u), g.features(u) + g.feature_dim(), x[u].begin());
  return x;
}

inline std::vector<std::vector<std::uint32_t>> adjacency(const triage::simnet::GraphView& g) {
  std::vector<std::vector<std::uint32_t>> adj(g.num_nodes());
  for (std::size_t u = 0; u < g.num_nodes(); ++u) g.neighbors(u, adj[u]);
  return adj;
}

// Dense normalized adjacency D^-1/2 (A + I) D^-1/2.
inline Mat gcn_operator(const triage::simnet::GraphView& g) {
  const auto adj = adjacency(g);
  const std::size_t n = adj.size();
  Mat a(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    a[u][u] = 1.0;
    for (auto v : adj[u]) a[u][v] = 1.0;
  }
  std::vector<double> deg(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) deg[u] += a[u][v];
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) a[u][v] /= std::sqrt(deg[u] * deg[v]);
  return a;
}

inline Mat gcn_forward(const triage::gnn::ModelSpec& spec, const triage::gnn::ParamSet& p,
                       const triage::simnet::GraphView& g) {
  const Mat a = gcn_operator(g);
  Mat h = features(g);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    h = matmul(a, matmul(h, to_mat(p.tensors[2 * l])));
    add_bias_relu(h, to_mat(p.tensors[2 * l + 1]), spec.layers[l].activation_after);
  }
  return h;
}

inline double leaky(double z, double slope) { return z > 0 ? z : slope * z; }

// GATv2 layer with explicit loops; neighbourhood = {u} + N(u).
inline Mat gatv2_layer(const triage::gnn::LayerSpec& layer, const Mat& h,
                       const std::vector<std::vector<std::uint32_t>>& adj, const Mat& w_src,
                       const Mat& w_dst, const Mat& att, const Mat& bias,
                       Mat* alpha_rows = nullptr) {
  const Mat xs = matmul(h, w_src), xd = matmul(h, w_dst);
  const std::size_t heads = layer.heads, f = layer.out_dim;
  Mat out(h.size(), std::vector<double>(layer.output_width(), 0.0));
  if (alpha_rows) alpha_rows->assign(h.size(), {});
  for (std::size_t u = 0; u < h.size(); ++u) {
    std::vector<std::uint32_t> nb = {static_cast<std::uint32_t>(u)};
    nb.insert(nb.end(), adj[u].begin(), adj[u].end());
    for (std::size_t hd = 0; hd < heads; ++hd) {
      std::vector<double> e(nb.size());
      for (std::size_t k = 0; k < nb.size(); ++k) {
        double s = 0;
        for (std::size_t j = 0; j < f; ++j)
          s += att[hd][j] * leaky(xd[u][hd * f + j] + xs[nb[k]][hd * f + j], 0.2);
        e[k] = s;
      }
      const double m = *std::max_element(e.begin(), e.end());
      double z = 0;
      for (double& v : e) z += (v = std::exp(v - m));
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const double alpha = e[k] / z;
        if (alpha_rows) (*alpha_rows)[u].push_back(alpha);
        for (std::size_t j = 0; j < f; ++j) {
          const double msg = alpha * xs[nb[k]][hd * f + j];
          if (layer.concat_heads) {
            out[u][hd * f + j] += msg;
          } else {
            out[u][j] += msg / static_cast<double>(heads);
          }
        }
      }
    }
  }
  add_bias_relu(out, bias, layer.activation_after);
  return out;
}

inline Mat gat_forward(const triage::gnn::ModelSpec& spec, const triage::gnn::ParamSet& p,
                       const triage::simnet::GraphView& g) {
  const auto adj = adjacency(g);
  Mat h = features(g);
  for (std::size_t l = 0; l < spec.layers.size(); ++l)
    h = gatv2_layer(spec.layers[l], h, adj, to_mat(p.tensors[4 * l]), to_mat(p.tensors[4 * l + 1]),
                    to_mat(p.tensors[4 * l + 2]), to_mat(p.tensors[4 * l + 3]));
  return h;
}

// GraphSAGE over explicit neighbour lists per layer.
inline Mat sage_forward(const triage::gnn::ModelSpec& spec, const triage::gnn::ParamSet& p,
                        const triage::simnet::GraphView& g,
                        const std::vector<std::vector<std::vector<std::uint32_t>>>& nb_per_layer) {
  Mat h = features(g);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    const auto& nbs = nb_per_layer[l];
    Mat agg(h.size(), std::vector<double>(h[0].size(), 0.0));
    for (std::size_t u = 0; u < h.size(); ++u) {
      if (nbs[u].empty()) continue;
      for (std::size_t j = 0; j < h[0].size(); ++j) {
        if (layer.aggregator == triage::gnn::Aggregator::kMax) {
          double m = -INFINITY;
          for (auto v : nbs[u]) m = std::max(m, h[v][j]);
          agg[u][j] = m;
        } else {
          double s = 0;
          for (auto v : nbs[u]) s += h[v][j];
          agg[u][j] = s / static_cast<double>(nbs[u].size());
        }
      }
    }
    Mat out = matmul(h, to_mat(p.tensors[3 * l]));
    const Mat neigh = matmul(agg, to_mat(p.tensors[3 * l + 1]));
    for (std::size_t u = 0; u < out.size(); ++u)
      for (std::size_t j = 0; j < out[u].size(); ++j) out[u][j] += neigh[u][j];
    add_bias_relu(out, to_mat(p.tensors[3 * l + 2]), layer.activation_after);
    h = std::move(out);
  }
  return h;
}

inline std::vector<std::vector<std::vector<std::uint32_t>>> full_neighbourhoods(
    const triage::simnet::GraphView& g, std::size_t depth) {
  return std::vector<std::vector<std::vector<std::uint32_t>>>(depth, adjacency(g));
}

// Largest |a - b| relative to max(1, |b|).
inline double max_rel_diff(const triage::ag::Tensor& a, const Mat& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      worst = std::max(worst, std::fabs(a.at(i, j) - b[i][j]) / std::max(1.0, std::fabs(b[i][j])));
  return worst;
}

}  // namespace oracle
