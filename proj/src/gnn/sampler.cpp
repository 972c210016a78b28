#include "triage/gnn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "triage/common/error.hpp"

namespace triage::gnn {
namespace {

// Counter-based stream: cheap to create per (node, layer).
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
    std::uint64_t x;
    do {
      x = mix64(state_ += 0x9e3779b97f4a7c15ULL);
    } while (x >= limit);
    return x % n;
  }

 private:
  std::uint64_t state_;
};

bool sampled_layer(const LayerSpec& l, const Sampling& s) {
  return l.kind == LayerKind::kSage && s.fan_out > 0;
}

// Operators of two layers coincide when both see full neighbourhoods and
// build the same kind of matrix.
bool same_operator(const LayerSpec& a, const LayerSpec& b, const Sampling& s) {
  if (sampled_layer(a, s) || sampled_layer(b, s) || a.kind != b.kind) return false;
  return a.kind != LayerKind::kSage || a.aggregator == b.aggregator;
}

}  // namespace

void sample_neighbors(const simnet::GraphView& view, std::size_t u, std::size_t layer,
                      const Sampling& sampling, std::vector<std::uint32_t>& scratch,
                      std::vector<std::uint32_t>& out) {
  view.neighbors(u, scratch);
  const std::size_t k = sampling.fan_out;
  if (k == 0 || scratch.size() <= k) {
    out.assign(scratch.begin(), scratch.end());
    return;
  }
  Stream stream(derive_seed(sampling.seed, (static_cast<std::uint64_t>(u) << 8) | layer));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + stream.index(scratch.size() - i);
    std::swap(scratch[i], scratch[j]);
  }
  out.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
}

SampledBlock build_block(const ModelSpec& spec, const simnet::GraphView& view,
                         const std::vector<std::uint32_t>& seeds, const Sampling& sampling) {
  require(!seeds.empty(), ErrorCode::kInvalidArgument, "empty seed set");
  require(!spec.layers.empty(), ErrorCode::kInvalidArgument, "model has no layers");
  const std::size_t n = view.num_nodes();
  const std::size_t depth = spec.layers.size();

  SampledBlock out;
  out.seeds = seeds;
  out.blocks.resize(depth);
  std::vector<std::int64_t> local(n, -1);
  std::vector<std::uint32_t> dst = seeds;
  std::vector<std::uint32_t> scratch, nb;

  for (std::size_t l = depth; l-- > 0;) {
    const LayerSpec& layer = spec.layers[l];
    LayerBlock& block = out.blocks[l];

    // Reuse the next layer's operator when this layer sees the same closed
    // node set (every source already a destination).
    if (l + 1 < depth) {
      const LayerBlock& next = out.blocks[l + 1];
      if (next.num_src == next.num_dst && next.src_nodes == dst &&
          same_operator(layer, spec.layers[l + 1], sampling)) {
        block = next;
        continue;
      }
    }

    std::vector<std::uint32_t> src = dst;
    for (std::size_t i = 0; i < dst.size(); ++i) {
      require(dst[i] < n, ErrorCode::kInvalidArgument, "seed id out of range");
      require(local[dst[i]] < 0, ErrorCode::kInvalidArgument,
              "duplicate seed " + std::to_string(dst[i]));
      local[dst[i]] = static_cast<std::int64_t>(i);
    }

    auto op = std::make_shared<ag::SparseMatrix>();
    op->rows = dst.size();
    op->offsets.reserve(dst.size() + 1);
    const bool self_entry = layer.kind != LayerKind::kSage;
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const std::uint32_t u = dst[i];
      if (layer.kind == LayerKind::kSage) {
        sample_neighbors(view, u, l, sampling, scratch, nb);
      } else {
        view.neighbors(u, nb);
      }
      const double du = static_cast<double>(view.degree(u) + 1);
      if (self_entry) {
        op->indices.push_back(static_cast<std::uint32_t>(i));
        op->values.push_back(layer.kind == LayerKind::kGcn ? 1.0 / du : 1.0);
      }
      for (std::uint32_t v : nb) {
        if (local[v] < 0) {
          local[v] = static_cast<std::int64_t>(src.size());
          src.push_back(v);
        }
        op->indices.push_back(static_cast<std::uint32_t>(local[v]));
        double w = 1.0;
        if (layer.kind == LayerKind::kGcn) {
          w = 1.0 / std::sqrt(du * static_cast<double>(view.degree(v) + 1));
        } else if (layer.kind == LayerKind::kSage && layer.aggregator == Aggregator::kMean) {
          w = 1.0 / static_cast<double>(nb.size());
        }
        op->values.push_back(w);
      }
      op->offsets.push_back(op->indices.size());
    }
    op->cols = src.size();
    for (std::uint32_t v : src) local[v] = -1;

    block.num_dst = dst.size();
    block.num_src = src.size();
    block.src_nodes = src;
    block.op = std::move(op);
    dst = std::move(src);
  }
  out.input_nodes = out.blocks.front().src_nodes;
  return out;
}

std::vector<std::vector<std::uint32_t>> make_batches(std::vector<std::uint32_t> seeds,
                                                     std::size_t batch_size, Rng& rng) {
  require(!seeds.empty(), ErrorCode::kInvalidArgument, "empty seed set");
  require(batch_size > 0, ErrorCode::kInvalidArgument, "batch size must be positive");
  rng.shuffle(seeds.begin(), seeds.end());
  std::vector<std::vector<std::uint32_t>> out;
  for (std::size_t b = 0; b < seeds.size(); b += batch_size) {
    const std::size_t e = std::min(seeds.size(), b + batch_size);
    out.emplace_back(seeds.begin() + static_cast<std::ptrdiff_t>(b),
                     seeds.begin() + static_cast<std::ptrdiff_t>(e));
  }
  return out;
}

std::vector<SampledBlock> neighbor_sample(const ModelSpec& spec, const simnet::GraphView& view,
                                          std::vector<std::uint32_t> seeds,
                                          const Sampling& sampling, Rng& rng) {
  std::vector<SampledBlock> out;
  for (auto& batch : make_batches(std::move(seeds), spec.batch_size, rng))
    out.push_back(build_block(spec, view, batch, sampling));
  return out;
}

}  // namespace triage::gnn
