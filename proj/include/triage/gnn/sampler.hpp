#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "triage/autograd/sparse.hpp"
#include "triage/common/random.hpp"
#include "triage/gnn/spec.hpp"
#include "triage/simnet/view.hpp"

namespace triage::gnn {

// Neighbour sampling is stateless: the sample drawn for (node, layer) is a
// pure function of (seed, node, layer, neighbour list). Any subset of the
// graph therefore sees exactly the neighbourhoods the full graph would,
// which is what lets a receptive-field forward reproduce a full forward.
struct Sampling {
  std::size_t fan_out = 0;  // 0: keep every neighbour
  std::uint64_t seed = 0;
};

// Up to fan_out neighbours of u without replacement, ascending ids.
void sample_neighbors(const simnet::GraphView& view, std::size_t u, std::size_t layer,
                      const Sampling& sampling, std::vector<std::uint32_t>& scratch,
                      std::vector<std::uint32_t>& out);

// One layer of message passing from `num_src` source rows to the first
// `num_dst` of them (destination nodes are a prefix of the sources).
struct LayerBlock {
  std::size_t num_dst = 0;
  std::size_t num_src = 0;
  std::vector<std::uint32_t> src_nodes;  // global id of each source row
  // Rows are destinations, columns sources.
  //   gcn:      D^-1/2 (A+I) D^-1/2 restricted to the block, self entry first
  //   gatv2:    attention neighbourhood, self entry first
  //   sage max: sampled neighbours; sage mean: the same with 1/deg values
  // Shared between layers whose operators coincide (full-graph forwards).
  std::shared_ptr<const ag::SparseMatrix> op;
};

// Computation graph for a set of seed nodes: input_nodes[i] is the global id
// of input row i; blocks[l] maps layer l's inputs to its outputs; the last
// block's destinations are the seeds in the given order.
struct SampledBlock {
  std::vector<std::uint32_t> seeds;
  std::vector<std::uint32_t> input_nodes;
  std::vector<LayerBlock> blocks;

  std::size_t hops() const { return blocks.size(); }
};

// Builds the receptive field of `seeds` for `spec`. gcn/gatv2 layers use full
// neighbourhoods; sage layers use `sampling`. Seeds must be distinct.
SampledBlock build_block(const ModelSpec& spec, const simnet::GraphView& view,
                         const std::vector<std::uint32_t>& seeds, const Sampling& sampling);

// Shuffles the seeds and cuts them into batches of at most batch_size.
std::vector<std::vector<std::uint32_t>> make_batches(std::vector<std::uint32_t> seeds,
                                                     std::size_t batch_size, Rng& rng);

// Batches of sampled blocks covering `seeds`.
std::vector<SampledBlock> neighbor_sample(const ModelSpec& spec, const simnet::GraphView& view,
                                          std::vector<std::uint32_t> seeds,
                                          const Sampling& sampling, Rng& rng);

}  // namespace triage::gnn
