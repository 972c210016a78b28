#pragma once

#include <cstdint>
#include <vector>

#include "triage/autograd/ops.hpp"
#include "triage/gnn/params.hpp"
#include "triage/gnn/sampler.hpp"
#include "triage/simnet/graph.hpp"

namespace triage::gnn {

// Individual layers over one block. x has block.num_src rows.
ag::Var gcn_layer(const LayerBlock& block, const ag::Var& x, const ag::Var& w, const ag::Var& b);
ag::Var gatv2_layer(const LayerSpec& layer, const LayerBlock& block, const ag::Var& x,
                    const ag::Var& w_src, const ag::Var& w_dst, const ag::Var& att,
                    const ag::Var& b, std::vector<double>* alpha_out = nullptr);
ag::Var sage_layer(const LayerSpec& layer, const LayerBlock& block, const ag::Var& x,
                   const ag::Var& w_self, const ag::Var& w_neigh, const ag::Var& b);

// Registers parameters on the tape: trainable when the tape is training.
std::vector<ag::Var> bind_params(ag::Tape& tape, const ParamSet& params, bool trainable);

// Logits (seeds x classes) for the block. `x` holds input_nodes' features.
// `rng` drives dropout and is only read on a training tape.
ag::Var model_forward(const ModelSpec& spec, const std::vector<ag::Var>& params,
                      const SampledBlock& block, const ag::Var& x, Rng* rng);

// Feature rows of block.input_nodes.
ag::Tensor gather_features(const simnet::GraphView& view, const std::vector<std::uint32_t>& nodes);

// Eval-mode logits for `nodes` (all nodes when empty).
ag::Tensor predict_logits(const ModelSpec& spec, const ParamSet& params,
                          const simnet::GraphView& view, const Sampling& sampling,
                          std::vector<std::uint32_t> nodes = {});

// log_softmax of predict_logits.
ag::Tensor predict_log_proba(const ModelSpec& spec, const ParamSet& params,
                             const simnet::GraphView& view, const Sampling& sampling,
                             std::vector<std::uint32_t> nodes = {});

}  // namespace triage::gnn
