#include "triage/gnn/model.hpp"

#include <numeric>
#include <string>

#include "triage/common/error.hpp"

namespace triage::gnn {
namespace {

constexpr double kAttentionSlope = 0.2;

ag::Var destination_rows(const ag::Var& x, std::size_t num_dst) {
  if (num_dst == x.rows()) return x;
  std::vector<std::uint32_t> rows(num_dst);
  std::iota(rows.begin(), rows.end(), 0u);
  return ag::slice_rows(x, rows);
}

void check_block(const LayerBlock& block, const ag::Var& x) {
  require(block.op != nullptr && x.rows() == block.num_src, ErrorCode::kShapeMismatch,
          "layer input has " + std::to_string(x.rows()) + " rows, block expects " +
              std::to_string(block.num_src));
}

}  // namespace

ag::Var gcn_layer(const LayerBlock& block, const ag::Var& x, const ag::Var& w, const ag::Var& b) {
  check_block(block, x);
  return ag::add_bias(ag::spmm(*block.op, ag::matmul(x, w)), b);
}

ag::Var gatv2_layer(const LayerSpec& layer, const LayerBlock& block, const ag::Var& x,
                    const ag::Var& w_src, const ag::Var& w_dst, const ag::Var& att,
                    const ag::Var& b, std::vector<double>* alpha_out) {
  check_block(block, x);
  const ag::Var xs = ag::matmul(x, w_src);
  const ag::Var xd = ag::matmul(destination_rows(x, block.num_dst), w_dst);
  ag::Var h = ag::gatv2_attention(*block.op, xs, xd, att, layer.heads, kAttentionSlope, alpha_out);
  if (!layer.concat_heads && layer.heads > 1) h = ag::mean_column_blocks(h, layer.heads);
  return ag::add_bias(h, b);
}

ag::Var sage_layer(const LayerSpec& layer, const LayerBlock& block, const ag::Var& x,
                   const ag::Var& w_self, const ag::Var& w_neigh, const ag::Var& b) {
  check_block(block, x);
  const ag::Var self = ag::matmul(destination_rows(x, block.num_dst), w_self);
  const ag::Var agg = layer.aggregator == Aggregator::kMax ? ag::segment_max(*block.op, x)
                                                           : ag::spmm(*block.op, x);
  return ag::add_bias(ag::add(self, ag::matmul(agg, w_neigh)), b);
}

std::vector<ag::Var> bind_params(ag::Tape& tape, const ParamSet& params, bool trainable) {
  std::vector<ag::Var> out;
  out.reserve(params.tensors.size());
  for (const auto& t : params.tensors)
    out.push_back(trainable ? tape.parameter(t) : tape.constant(t));
  return out;
}

ag::Var model_forward(const ModelSpec& spec, const std::vector<ag::Var>& params,
                      const SampledBlock& block, const ag::Var& x, Rng* rng) {
  require(block.blocks.size() == spec.layers.size(), ErrorCode::kShapeMismatch,
          "block depth does not match model depth");
  const bool training = x.tape()->training();
  require(!training || rng != nullptr, ErrorCode::kInvalidArgument,
          "training forward needs a dropout rng");
  ag::Var h = x;
  if (spec.input_dropout && training) h = ag::dropout(h, spec.dropout_rate, *rng);
  std::size_t p = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& layer = spec.layers[l];
    const LayerBlock& lb = block.blocks[l];
    require(p + params_per_layer(layer.kind) <= params.size(), ErrorCode::kShapeMismatch,
            "parameter list too short for " + spec.name);
    switch (layer.kind) {
      case LayerKind::kGcn:
        h = gcn_layer(lb, h, params[p], params[p + 1]);
        break;
      case LayerKind::kGatv2:
        h = gatv2_layer(layer, lb, h, params[p], params[p + 1], params[p + 2], params[p + 3]);
        break;
      case LayerKind::kSage:
        h = sage_layer(layer, lb, h, params[p], params[p + 1], params[p + 2]);
        break;
    }
    p += params_per_layer(layer.kind);
    if (layer.activation_after) h = ag::relu(h);
    if (layer.dropout_after && training) h = ag::dropout(h, spec.dropout_rate, *rng);
  }
  require(p == params.size(), ErrorCode::kShapeMismatch, "parameter list too long for " + spec.name);
  return h;
}

ag::Tensor gather_features(const simnet::GraphView& view, const std::vector<std::uint32_t>& nodes) {
  const std::size_t d = view.feature_dim();
  ag::Tensor x(nodes.size(), d);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double* f = view.features(nodes[i]);
    std::copy(f, f + d, x.row(i));
  }
  return x;
}

ag::Tensor predict_logits(const ModelSpec& spec, const ParamSet& params,
                          const simnet::GraphView& view, const Sampling& sampling,
                          std::vector<std::uint32_t> nodes) {
  if (nodes.empty()) {
    nodes.resize(view.num_nodes());
    std::iota(nodes.begin(), nodes.end(), 0u);
  }
  const SampledBlock block = build_block(spec, view, nodes, sampling);
  ag::Tape tape(false);
  const auto vars = bind_params(tape, params, false);
  const ag::Var x = tape.constant(gather_features(view, block.input_nodes));
  return model_forward(spec, vars, block, x, nullptr).value();
}

ag::Tensor predict_log_proba(const ModelSpec& spec, const ParamSet& params,
                             const simnet::GraphView& view, const Sampling& sampling,
                             std::vector<std::uint32_t> nodes) {
  ag::Tape tape(false);
  const ag::Var logits =
      tape.constant(predict_logits(spec, params, view, sampling, std::move(nodes)));
  return ag::log_softmax(logits).value();
}

}  // namespace triage::gnn
