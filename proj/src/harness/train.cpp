#include "triage/harness/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "triage/autograd/adam.hpp"
#include "triage/common/error.hpp"
#include "triage/harness/split.hpp"

namespace triage::harness {
namespace {

std::vector<ag::Tensor> collect_grads(const std::vector<ag::Var>& vars) {
  std::vector<ag::Tensor> grads;
  grads.reserve(vars.size());
  for (const auto& v : vars) grads.push_back(v.grad());
  return grads;
}

std::vector<std::uint32_t> all_nodes(std::size_t n) {
  std::vector<std::uint32_t> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 0u);
  return nodes;
}

double checked_loss(const ag::Var& loss, std::size_t epoch) {
  const double v = loss.value().values[0];
  require(std::isfinite(v), ErrorCode::kNonFinite,
          "training loss diverged at epoch " + std::to_string(epoch));
  return v;
}

}  // namespace

Evaluation score_predictions(const ingest::LabelVector& predicted,
                             const ingest::LabelVector& truth,
                             const std::vector<std::uint8_t>& mask) {
  require(predicted.size() == truth.size() && mask.size() == truth.size(),
          ErrorCode::kShapeMismatch, "prediction, label and mask sizes differ");
  Evaluation e;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask[i] == 0) continue;
    const int t = truth[i], p = predicted[i];
    require(t >= 0 && t < static_cast<int>(ingest::kClassCount) && p >= 0 &&
                p < static_cast<int>(ingest::kClassCount),
            ErrorCode::kInvalidArgument, "class index out of range");
    ++e.confusion[t][p];
    ++e.total;
    if (t == p) ++correct;
  }
  e.accuracy = e.total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(e.total);
  return e;
}

ingest::LabelVector argmax_rows(const ag::Tensor& scores) {
  ingest::LabelVector out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < scores.cols; ++j)
      if (scores.at(i, j) > scores.at(i, best)) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

gnn::Sampling eval_sampling(const gnn::ModelSpec& spec, std::uint64_t seed) {
  if (!spec.uses_sampling()) return {};
  return {spec.fan_out, derive_seed(seed, 0xe7a1)};
}

Evaluation evaluate(const gnn::ModelSpec& spec, const gnn::ParamSet& params,
                    const simnet::PatientGraph& g, const std::vector<std::uint8_t>& mask,
                    const gnn::Sampling& sampling) {
  const simnet::FullGraphView view(g);
  const ag::Tensor logits = gnn::predict_logits(spec, params, view, sampling);
  return score_predictions(argmax_rows(logits), g.labels, mask);
}

TrainOutcome train_model(const simnet::PatientGraph& g, const gnn::ModelSpec& spec,
                         const TrainConfig& config) {
  gnn::validate(spec, g.features.d, ingest::kClassCount);
  check_masks(g.masks, g.n);
  require(config.lr >= 0.0, ErrorCode::kInvalidArgument, "learning rate must be non-negative");
  require(config.epochs >= 1, ErrorCode::kInvalidArgument, "need at least one epoch");

  const simnet::FullGraphView view(g);
  TrainOutcome out;
  out.params = gnn::init_params(spec, derive_seed(config.seed, 1));
  out.eval_sampling = eval_sampling(spec, config.seed);
  ag::AdamState adam;
  adam.config.lr = config.lr;
  adam.config.weight_decay = config.weight_decay;
  Rng rng(derive_seed(config.seed, 2));

  std::vector<std::uint32_t> train_nodes;
  for (std::size_t i = 0; i < g.n; ++i)
    if (g.masks.train[i] != 0) train_nodes.push_back(static_cast<std::uint32_t>(i));
  require(!train_nodes.empty(), ErrorCode::kInvalidArgument, "empty train mask");

  // Evaluation runs on one fixed block; full-batch training reuses it.
  const gnn::SampledBlock eval_block = gnn::build_block(spec, view, all_nodes(g.n), out.eval_sampling);
  const ag::Tensor eval_x = gnn::gather_features(view, eval_block.input_nodes);
  auto eval_accuracy = [&](const gnn::ParamSet& params, const std::vector<std::uint8_t>& mask) {
    ag::Tape tape(false);
    const auto vars = gnn::bind_params(tape, params, false);
    const ag::Var logits =
        gnn::model_forward(spec, vars, eval_block, tape.constant(eval_x), nullptr);
    return score_predictions(argmax_rows(logits.value()), g.labels, mask);
  };

  gnn::ParamSet best = out.params;
  double best_acc = -1.0;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    if (!spec.uses_sampling()) {
      ag::Tape tape(true);
      const auto vars = gnn::bind_params(tape, out.params, true);
      const ag::Var logits =
          gnn::model_forward(spec, vars, eval_block, tape.constant(eval_x), &rng);
      const ag::Var loss = ag::cross_entropy(logits, g.labels, g.masks.train);
      epoch_loss = checked_loss(loss, epoch);
      tape.backward(loss);
      ag::adam_step(out.params.tensors, collect_grads(vars), adam);
    } else {
      const gnn::Sampling sampling{spec.fan_out, derive_seed(config.seed, 1000 + epoch)};
      for (const auto& batch : gnn::make_batches(train_nodes, spec.batch_size, rng)) {
        const gnn::SampledBlock block = gnn::build_block(spec, view, batch, sampling);
        ag::Tape tape(true);
        const auto vars = gnn::bind_params(tape, out.params, true);
        const ag::Var x = tape.constant(gnn::gather_features(view, block.input_nodes));
        const ag::Var logits = gnn::model_forward(spec, vars, block, x, &rng);
        ingest::LabelVector targets(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = g.labels[batch[i]];
        const ag::Var loss =
            ag::cross_entropy(logits, targets, std::vector<std::uint8_t>(batch.size(), 1));
        epoch_loss += checked_loss(loss, epoch) * static_cast<double>(batch.size());
        tape.backward(loss);
        ag::adam_step(out.params.tensors, collect_grads(vars), adam);
      }
      epoch_loss /= static_cast<double>(train_nodes.size());
    }
    out.train_loss.push_back(epoch_loss);

    const double acc = eval_accuracy(out.params, g.masks.eval).accuracy;
    out.eval_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = out.params;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  out.params = std::move(best);
  out.best_eval_accuracy = best_acc;
  out.test = eval_accuracy(out.params, g.masks.test);
  return out;
}

}  // namespace triage::harness
