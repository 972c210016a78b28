#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "triage/gnn/model.hpp"
#include "triage/ingest/schema.hpp"
#include "triage/simnet/graph.hpp"

namespace triage::harness {

using Confusion = std::array<std::array<std::size_t, ingest::kClassCount>, ingest::kClassCount>;

struct Evaluation {
  double accuracy = 0.0;
  std::size_t total = 0;
  Confusion confusion{};  // [true][predicted]
};

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 0;
};

struct TrainOutcome {
  gnn::ParamSet params;  // best-on-eval parameters
  gnn::Sampling eval_sampling;
  std::vector<double> train_loss;     // per epoch
  std::vector<double> eval_accuracy;  // per epoch
  std::size_t best_epoch = 0;         // 1-based
  double best_eval_accuracy = 0.0;
  Evaluation test;
};

// Tally of predictions over rows with mask[i] != 0.
Evaluation score_predictions(const ingest::LabelVector& predicted,
                             const ingest::LabelVector& truth,
                             const std::vector<std::uint8_t>& mask);

ingest::LabelVector argmax_rows(const ag::Tensor& scores);

// Eval-mode forward over the whole graph, scored on `mask`.
Evaluation evaluate(const gnn::ModelSpec& spec, const gnn::ParamSet& params,
                    const simnet::PatientGraph& g, const std::vector<std::uint8_t>& mask,
                    const gnn::Sampling& sampling);

// Sampling used at evaluation and serving time for a model trained with
// `seed`: fixed per seed so evaluation is repeatable.
gnn::Sampling eval_sampling(const gnn::ModelSpec& spec, std::uint64_t seed);

// Cross-entropy on the train mask, Adam with coupled weight decay, eval
// accuracy checked every epoch, early stop after `patience` epochs without
// improvement. GraphSAGE trains on neighbour-sampled minibatches.
TrainOutcome train_model(const simnet::PatientGraph& g, const gnn::ModelSpec& spec,
                         const TrainConfig& config);

}  // namespace triage::harness
