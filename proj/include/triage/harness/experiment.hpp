#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triage/harness/train.hpp"
#include "triage/ingest/dataset_io.hpp"
#include "triage/simnet/metric.hpp"

namespace triage::harness {

// One grid cell. model is a ModelSpec name, or "knn" / "svm" for the tabular
// baselines (which ignore metric and threshold).
struct CellSpec {
  std::string metric;
  double threshold = 0.0;
  std::string model;
  std::uint64_t seed = 0;

  bool tabular() const { return model == "knn" || model == "svm"; }
  std::string id() const;
};

struct ExperimentResult {
  CellSpec cell;
  std::string config_hash;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t isolated = 0;
  std::vector<double> train_loss;
  std::vector<double> eval_accuracy;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_eval_accuracy = 0.0;
  double test_accuracy = 0.0;
  Confusion confusion{};
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
  double wall_seconds = 0.0;  // kept out of result files
};

struct GridOptions {
  std::vector<CellSpec> cells;
  TrainConfig train;            // seed is replaced per cell
  std::optional<double> lr;     // overrides each model's default
  std::size_t fan_out = 10;
  std::size_t batch_size = 3000;
  std::size_t knn_k = 5;
  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 200;
  double svm_lr = 0.05;
  std::size_t workers = 0;      // 0 = hardware concurrency
  std::string output_dir;       // empty: nothing written, no resume
  bool save_checkpoints = false;
};

// Default grid: each metric's default threshold list, with gcn5 on
// cosine/Manhattan, gcn4 on Euclidean, gat2 and sage5 on all three, sage5 on
// Minkowski p=10 and p=4, plus both tabular baselines.
std::vector<CellSpec> default_grid(std::uint64_t seed);
std::vector<double> default_thresholds(const std::string& metric);

// Cells: sage5 and the eight ablation variants on cosine 0.95, per seed.
std::vector<CellSpec> ablation_grid(const std::vector<std::uint64_t>& seeds);

// Hash of everything that determines a cell's result.
std::string config_hash(const CellSpec& cell, const GridOptions& options,
                        const ingest::Dataset& data);

// Runs every cell. Cells whose result file exists with a matching hash are
// loaded instead of rerun. Failures are recorded and the run continues.
// Results come back in cell order; files are written when output_dir is set:
//   results.csv, results_long.csv, cells/<id>.json, timing.csv,
//   checkpoints/<id>.ckpt + graphs/<metric>_<threshold>.graph (optional).
std::vector<ExperimentResult> run_grid(const ingest::Dataset& data, const GridOptions& options);

// Ablation runner: the ablation_grid cells, returned with a per-variant
// median summary.
struct AblationSummary {
  std::string model;
  double median_test_accuracy = 0.0;
  std::vector<double> test_accuracies;  // seed order
};
std::vector<AblationSummary> summarize_ablation(const std::vector<ExperimentResult>& results);

// Result files.
std::string results_csv(const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> parse_results_csv(const std::string& text);
std::string results_long_csv(const std::vector<ExperimentResult>& results);
std::string result_json(const ExperimentResult& result);
ExperimentResult parse_result_json(const std::string& text);
void emit_results(const std::vector<ExperimentResult>& results, const std::string& dir);

}  // namespace triage::harness
