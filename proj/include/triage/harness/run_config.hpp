#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triage/harness/experiment.hpp"

namespace triage::harness {

// Experiment settings shared by the CLI subcommands. Read from a JSON file
// whose keys are the field names below; command-line flags override.
struct RunConfig {
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;  // ablation; defaults to {seed, seed+1, seed+2}
  std::string metric = "cosine";
  // Empty: the metric's default list. For grids, a non-empty list keeps only
  // `metric` cells at these thresholds (tabular baselines always run).
  std::vector<double> thresholds;
  std::vector<std::string> models;   // grid filter; empty: all
  std::optional<double> lr;
  double weight_decay = 5e-4;
  std::size_t epochs = 200;
  std::size_t patience = 20;
  std::size_t fan_out = 10;
  std::size_t batch_size = 3000;
  std::size_t knn_k = 5;
  double svm_lambda = 1e-4;
  std::size_t svm_epochs = 200;
  double svm_lr = 0.05;
  std::size_t workers = 0;
  std::string output_dir;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string to_json_text() const;

  // Throws kInvalidArgument on out-of-range values.
  void validate() const;

  GridOptions grid_options(std::vector<CellSpec> cells) const;
};

}  // namespace triage::harness
