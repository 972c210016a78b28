#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "triage/autograd/tensor.hpp"
#include "triage/ingest/preprocess.hpp"

namespace triage::baselines {

struct SvmConfig {
  double lambda = 1e-4;
  std::size_t epochs = 200;
  double lr = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// One-vs-rest linear SVM: class c scores w_c . x + b_c.
struct LinearSvmModel {
  ag::Tensor weights;  // classes x d
  std::vector<double> bias;
  SvmConfig config;
  std::vector<double> objective_history;  // full-batch objective after each epoch
};

// Minimizes lambda/2 |W|^2 + mean_i sum_c max(0, 1 - y_ic (w_c . x_i + b_c)),
// y_ic = +1 for the true class and -1 otherwise, by mini-batch subgradient
// descent with step lr / sqrt(epoch), epochs counted from 1. Rows with
// mask[i] == 0 are ignored (none when mask is empty). Throws kNonFinite if
// the objective diverges.
LinearSvmModel svm_train(const ingest::FeatureMatrix& x, const ingest::LabelVector& y,
                         std::size_t classes, const SvmConfig& config,
                         const std::vector<std::uint8_t>& mask = {});

ingest::LabelVector svm_predict(const LinearSvmModel& model, const ingest::FeatureMatrix& x);

double svm_objective(const LinearSvmModel& model, const ingest::FeatureMatrix& x,
                     const ingest::LabelVector& y, const std::vector<std::uint8_t>& mask = {});

}  // namespace triage::baselines
