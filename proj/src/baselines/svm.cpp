#include "triage/baselines/svm.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "triage/common/error.hpp"
#include "triage/common/random.hpp"

namespace triage::baselines {
namespace {

std::vector<std::uint32_t> selected_rows(std::size_t n, const std::vector<std::uint8_t>& mask) {
  require(mask.empty() || mask.size() == n, ErrorCode::kShapeMismatch,
          "mask does not match feature rows");
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < n; ++i)
    if (mask.empty() || mask[i] != 0) rows.push_back(static_cast<std::uint32_t>(i));
  return rows;
}

double score(const LinearSvmModel& m, std::size_t c, const double* x) {
  double s = m.bias[c];
  const double* w = m.weights.row(c);
  for (std::size_t j = 0; j < m.weights.cols; ++j) s += w[j] * x[j];
  return s;
}

}  // namespace

double svm_objective(const LinearSvmModel& model, const ingest::FeatureMatrix& x,
                     const ingest::LabelVector& y, const std::vector<std::uint8_t>& mask) {
  const auto rows = selected_rows(x.n, mask);
  require(!rows.empty(), ErrorCode::kInvalidArgument, "objective over no rows");
  double reg = 0.0;
  for (double w : model.weights.values) reg += w * w;
  double hinge = 0.0;
  for (std::uint32_t i : rows)
    for (std::size_t c = 0; c < model.weights.rows; ++c) {
      const double yc = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - yc * score(model, c, x.row(i)));
    }
  return 0.5 * model.config.lambda * reg + hinge / static_cast<double>(rows.size());
}

LinearSvmModel svm_train(const ingest::FeatureMatrix& x, const ingest::LabelVector& y,
                         std::size_t classes, const SvmConfig& config,
                         const std::vector<std::uint8_t>& mask) {
  require(y.size() == x.n, ErrorCode::kShapeMismatch, "labels do not match feature rows");
  require(classes >= 2, ErrorCode::kInvalidArgument, "need at least two classes");
  require(config.batch_size > 0 && config.epochs > 0 && config.lr >= 0.0 && config.lambda >= 0.0,
          ErrorCode::kInvalidArgument, "invalid svm configuration");
  std::vector<std::uint32_t> rows = selected_rows(x.n, mask);
  require(!rows.empty(), ErrorCode::kInvalidArgument, "svm trained on no rows");
  for (std::uint32_t i : rows)
    require(y[i] >= 0 && static_cast<std::size_t>(y[i]) < classes, ErrorCode::kInvalidArgument,
            "label out of range at row " + std::to_string(i));

  LinearSvmModel m;
  m.config = config;
  m.weights = ag::Tensor(classes, x.d);
  m.bias.assign(classes, 0.0);
  Rng rng(derive_seed(config.seed, 0x5e3));
  ag::Tensor gw(classes, x.d);
  std::vector<double> gb(classes);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // Diminishing subgradient step lr / sqrt(epoch + 1).
    const double step = config.lr / std::sqrt(static_cast<double>(epoch + 1));
    rng.shuffle(rows.begin(), rows.end());
    for (std::size_t start = 0; start < rows.size(); start += config.batch_size) {
      const std::size_t end = std::min(rows.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t j = 0; j < x.d; ++j) gw.at(c, j) = config.lambda * m.weights.at(c, j);
        gb[c] = 0.0;
      }
      for (std::size_t r = start; r < end; ++r) {
        const std::uint32_t i = rows[r];
        const double* xi = x.row(i);
        for (std::size_t c = 0; c < classes; ++c) {
          const double yc = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
          if (yc * score(m, c, xi) >= 1.0) continue;
          for (std::size_t j = 0; j < x.d; ++j) gw.at(c, j) -= inv * yc * xi[j];
          gb[c] -= inv * yc;
        }
      }
      for (std::size_t k = 0; k < gw.size(); ++k) m.weights.values[k] -= step * gw.values[k];
      for (std::size_t c = 0; c < classes; ++c) m.bias[c] -= step * gb[c];
    }
    const double obj = svm_objective(m, x, y, mask);
    require(std::isfinite(obj), ErrorCode::kNonFinite,
            "svm objective diverged at epoch " + std::to_string(epoch + 1));
    m.objective_history.push_back(obj);
  }
  return m;
}

ingest::LabelVector svm_predict(const LinearSvmModel& model, const ingest::FeatureMatrix& x) {
  require(x.d == model.weights.cols, ErrorCode::kShapeMismatch, "feature dimension mismatch");
  ingest::LabelVector out(x.n);
  for (std::size_t i = 0; i < x.n; ++i) {
    std::size_t best = 0;
    double best_score = score(model, 0, x.row(i));
    for (std::size_t c = 1; c < model.weights.rows; ++c) {
      const double s = score(model, c, x.row(i));
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace triage::baselines
