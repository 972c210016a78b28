#include "triage/harness/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "triage/common/error.hpp"

namespace triage::harness {
namespace {

using json = nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig c;
  try {
    const json j = json::parse(text);
    require(j.is_object(), ErrorCode::kParse, "run config must be a JSON object");
    static const char* const kKeys[] = {
        "dataset", "seed", "seeds", "metric", "thresholds", "models", "lr", "weight_decay",
        "epochs", "patience", "fan_out", "batch_size", "knn_k", "svm_lambda", "svm_epochs",
        "svm_lr", "workers", "output_dir"};
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for (const char* k : kKeys) known = known || key == k;
      require(known, ErrorCode::kParse, "unknown run config key '" + key + "'");
    }
    read(j, "dataset", c.dataset);
    read(j, "seed", c.seed);
    read(j, "seeds", c.seeds);
    read(j, "metric", c.metric);
    read(j, "thresholds", c.thresholds);
    read(j, "models", c.models);
    read(j, "lr", c.lr);
    read(j, "weight_decay", c.weight_decay);
    read(j, "epochs", c.epochs);
    read(j, "patience", c.patience);
    read(j, "fan_out", c.fan_out);
    read(j, "batch_size", c.batch_size);
    read(j, "knn_k", c.knn_k);
    read(j, "svm_lambda", c.svm_lambda);
    read(j, "svm_epochs", c.svm_epochs);
    read(j, "svm_lr", c.svm_lr);
    read(j, "workers", c.workers);
    read(j, "output_dir", c.output_dir);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open run config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["seeds"] = seeds;
  j["metric"] = metric;
  j["thresholds"] = thresholds;
  j["models"] = models;
  j["lr"] = lr ? json(*lr) : json(nullptr);
  j["weight_decay"] = weight_decay;
  j["epochs"] = epochs;
  j["patience"] = patience;
  j["fan_out"] = fan_out;
  j["batch_size"] = batch_size;
  j["knn_k"] = knn_k;
  j["svm_lambda"] = svm_lambda;
  j["svm_epochs"] = svm_epochs;
  j["svm_lr"] = svm_lr;
  j["workers"] = workers;
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  require(!lr || *lr > 0.0, ErrorCode::kInvalidArgument, "lr must be positive");
  require(weight_decay >= 0.0, ErrorCode::kInvalidArgument, "weight_decay must be >= 0");
  require(epochs >= 1, ErrorCode::kInvalidArgument, "epochs must be >= 1");
  require(patience >= 1, ErrorCode::kInvalidArgument, "patience must be >= 1");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  require(knn_k >= 1, ErrorCode::kInvalidArgument, "knn_k must be >= 1");
  require(svm_lambda >= 0.0 && svm_lr > 0.0 && svm_epochs >= 1, ErrorCode::kInvalidArgument,
          "invalid svm settings");
}

GridOptions RunConfig::grid_options(std::vector<CellSpec> cells) const {
  validate();
  GridOptions o;
  o.cells = std::move(cells);
  o.train.weight_decay = weight_decay;
  o.train.epochs = epochs;
  o.train.patience = patience;
  o.lr = lr;
  o.fan_out = fan_out;
  o.batch_size = batch_size;
  o.knn_k = knn_k;
  o.svm_lambda = svm_lambda;
  o.svm_epochs = svm_epochs;
  o.svm_lr = svm_lr;
  o.workers = workers;
  o.output_dir = output_dir;
  return o;
}

}  // namespace triage::harness
