#include "triage/harness/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "triage/baselines/knn.hpp"
#include "triage/baselines/svm.hpp"
#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"
#include "triage/common/hash.hpp"
#include "triage/common/parallel.hpp"
#include "triage/gnn/spec.hpp"
#include "triage/harness/split.hpp"
#include "triage/serve/checkpoint.hpp"
#include "triage/simnet/builder.hpp"
#include "triage/simnet/graph_io.hpp"

namespace triage::harness {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Shortest representation that parses back to the same double.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_num(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorCode::kParse,
          "bad number in results: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc{} && res.ptr == s.data() + s.size(), ErrorCode::kParse,
          "bad integer in results: '" + s + "'");
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  require(!quoted, ErrorCode::kParse, "unterminated quote in results CSV");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string confusion_text(const Confusion& c) {
  std::string s;
  for (const auto& row : c)
    for (std::size_t v : row) s += (s.empty() ? "" : " ") + std::to_string(v);
  return s;
}

Confusion parse_confusion(const std::string& s) {
  Confusion c{};
  std::istringstream in(s);
  for (auto& row : c)
    for (auto& v : row) require(static_cast<bool>(in >> v), ErrorCode::kParse, "bad confusion matrix");
  return c;
}

std::string cell_key(const CellSpec& c) {
  if (c.tabular()) return "model=" + c.model;
  return "metric=" + c.metric + ";threshold=" + num(c.threshold) + ";model=" + c.model;
}

std::uint64_t cell_seed(const CellSpec& c) { return derive_seed(c.seed, fnv1a(cell_key(c))); }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t dataset_fingerprint(const ingest::Dataset& data) {
  std::uint64_t h = fnv1a(std::as_bytes(std::span(data.features.values)));
  h = fnv1a(std::as_bytes(std::span(data.labels)), h);
  return h;
}

gnn::ModelSpec resolve_spec(const CellSpec& cell, const GridOptions& o) {
  gnn::ModelSpec spec = gnn::model_spec(cell.model);
  spec.fan_out = o.fan_out;
  spec.batch_size = o.batch_size;
  if (o.lr) spec.lr = *o.lr;
  return spec;
}

std::string graph_name(const CellSpec& c) {
  return c.metric + "-t" + num(c.threshold) + "-s" + std::to_string(c.seed);
}

void run_tabular(const ingest::Dataset& data, const simnet::SplitMasks& masks,
                 const GridOptions& o, ExperimentResult& r) {
  ingest::LabelVector predicted;
  if (r.cell.model == "knn") {
    const auto model = baselines::knn_fit(data.features, data.labels, o.knn_k,
                                          simnet::SimilarityMetric::euclidean(), masks.train);
    predicted = baselines::knn_predict(model, data.features);
    r.epochs_run = 1;
  } else {
    baselines::SvmConfig cfg;
    cfg.lambda = o.svm_lambda;
    cfg.epochs = o.svm_epochs;
    cfg.lr = o.svm_lr;
    cfg.seed = cell_seed(r.cell);
    const auto model = baselines::svm_train(data.features, data.labels, ingest::kClassCount, cfg,
                                            masks.train);
    predicted = baselines::svm_predict(model, data.features);
    r.train_loss = model.objective_history;
    r.epochs_run = cfg.epochs;
  }
  r.best_epoch = r.epochs_run;
  r.best_eval_accuracy = score_predictions(predicted, data.labels, masks.eval).accuracy;
  r.eval_accuracy = {r.best_eval_accuracy};
  const Evaluation test = score_predictions(predicted, data.labels, masks.test);
  r.test_accuracy = test.accuracy;
  r.confusion = test.confusion;
}

void write_cell(const std::string& dir, const ExperimentResult& r) {
  if (dir.empty()) return;
  write_file_atomic((fs::path(dir) / "cells" / (r.cell.id() + ".json")).string(), result_json(r));
}

std::optional<ExperimentResult> load_cell(const std::string& dir, const CellSpec& cell,
                                          const std::string& hash) {
  if (dir.empty()) return std::nullopt;
  const fs::path path = fs::path(dir) / "cells" / (cell.id() + ".json");
  if (!fs::exists(path)) return std::nullopt;
  try {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentResult r = parse_result_json(ss.str());
    if (r.config_hash != hash || r.status != "ok") return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string CellSpec::id() const {
  std::string s = tabular() ? model : metric + "-t" + num(threshold) + "-" + model;
  return s + "-s" + std::to_string(seed);
}

std::vector<double> default_thresholds(const std::string& metric) {
  if (metric == "cosine") return {0.98, 0.95, 0.94, 0.92, 0.90};
  if (metric == "euclidean") return {0.20, 0.23, 0.25, 0.28, 0.31, 0.38};
  if (metric == "manhattan") return {0.10, 0.13, 0.22, 0.31, 0.33};
  if (metric == "minkowski10") return {0.20, 0.25, 0.30, 0.35, 0.40};
  if (metric == "minkowski4") return {0.20, 0.25};
  fail(ErrorCode::kInvalidArgument, "no default thresholds for metric " + metric);
}

std::vector<CellSpec> default_grid(std::uint64_t seed) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> plan = {
      {"cosine", {"gcn5", "gat2", "sage5"}},
      {"euclidean", {"gcn4", "gat2", "sage5"}},
      {"manhattan", {"gcn5", "gat2", "sage5"}},
      {"minkowski10", {"sage5"}},
      {"minkowski4", {"sage5"}},
  };
  std::vector<CellSpec> cells;
  for (const auto& [metric, models] : plan)
    for (double t : default_thresholds(metric))
      for (const auto& m : models) cells.push_back({metric, t, m, seed});
  cells.push_back({"", 0.0, "knn", seed});
  cells.push_back({"", 0.0, "svm", seed});
  return cells;
}

std::vector<CellSpec> ablation_grid(const std::vector<std::uint64_t>& seeds) {
  std::vector<std::string> models = {"sage5"};
  for (const auto& v : gnn::ablation_variants()) models.push_back(v.name);
  std::vector<CellSpec> cells;
  for (std::uint64_t s : seeds)
    for (const auto& m : models) cells.push_back({"cosine", 0.95, m, s});
  return cells;
}

std::string config_hash(const CellSpec& cell, const GridOptions& o, const ingest::Dataset& data) {
  std::string text = cell.id() + "|" + cell_key(cell) + "|data=" + hex(dataset_fingerprint(data));
  if (cell.tabular()) {
    text += cell.model == "knn" ? "|k=" + std::to_string(o.knn_k)
                                : "|lambda=" + num(o.svm_lambda) + ";epochs=" +
                                      std::to_string(o.svm_epochs) + ";lr=" + num(o.svm_lr);
  } else {
    const auto spec = resolve_spec(cell, o);
    text += "|" + gnn::describe(spec) + "|lr=" + num(spec.lr) + ";wd=" +
            num(o.train.weight_decay) + ";epochs=" + std::to_string(o.train.epochs) +
            ";patience=" + std::to_string(o.train.patience) + ";dropout=" +
            num(spec.dropout_rate) + ";fan_out=" + std::to_string(spec.fan_out) +
            ";batch=" + std::to_string(spec.batch_size);
  }
  return hex(fnv1a(text));
}

std::vector<ExperimentResult> run_grid(const ingest::Dataset& data, const GridOptions& o) {
  const std::size_t workers = o.workers == 0 ? default_workers() : o.workers;
  const auto& cells = o.cells;
  std::vector<ExperimentResult> results(cells.size());
  std::vector<bool> done(cells.size(), false);
  std::map<std::uint64_t, simnet::SplitMasks> masks;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    results[i].cell = cells[i];
    results[i].nodes = data.features.n;
    try {
      results[i].config_hash = config_hash(cells[i], o, data);
    } catch (const std::exception& e) {
      results[i].status = "failed";
      results[i].error = e.what();
      done[i] = true;
      write_cell(o.output_dir, results[i]);
      continue;
    }
    if (auto loaded = load_cell(o.output_dir, cells[i], results[i].config_hash)) {
      results[i] = *loaded;
      done[i] = true;
    }
    if (!masks.count(cells[i].seed)) masks[cells[i].seed] = split_masks(data.labels, cells[i].seed);
  }

  auto run_cell = [&](std::size_t i, const simnet::PatientGraph* g) {
    ExperimentResult& r = results[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (r.cell.tabular()) {
        run_tabular(data, masks.at(r.cell.seed), o, r);
      } else {
        const auto spec = resolve_spec(r.cell, o);
        TrainConfig tc = o.train;
        tc.lr = spec.lr;
        tc.seed = cell_seed(r.cell);
        const TrainOutcome out = train_model(*g, spec, tc);
        r.train_loss = out.train_loss;
        r.eval_accuracy = out.eval_accuracy;
        r.epochs_run = out.train_loss.size();
        r.best_epoch = out.best_epoch;
        r.best_eval_accuracy = out.best_eval_accuracy;
        r.test_accuracy = out.test.accuracy;
        r.confusion = out.test.confusion;
        if (o.save_checkpoints && !o.output_dir.empty()) {
          serve::Checkpoint ck;
          ck.spec = spec;
          ck.params = out.params;
          ck.column_mins = data.features.column_mins;
          ck.column_maxs = data.features.column_maxs;
          ck.encoders = data.encoders;
          ck.metric = g->stats.metric;
          ck.threshold = g->stats.threshold;
          ck.graph_file = "../graphs/" + graph_name(r.cell) + ".graph";
          ck.config_hash = r.config_hash;
          ck.seed = tc.seed;
          ck.sampling = out.eval_sampling;
          serve::save_checkpoint(
              (fs::path(o.output_dir) / "checkpoints" / (r.cell.id() + ".ckpt")).string(), ck);
        }
      }
      r.status = "ok";
      r.error.clear();
    } catch (const std::exception& e) {
      r.status = "failed";
      r.error = e.what();
    }
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_cell(o.output_dir, r);
  };

  // Tabular cells first, then one graph at a time with its cells in parallel.
  std::vector<std::size_t> tabular;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) continue;
    if (cells[i].tabular()) {
      tabular.push_back(i);
      continue;
    }
    const std::string key = graph_name(cells[i]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {i}});
    } else {
      it->second.push_back(i);
    }
  }
  parallel_for(tabular.size(), workers, [&](std::size_t k) { run_cell(tabular[k], nullptr); });

  for (const auto& [key, members] : groups) {
    const CellSpec& first = cells[members.front()];
    simnet::PatientGraph g;
    try {
      const auto metric = simnet::SimilarityMetric::parse(first.metric);
      simnet::BuildOptions bo;
      bo.workers = workers;
      g = simnet::build_graph(data.features, data.labels, metric, first.threshold, bo);
      g.masks = masks.at(first.seed);
      if (o.save_checkpoints && !o.output_dir.empty())
        simnet::save_graph((fs::path(o.output_dir) / "graphs" / (key + ".graph")).string(), g);
    } catch (const std::exception& e) {
      for (std::size_t i : members) {
        results[i].status = "failed";
        results[i].error = e.what();
        write_cell(o.output_dir, results[i]);
      }
      continue;
    }
    for (std::size_t i : members) {
      results[i].edges = g.stats.edge_count;
      results[i].isolated = g.stats.isolated_node_count;
    }
    parallel_for(members.size(), workers, [&](std::size_t k) { run_cell(members[k], &g); });
  }

  if (!o.output_dir.empty()) emit_results(results, o.output_dir);
  return results;
}

std::vector<AblationSummary> summarize_ablation(const std::vector<ExperimentResult>& results) {
  std::vector<AblationSummary> out;
  for (const auto& r : results) {
    if (r.status != "ok") continue;
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const AblationSummary& s) { return s.model == r.cell.model; });
    if (it == out.end()) {
      out.push_back({r.cell.model, 0.0, {}});
      it = out.end() - 1;
    }
    it->test_accuracies.push_back(r.test_accuracy);
  }
  for (auto& s : out) {
    std::vector<double> v = s.test_accuracies;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    s.median_test_accuracy = v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  return out;
}

namespace {
constexpr const char* kResultsHeader =
    "cell_id,metric,threshold,model,seed,config_hash,status,nodes,edges,isolated,epochs_run,"
    "best_epoch,best_eval_accuracy,test_accuracy,confusion,error";
}

std::string results_csv(const std::vector<ExperimentResult>& results) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : results) {
    const auto& c = r.cell;
    out += csv_field(c.id()) + "," + csv_field(c.metric) + "," + num(c.threshold) + "," +
           csv_field(c.model) + "," + std::to_string(c.seed) + "," + r.config_hash + "," +
           r.status + "," + std::to_string(r.nodes) + "," + std::to_string(r.edges) + "," +
           std::to_string(r.isolated) + "," + std::to_string(r.epochs_run) + "," +
           std::to_string(r.best_epoch) + "," + num(r.best_eval_accuracy) + "," +
           num(r.test_accuracy) + "," + confusion_text(r.confusion) + "," + csv_field(r.error) +
           "\n";
  }
  return out;
}

std::vector<ExperimentResult> parse_results_csv(const std::string& text) {
  const auto rows = split_csv(text);
  require(!rows.empty(), ErrorCode::kParse, "empty results file");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  require(header == kResultsHeader, ErrorCode::kSchema, "unexpected results header");
  std::vector<ExperimentResult> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    require(f.size() == 16, ErrorCode::kArity, "results row " + std::to_string(i) + " has " +
                                                   std::to_string(f.size()) + " fields");
    ExperimentResult r;
    r.cell.metric = f[1];
    r.cell.threshold = parse_num(f[2]);
    r.cell.model = f[3];
    r.cell.seed = parse_u64(f[4]);
    require(r.cell.id() == f[0], ErrorCode::kParse, "cell id mismatch in row " + std::to_string(i));
    r.config_hash = f[5];
    r.status = f[6];
    r.nodes = parse_u64(f[7]);
    r.edges = parse_u64(f[8]);
    r.isolated = parse_u64(f[9]);
    r.epochs_run = parse_u64(f[10]);
    r.best_epoch = parse_u64(f[11]);
    r.best_eval_accuracy = parse_num(f[12]);
    r.test_accuracy = parse_num(f[13]);
    r.confusion = parse_confusion(f[14]);
    r.error = f[15];
    out.push_back(std::move(r));
  }
  return out;
}

std::string results_long_csv(const std::vector<ExperimentResult>& results) {
  std::string out = "metric,threshold,model,seed,measure,value\n";
  for (const auto& r : results) {
    if (r.status != "ok") continue;
    const std::string prefix = csv_field(r.cell.tabular() ? "tabular" : r.cell.metric) + "," +
                               num(r.cell.threshold) + "," + csv_field(r.cell.model) + "," +
                               std::to_string(r.cell.seed) + ",";
    out += prefix + "test_accuracy," + num(r.test_accuracy) + "\n";
    out += prefix + "eval_accuracy," + num(r.best_eval_accuracy) + "\n";
  }
  return out;
}

std::string result_json(const ExperimentResult& r) {
  json j;
  j["cell_id"] = r.cell.id();
  j["metric"] = r.cell.metric;
  j["threshold"] = r.cell.threshold;
  j["model"] = r.cell.model;
  j["seed"] = r.cell.seed;
  j["config_hash"] = r.config_hash;
  j["status"] = r.status;
  j["error"] = r.error;
  j["nodes"] = r.nodes;
  j["edges"] = r.edges;
  j["isolated"] = r.isolated;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["best_eval_accuracy"] = r.best_eval_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["confusion"] = r.confusion;
  j["train_loss"] = r.train_loss;
  j["eval_accuracy"] = r.eval_accuracy;
  return j.dump(2) + "\n";
}

ExperimentResult parse_result_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ExperimentResult r;
    r.cell.metric = j.at("metric").get<std::string>();
    r.cell.threshold = j.at("threshold").get<double>();
    r.cell.model = j.at("model").get<std::string>();
    r.cell.seed = j.at("seed").get<std::uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.nodes = j.at("nodes").get<std::size_t>();
    r.edges = j.at("edges").get<std::size_t>();
    r.isolated = j.at("isolated").get<std::size_t>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_eval_accuracy = j.at("best_eval_accuracy").get<double>();
    r.test_accuracy = j.at("test_accuracy").get<double>();
    r.confusion = j.at("confusion").get<Confusion>();
    r.train_loss = j.at("train_loss").get<std::vector<double>>();
    r.eval_accuracy = j.at("eval_accuracy").get<std::vector<double>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed result file: ") + e.what());
  }
}

void emit_results(const std::vector<ExperimentResult>& results, const std::string& dir) {
  const fs::path root(dir);
  write_file_atomic((root / "results.csv").string(), results_csv(results));
  write_file_atomic((root / "results_long.csv").string(), results_long_csv(results));
  for (const auto& r : results) write_cell(dir, r);
  std::string timing = "cell_id,wall_seconds\n";
  for (const auto& r : results) timing += csv_field(r.cell.id()) + "," + num(r.wall_seconds) + "\n";
  write_file_atomic((root / "timing.csv").string(), timing);
}

}  // namespace triage::harness
