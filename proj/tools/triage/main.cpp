// triage: command-line front end for preprocessing, graph construction,
// experiments and the prediction service.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"
#include "triage/harness/run_config.hpp"
#include "triage/harness/split.hpp"
#include "triage/ingest/dataset_io.hpp"
#include "triage/ingest/synth.hpp"
#include "triage/serve/inference.hpp"
#include "triage/serve/service.hpp"
#include "triage/simd/kernels.hpp"
#include "triage/simnet/builder.hpp"
#include "triage/simnet/graph_io.hpp"

namespace fs = std::filesystem;
using namespace triage;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Flags shared by experiment commands; only those given override the file.
struct ExperimentFlags {
  std::string config_path;
  harness::RunConfig flags;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<std::size_t> epochs, patience, workers, fan_out;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run-config file")->check(CLI::ExistingFile);
    cmd->add_option("--in", flags.dataset, "preprocessed dataset (.bin)");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--lr", lr, "learning rate override");
    cmd->add_option("--epochs", epochs, "maximum epochs (default 200)");
    cmd->add_option("--patience", patience, "early-stop patience (default 20)");
    cmd->add_option("--workers", workers, "parallel cells (default: all cores)");
    cmd->add_option("--fan-out", fan_out, "GraphSAGE neighbours per hop (default 10)");
    cmd->add_option("--out-dir", flags.output_dir, "result directory");
  }

  harness::RunConfig resolve() const {
    harness::RunConfig c = config_path.empty() ? harness::RunConfig{} : harness::RunConfig::load(config_path);
    if (!flags.dataset.empty()) c.dataset = flags.dataset;
    if (!flags.output_dir.empty()) c.output_dir = flags.output_dir;
    if (seed) c.seed = seed;
    if (lr) c.lr = lr;
    if (epochs) c.epochs = *epochs;
    if (patience) c.patience = *patience;
    if (workers) c.workers = *workers;
    if (fan_out) c.fan_out = *fan_out;
    require(c.seed.has_value(), ErrorCode::kInvalidArgument,
            "--seed is required for experiment commands (flag or config file)");
    require(!c.dataset.empty(), ErrorCode::kInvalidArgument, "no dataset given (--in or config)");
    c.validate();
    return c;
  }
};

void print_results(const std::vector<harness::ExperimentResult>& results) {
  std::cout << "cell,status,edges,isolated,epochs,eval_acc,test_acc\n";
  for (const auto& r : results) {
    std::cout << r.cell.id() << "," << r.status << "," << r.edges << "," << r.isolated << ","
              << r.epochs_run << "," << fmt(r.best_eval_accuracy) << "," << fmt(r.test_accuracy);
    if (r.status != "ok") std::cout << "," << r.error;
    std::cout << "\n";
  }
}

int exit_code(const std::vector<harness::ExperimentResult>& results) {
  for (const auto& r : results)
    if (r.status != "ok") return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patient triage with similarity graphs and graph neural networks"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic patient CSV");
  ingest::SynthOptions synth_opts;
  std::string synth_out;
  synth->add_option("--rows", synth_opts.rows, "rows to generate");
  synth->add_option("--seed", synth_opts.seed, "generator seed")->required();
  synth->add_option("--out", synth_out, "output CSV")->required();

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "clean, impute, encode, SMOTE and scale a CSV");
  std::string pre_in, pre_out, pre_mapping, pre_csv;
  ingest::PreprocessConfig pre_cfg;
  std::optional<std::uint64_t> pre_seed;
  pre->add_option("--in", pre_in, "patient CSV")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "dataset file to write")->required();
  pre->add_option("--mapping", pre_mapping, "header mapping file")->check(CLI::ExistingFile);
  pre->add_option("--smote-k", pre_cfg.smote_k, "SMOTE neighbours (default 5)");
  pre->add_option("--seed", pre_seed, "SMOTE seed")->required();
  pre->add_option("--csv", pre_csv, "also export the processed matrix as CSV");

  // build-graph
  auto* bg = app.add_subcommand("build-graph", "build a thresholded similarity graph");
  std::string bg_in, bg_out, bg_metric = "cosine", bg_edges;
  double bg_threshold = 0.95;
  std::optional<std::uint64_t> bg_seed;
  bg->add_option("--in", bg_in, "dataset file")->required()->check(CLI::ExistingFile);
  bg->add_option("--out", bg_out, "graph file to write")->required();
  bg->add_option("--metric", bg_metric, "cosine | euclidean | manhattan | minkowski<p>");
  bg->add_option("--threshold", bg_threshold, "edge threshold");
  bg->add_option("--seed", bg_seed, "attach train/eval/test masks for this seed");
  bg->add_option("--edges", bg_edges, "also write the edge list as CSV");

  // sweep
  auto* sw = app.add_subcommand("sweep", "edge and isolated-node counts over thresholds");
  std::string sw_in, sw_metric = "cosine", sw_out;
  std::vector<double> sw_thresholds;
  sw->add_option("--in", sw_in, "dataset file")->required()->check(CLI::ExistingFile);
  sw->add_option("--metric", sw_metric, "metric name");
  sw->add_option("--thresholds", sw_thresholds, "thresholds (default: the metric's default list)")->delimiter(',');
  sw->add_option("--out", sw_out, "CSV to write");

  // train
  auto* tr = app.add_subcommand("train", "train one model and write a checkpoint");
  ExperimentFlags tr_flags;
  tr_flags.add(tr);
  std::string tr_metric, tr_model;
  std::optional<double> tr_threshold;
  tr->add_option("--metric", tr_metric, "metric name");
  tr->add_option("--threshold", tr_threshold, "edge threshold");
  tr->add_option("--model", tr_model, "gcn5 | gcn4 | gat2 | sage5 | sage5-r<layers>-w<width>")->required();

  // grid
  auto* gr = app.add_subcommand("grid", "metric x threshold x model grid plus tabular baselines");
  ExperimentFlags gr_flags;
  gr_flags.add(gr);

  // ablation
  auto* ab = app.add_subcommand("ablation", "GraphSAGE layer/width ablation on cosine 0.95");
  ExperimentFlags ab_flags;
  ab_flags.add(ab);
  std::vector<std::uint64_t> ab_seeds;
  ab->add_option("--seeds", ab_seeds, "seeds (default: seed, seed+1, seed+2)")->delimiter(',');

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP prediction service");
  std::string sv_ckpt, sv_graph, sv_bind = "127.0.0.1:8080";
  sv->add_option("--checkpoint", sv_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  sv->add_option("--graph", sv_graph, "graph file (default: the checkpoint's reference)");
  sv->add_option("--bind", sv_bind, "host:port");

  // predict
  auto* pr = app.add_subcommand("predict", "predict one patient record (JSON file) offline");
  std::string pr_ckpt, pr_graph, pr_record;
  pr->add_option("--checkpoint", pr_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  pr->add_option("--graph", pr_graph, "graph file");
  pr->add_option("--record", pr_record, "patient JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      write_file_atomic(synth_out, ingest::synthesize_patient_csv(synth_opts));
      std::cout << "wrote " << synth_opts.rows << " rows to " << synth_out << "\n";
    } else if (*pre) {
      pre_cfg.seed = *pre_seed;
      const auto mapping = pre_mapping.empty() ? ingest::HeaderMapping::defaults()
                                               : ingest::HeaderMapping::load(pre_mapping);
      const auto res = ingest::preprocess_pipeline(pre_in, mapping, pre_cfg);
      ingest::save_dataset(pre_out, {res.features, res.labels, res.encoders, res.report});
      if (!pre_csv.empty()) write_file_atomic(pre_csv, ingest::dataset_to_csv(res.features, res.labels));
      std::cout << res.report.to_json() << "\n";
    } else if (*bg) {
      const auto data = ingest::load_dataset(bg_in);
      auto g = simnet::build_graph(data.features, data.labels, simnet::SimilarityMetric::parse(bg_metric),
                                   bg_threshold);
      if (bg_seed) g.masks = harness::split_masks(g.labels, *bg_seed);
      simnet::save_graph(bg_out, g);
      if (!bg_edges.empty()) write_file_atomic(bg_edges, simnet::edges_to_csv(g));
      std::cout << "nodes " << g.n << ", edges " << g.stats.edge_count << ", isolated "
                << g.stats.isolated_node_count << "\n";
    } else if (*sw) {
      const auto data = ingest::load_dataset(sw_in);
      const auto metric = simnet::SimilarityMetric::parse(sw_metric);
      if (sw_thresholds.empty()) sw_thresholds = harness::default_thresholds(metric.name());
      const auto stats = simnet::threshold_sweep(data.features, metric, sw_thresholds);
      std::string csv = "metric,threshold,edges,isolated\n";
      for (const auto& s : stats) {
        std::ostringstream line;
        line << metric.name() << "," << s.threshold << "," << s.edge_count << ","
             << s.isolated_node_count << "\n";
        csv += line.str();
      }
      if (!sw_out.empty()) write_file_atomic(sw_out, csv);
      std::cout << csv;
    } else if (*tr) {
      auto cfg = tr_flags.resolve();
      if (!tr_metric.empty()) cfg.metric = tr_metric;
      const double threshold =
          tr_threshold ? *tr_threshold
                       : (cfg.thresholds.empty() ? 0.95 : cfg.thresholds.front());
      require(!cfg.output_dir.empty(), ErrorCode::kInvalidArgument, "--out-dir is required");
      const std::string metric = simnet::SimilarityMetric::parse(cfg.metric).name();
      auto opts = cfg.grid_options({{metric, threshold, tr_model, *cfg.seed}});
      opts.save_checkpoints = true;
      const auto data = ingest::load_dataset(cfg.dataset);
      const auto results = harness::run_grid(data, opts);
      print_results(results);
      if (results.front().status == "ok")
        std::cout << "checkpoint: "
                  << (fs::path(cfg.output_dir) / "checkpoints" / (results.front().cell.id() + ".ckpt")).string()
                  << "\n";
      return exit_code(results);
    } else if (*gr) {
      const auto cfg = gr_flags.resolve();
      auto cells = harness::default_grid(*cfg.seed);
      if (!cfg.models.empty())
        std::erase_if(cells, [&](const harness::CellSpec& c) {
          return std::find(cfg.models.begin(), cfg.models.end(), c.model) == cfg.models.end();
        });
      if (!cfg.thresholds.empty()) {
        const std::string metric = simnet::SimilarityMetric::parse(cfg.metric).name();
        std::erase_if(cells, [&](const harness::CellSpec& c) {
          return !c.tabular() &&
                 (c.metric != metric || std::find(cfg.thresholds.begin(), cfg.thresholds.end(),
                                                  c.threshold) == cfg.thresholds.end());
        });
      }
      const auto data = ingest::load_dataset(cfg.dataset);
      const auto results = harness::run_grid(data, cfg.grid_options(cells));
      print_results(results);
      return exit_code(results);
    } else if (*ab) {
      auto cfg = ab_flags.resolve();
      if (!ab_seeds.empty()) cfg.seeds = ab_seeds;
      if (cfg.seeds.empty()) cfg.seeds = {*cfg.seed, *cfg.seed + 1, *cfg.seed + 2};
      const auto data = ingest::load_dataset(cfg.dataset);
      const auto results = harness::run_grid(data, cfg.grid_options(harness::ablation_grid(cfg.seeds)));
      print_results(results);
      std::cout << "\nmodel,median_test_accuracy\n";
      for (const auto& s : harness::summarize_ablation(results))
        std::cout << s.model << "," << fmt(s.median_test_accuracy) << "\n";
      return exit_code(results);
    } else if (*sv) {
      serve::TriageService service(serve::load_model(sv_ckpt, sv_graph));
      const auto colon = sv_bind.rfind(':');
      require(colon != std::string::npos, ErrorCode::kInvalidArgument, "--bind must be host:port");
      const std::string host = sv_bind.substr(0, colon);
      const int port = std::stoi(sv_bind.substr(colon + 1));
      httplib::Server server;
      service.install(server);
      std::cout << "serving " << service.current()->checkpoint.spec.name << " on " << sv_bind
                << " (simd: " << (simd::active_kernels().backend == simd::Backend::kAvx2 ? "avx2" : "scalar")
                << ")" << std::endl;
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot bind " << sv_bind << "\n";
        return 1;
      }
    } else if (*pr) {
      const auto model = serve::load_model(pr_ckpt, pr_graph);
      const auto record = nlohmann::json::parse(read_text(pr_record));
      std::cout << serve::predict_patient(model->checkpoint, model->graph, record).to_json().dump(2)
                << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
