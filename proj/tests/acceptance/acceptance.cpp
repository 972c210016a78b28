// Acceptance checks, one per criterion:
//
//   acceptance --criterion <name>|all
//
// Each criterion prints detail lines and then a single PASS / FAIL / SKIP
// line. Exit status: 0 pass, 1 fail, 77 skip. The ordering criterion is
// soft: a miss is reported as a deviation and still exits 0.
//
// Data: the real patient CSV when TRIAGE_DATASET names it (TRIAGE_MAPPING
// optionally names a header mapping file), otherwise a synthetic surrogate
// of about 7k nodes after balancing.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"
#include "triage/autograd/grad_check.hpp"
#include "triage/autograd/ops.hpp"
#include "triage/autograd/tape.hpp"
#include "triage/common/binary_io.hpp"
#include "triage/common/error.hpp"
#include "triage/common/random.hpp"
#include "triage/gnn/model.hpp"
#include "triage/gnn/params.hpp"
#include "triage/gnn/sampler.hpp"
#include "triage/harness/experiment.hpp"
#include "triage/harness/split.hpp"
#include "triage/harness/train.hpp"
#include "triage/ingest/dataset_io.hpp"
#include "triage/serve/checkpoint.hpp"
#include "triage/serve/inference.hpp"
#include "triage/simd/kernels.hpp"
#include "triage/simnet/attach.hpp"
#include "triage/simnet/builder.hpp"
#include "triage/simnet/graph_io.hpp"
#include "triage/simnet/view.hpp"

using namespace triage;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr std::size_t kSurrogateRows = 3600;
constexpr std::uint64_t kSurrogateSeed = 7;

enum class Status { kPass, kFail, kSkip, kDeviation };

struct Outcome {
  Status status = Status::kPass;
  std::string summary;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void detail(const std::string& line) { std::printf("  %s\n", line.c_str()); std::fflush(stdout); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---------------------------------------------------------------------------
// Data

struct Source {
  ingest::PreprocessResult prep;
  ingest::Dataset data;
  std::string label;
  bool real = false;
};

const char* dataset_path() {
  const char* p = std::getenv("TRIAGE_DATASET");
  return p != nullptr && *p != '\0' ? p : nullptr;
}

Source make_source(bool allow_real, std::size_t rows, std::uint64_t seed) {
  Source s;
  if (allow_real && dataset_path() != nullptr) {
    const char* m = std::getenv("TRIAGE_MAPPING");
    const auto mapping = m != nullptr && *m != '\0' ? ingest::HeaderMapping::load(m)
                                                    : ingest::HeaderMapping::defaults();
    s.prep = ingest::preprocess_pipeline(dataset_path(), mapping, {5, kSeed});
    s.label = std::string("dataset ") + dataset_path();
    s.real = true;
  } else {
    ingest::SynthOptions so;
    so.rows = rows;
    so.seed = seed;
    s.prep = ingest::preprocess_table(
        ingest::parse_csv(ingest::synthesize_patient_csv(so), ingest::HeaderMapping::defaults()),
        {5, seed});
    s.label = fmt("synthetic surrogate (%zu rows, seed %llu)", rows,
                  static_cast<unsigned long long>(seed));
  }
  s.data = {s.prep.features, s.prep.labels, s.prep.encoders, s.prep.report};
  return s;
}

const Source& main_source() {
  static const Source s = [] {
    auto s = make_source(true, kSurrogateRows, kSurrogateSeed);
    detail(fmt("data: %s, %zu nodes after balancing", s.label.c_str(), s.data.features.n));
    return s;
  }();
  return s;
}

// ---------------------------------------------------------------------------
// Graph statistics against reference counts for the real CSV

struct AnchorRow {
  const char* metric;
  double threshold;
  std::size_t edges;
  std::size_t isolated;
};

constexpr AnchorRow kAnchors[] = {
    {"cosine", 0.98, 1578490, 761},       {"cosine", 0.95, 8103196, 22},
    {"cosine", 0.94, 10810687, 7},        {"cosine", 0.92, 16505521, 2},
    {"cosine", 0.90, 22148695, 1},        {"euclidean", 0.20, 3348231, 125},
    {"euclidean", 0.23, 5403317, 33},     {"euclidean", 0.25, 7120567, 14},
    {"euclidean", 0.28, 10279280, 5},     {"euclidean", 0.31, 14086639, 0},
    {"euclidean", 0.38, 25226436, 0},     {"manhattan", 0.10, 1186583, 947},
    {"manhattan", 0.13, 2838619, 175},    {"manhattan", 0.22, 14688023, 0},
    {"manhattan", 0.31, 35306331, 0},     {"manhattan", 0.33, 41217110, 0},
    {"minkowski10", 0.20, 988835, 892},   {"minkowski10", 0.25, 2146676, 225},
    {"minkowski10", 0.30, 3942436, 83},   {"minkowski10", 0.35, 6403802, 37},
    {"minkowski10", 0.40, 9481995, 13},   {"minkowski4", 0.20, 1630369, 394},
    {"minkowski4", 0.25, 3527312, 92},
};

bool within15(std::size_t got, std::size_t ref) {
  return std::fabs(static_cast<double>(got) - static_cast<double>(ref)) <=
         0.15 * static_cast<double>(ref);
}

Outcome graph_anchors() {
  const auto& src = main_source();
  const auto t0 = std::chrono::steady_clock::now();
  simnet::threshold_sweep(src.data.features, simnet::SimilarityMetric::cosine(),
                          harness::default_thresholds("cosine"));
  const double sweep_s = seconds_since(t0);
  const bool fast = sweep_s < 60.0;
  detail(fmt("cosine sweep over %zu nodes: %.2f s (limit 60 s) %s", src.data.features.n, sweep_s,
             fast ? "ok" : "too slow"));
  if (!src.real)
    return {Status::kSkip, fmt("TRIAGE_DATASET not set; counts need the real CSV (runtime sub-check %s)",
                               fast ? "passed" : "FAILED")};

  std::size_t bad = 0;
  std::map<std::string, std::vector<simnet::GraphStats>> sweeps;
  for (const auto& row : kAnchors) {
    if (!sweeps.count(row.metric))
      sweeps[row.metric] = simnet::threshold_sweep(src.data.features,
                                                   simnet::SimilarityMetric::parse(row.metric),
                                                   harness::default_thresholds(row.metric));
    const auto ts = harness::default_thresholds(row.metric);
    const auto k = static_cast<std::size_t>(
        std::find(ts.begin(), ts.end(), row.threshold) - ts.begin());
    const auto& st = sweeps[row.metric].at(k);
    const bool ok = within15(st.edge_count, row.edges) && within15(st.isolated_node_count, row.isolated);
    bad += !ok;
    detail(fmt("%-12s %.2f  edges %10zu vs %10zu  isolated %5zu vs %5zu  %s", row.metric,
               row.threshold, st.edge_count, row.edges, st.isolated_node_count, row.isolated,
               ok ? "ok" : "OUT"));
  }
  const bool pass = bad == 0 && fast;
  return {pass ? Status::kPass : Status::kFail,
          fmt("%zu of %zu rows within 15%%, sweep %.1f s", std::size(kAnchors) - bad,
              std::size(kAnchors), sweep_s)};
}

// ---------------------------------------------------------------------------
// Monotonicity over each metric's threshold list

const std::vector<std::string> kMetrics = {"cosine", "euclidean", "manhattan", "minkowski10",
                                           "minkowski4"};

std::size_t check_monotone(const ingest::FeatureMatrix& x, const std::string& name,
                           bool verbose) {
  const auto m = simnet::SimilarityMetric::parse(name);
  auto ts = harness::default_thresholds(name);
  // Loosening order: falling cosine, rising distance.
  std::sort(ts.begin(), ts.end());
  if (m.is_similarity()) std::reverse(ts.begin(), ts.end());
  const auto st = simnet::threshold_sweep(x, m, ts);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const bool ok = i == 0 || (st[i].edge_count > st[i - 1].edge_count &&
                               st[i].isolated_node_count <= st[i - 1].isolated_node_count);
    violations += !ok;
    if (verbose)
      detail(fmt("%-12s %.2f  edges %9zu  isolated %5zu  %s", name.c_str(), ts[i], st[i].edge_count,
                 st[i].isolated_node_count, ok ? "" : "VIOLATION"));
  }
  return violations;
}

Outcome monotonicity() {
  std::size_t violations = 0;
  for (const auto& name : kMetrics) violations += check_monotone(main_source().data.features, name, true);
  // Smaller random matrices as well: fewer pairs make ties between thresholds likelier.
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto x = fixtures::random_features(400 + 100 * s, 16, 500 + s);
    for (const auto& name : kMetrics) violations += check_monotone(x, name, false);
  }
  return {violations == 0 ? Status::kPass : Status::kFail,
          fmt("%zu violations across 5 metrics on the main data and 5 random matrices", violations)};
}

// ---------------------------------------------------------------------------
// Blocked construction vs double loop; sparse GCN vs dense matrices

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

EdgeSet edge_set(const simnet::PatientGraph& g) {
  EdgeSet out;
  for (std::size_t u = 0; u < g.n; ++u)
    for (auto v : g.neighbors(u))
      if (v > u) out.emplace(static_cast<std::uint32_t>(u), v);
  return out;
}

// A threshold at quantile q of the pair scores whose nearest pair score is
// more than 1e-9 away, so summation order cannot move a pair across it.
double separated_threshold(const ingest::FeatureMatrix& x, const simnet::SimilarityMetric& m,
                           double q) {
  std::vector<double> s;
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = i + 1; j < x.n; ++j) s.push_back(fixtures::naive_score(x.row(i), x.row(j), x.d, m));
  std::sort(s.begin(), s.end());
  if (m.is_similarity()) std::reverse(s.begin(), s.end());
  const auto start = static_cast<std::size_t>(q * static_cast<double>(s.size() - 1));
  for (std::size_t k = start; k + 1 < s.size(); ++k)
    if (std::fabs(s[k] - s[k + 1]) > 2e-9) return 0.5 * (s[k] + s[k + 1]);
  fail(ErrorCode::kInvalidArgument, "no separated threshold");
}

gnn::ParamSet noisy_params(const gnn::ModelSpec& spec, std::uint64_t seed) {
  gnn::ParamSet p = gnn::init_params(spec, seed);
  Rng rng(seed + 99);
  for (std::size_t i = 0; i < p.tensors.size(); ++i)
    if (p.names[i].find("bias") != std::string::npos)
      for (double& v : p.tensors[i].values) v = 0.2 * (2 * rng.uniform() - 1);
  return p;
}

Outcome oracle_equivalence() {
  Rng rng(kSeed);
  std::size_t graphs = 0, mismatched = 0, total_edges = 0;
  double worst_gcn = 0.0;
  for (int f = 0; f < 50; ++f) {
    const std::size_t n = 10 + rng.index(191);
    const auto x = fixtures::random_features(n, ingest::kFeatureCount, 1000 + f);
    const auto y = fixtures::random_labels(n, 2000 + f);
    for (const auto& name : kMetrics) {
      const auto m = simnet::SimilarityMetric::parse(name);
      const double t = separated_threshold(x, m, 0.05 + 0.4 * rng.uniform());
      EdgeSet want;
      for (const auto& [u, v, s] : fixtures::brute_force_edges(x, m, t)) want.emplace(u, v);
      total_edges += want.size();
      const simnet::BuildOptions variants[] = {
          {},
          {7, 1, &simd::scalar_kernels()},
          {1, 3, &simd::active_kernels()},
      };
      for (const auto& opt : variants) {
        const auto g = simnet::build_graph(x, y, m, t, opt);
        ++graphs;
        if (edge_set(g) != want) {
          ++mismatched;
          detail(fmt("fixture %d (%zu nodes) %s t=%.9f: edge sets differ", f, n, name.c_str(), t));
        }
        if (&opt == &variants[0] && name == "cosine") {
          const simnet::FullGraphView view(g);
          for (const auto& spec : {gnn::gcn5(), gnn::gcn4()}) {
            const auto p = noisy_params(spec, 3000 + f);
            const auto got = gnn::predict_logits(spec, p, view, {});
            worst_gcn = std::max(worst_gcn, oracle::max_rel_diff(got, oracle::gcn_forward(spec, p, view)));
          }
        }
      }
    }
  }
  detail(fmt("%zu graphs built (50 fixtures x 5 metrics x 3 build settings), %zu oracle edges in total",
             graphs, total_edges));
  detail(fmt("gcn5/gcn4 sparse vs dense worst relative difference %.3g (limit 1e-12)", worst_gcn));
  const bool pass = mismatched == 0 && worst_gcn <= 1e-12;
  return {pass ? Status::kPass : Status::kFail,
          fmt("%zu/%zu edge sets exact, gcn max diff %.3g", graphs - mismatched, graphs, worst_gcn)};
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checks

ag::Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  ag::Tensor t(r, c);
  for (double& v : t.values) v = 2 * rng.uniform() - 1;
  return t;
}

ag::Var project(ag::Tape& tape, const ag::Var& out, std::uint64_t seed) {
  Rng rng(seed);
  return ag::sum(ag::mul(out, tape.constant(random_tensor(out.rows(), out.cols(), rng))));
}

struct Family {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  double worst = 0.0;
};

Outcome gradient_suite() {
  constexpr int kInstances = 24;
  std::vector<Family> families = {{"gcn"}, {"gatv2"}, {"sage max"}, {"sage mean"},
                                  {"log_softmax"}, {"cross_entropy"}};
  auto record = [](Family& f, const ag::GradCheckReport& r) {
    ++f.total;
    f.passed += r.passed;
    f.worst = std::max(f.worst, r.max_error);
    if (!r.passed) detail(f.name + ": " + r.describe());
  };
  for (int i = 0; i < kInstances; ++i) {
    Rng rng(derive_seed(kSeed, static_cast<std::uint64_t>(i)));
    const std::size_t n = 5 + static_cast<std::size_t>(i % 6), d = 3, out = 2;
    const auto g = fixtures::random_graph(n, 0.45, d, 4000 + i);
    const simnet::FullGraphView view(g);
    std::vector<std::uint32_t> seeds(n);
    for (std::uint32_t u = 0; u < n; ++u) seeds[u] = u;
    Rng shuffler(5000 + i);
    shuffler.shuffle(seeds.begin(), seeds.end());
    seeds.resize(std::max<std::size_t>(2, n / 2));

    auto one_layer = [&](gnn::LayerSpec layer, std::size_t fan_out) {
      gnn::ModelSpec spec;
      spec.name = "probe";
      spec.layers = {layer};
      spec.fan_out = fan_out;
      const auto sb = gnn::build_block(spec, view, seeds, {fan_out, 6000u + i});
      return std::make_pair(sb.blocks.front(), gnn::gather_features(view, sb.input_nodes));
    };
    const std::uint64_t proj = 7000 + i;

    {
      gnn::LayerSpec layer{gnn::LayerKind::kGcn, d, out};
      const auto [block, x] = one_layer(layer, 0);
      record(families[0], ag::grad_check(
                              [&, b = block](ag::Tape& t, const std::vector<ag::Var>& v) {
                                return project(t, gnn::gcn_layer(b, v[0], v[1], v[2]), proj);
                              },
                              {x, random_tensor(d, out, rng), random_tensor(1, out, rng)}));
    }
    {
      gnn::LayerSpec layer{gnn::LayerKind::kGatv2, d, out};
      layer.heads = 1 + static_cast<std::size_t>(i % 3);
      layer.concat_heads = i % 2 == 0;
      const auto [block, x] = one_layer(layer, 0);
      const std::size_t hw = layer.heads * out;
      record(families[1],
             ag::grad_check(
                 [&, b = block](ag::Tape& t, const std::vector<ag::Var>& v) {
                   return project(t, gnn::gatv2_layer(layer, b, v[0], v[1], v[2], v[3], v[4]), proj);
                 },
                 {x, random_tensor(d, hw, rng), random_tensor(d, hw, rng),
                  random_tensor(layer.heads, out, rng), random_tensor(1, layer.output_width(), rng)}));
    }
    for (int agg = 0; agg < 2; ++agg) {
      gnn::LayerSpec layer{gnn::LayerKind::kSage, d, out};
      layer.aggregator = agg == 0 ? gnn::Aggregator::kMax : gnn::Aggregator::kMean;
      const auto [block, x] = one_layer(layer, i % 2 == 0 ? 3 : 0);
      record(families[2 + agg],
             ag::grad_check(
                 [&, b = block](ag::Tape& t, const std::vector<ag::Var>& v) {
                   return project(t, gnn::sage_layer(layer, b, v[0], v[1], v[2], v[3]), proj);
                 },
                 {x, random_tensor(d, out, rng), random_tensor(d, out, rng), random_tensor(1, out, rng)}));
    }
    {
      auto z = random_tensor(5, 4, rng);
      for (double& v : z.values) v *= 3.0;
      record(families[4], ag::grad_check(
                              [&](ag::Tape& t, const std::vector<ag::Var>& v) {
                                return project(t, ag::log_softmax(v[0]), proj);
                              },
                              {z}));
    }
    {
      auto z = random_tensor(6, 4, rng);
      for (double& v : z.values) v *= 2.0;
      std::vector<int> y(6);
      std::vector<std::uint8_t> mask(6);
      for (std::size_t r = 0; r < 6; ++r) {
        y[r] = static_cast<int>(rng.index(4));
        mask[r] = r == 0 || rng.uniform() < 0.7;
      }
      record(families[5], ag::grad_check(
                              [&](ag::Tape&, const std::vector<ag::Var>& v) {
                                return ag::cross_entropy(v[0], y, mask);
                              },
                              {z}));
    }
  }
  bool pass = true;
  std::string summary;
  for (const auto& f : families) {
    detail(fmt("%-13s %zu/%zu passed, worst scaled error %.3g (rtol 1e-4)", f.name.c_str(), f.passed,
               f.total, f.worst));
    pass = pass && f.passed == f.total && f.total >= 20;
    summary += fmt("%s%s %zu/%zu", summary.empty() ? "" : ", ", f.name.c_str(), f.passed, f.total);
  }
  return {pass ? Status::kPass : Status::kFail, summary};
}

// ---------------------------------------------------------------------------
// Training

harness::GridOptions grid(std::vector<harness::CellSpec> cells) {
  harness::GridOptions o;
  o.cells = std::move(cells);
  o.workers = 1;
  return o;
}

void print_result(const harness::ExperimentResult& r) {
  if (r.status != "ok") {
    detail(r.cell.id() + ": FAILED " + r.error);
    return;
  }
  detail(fmt("%-28s edges %9zu  epochs %3zu (best %3zu)  eval %.4f  test %.4f  %.1f s",
             r.cell.id().c_str(), r.edges, r.epochs_run, r.best_epoch, r.best_eval_accuracy,
             r.test_accuracy, r.wall_seconds));
}

Outcome training_sanity() {
  std::vector<harness::CellSpec> cells;
  for (const char* m : {"gcn5", "gcn4", "gat2", "sage5"}) cells.push_back({"cosine", 0.95, m, kSeed});
  const auto results = harness::run_grid(main_source().data, grid(cells));
  bool pass = true;
  std::string summary;
  for (const auto& r : results) {
    print_result(r);
    const bool ok = r.status == "ok" && r.test_accuracy >= 0.60 && r.epochs_run <= 200 &&
                    r.wall_seconds < 600.0;
    pass = pass && ok;
    summary += fmt("%s%s %.3f", summary.empty() ? "" : ", ", r.cell.model.c_str(), r.test_accuracy);
  }
  return {pass ? Status::kPass : Status::kFail, summary + " (need >= 0.60, <= 200 epochs, < 600 s)"};
}

std::size_t ordering_edge_budget() {
  const char* b = std::getenv("TRIAGE_ORDERING_EDGE_BUDGET");
  return b != nullptr && *b != '\0' ? std::strtoull(b, nullptr, 10) : 500000;
}

Outcome ordering() {
  const auto& data = main_source().data;
  const std::size_t budget = ordering_edge_budget();
  // Candidate graphs are the default grid's cells for each family, limited to
  // graphs within the edge budget (0 = no limit) to bound the run time.
  std::map<std::string, std::size_t> edges;
  for (const auto& name : {"cosine", "euclidean", "manhattan"}) {
    const auto ts = harness::default_thresholds(name);
    const auto st = simnet::threshold_sweep(data.features, simnet::SimilarityMetric::parse(name), ts);
    for (std::size_t i = 0; i < ts.size(); ++i) edges[harness::CellSpec{name, ts[i], "", 0}.id()] = st[i].edge_count;
  }
  std::vector<harness::CellSpec> gcn_cells, gat_cells;
  std::size_t skipped = 0;
  for (const auto& c : harness::default_grid(kSeed)) {
    if (c.tabular() || c.model == "sage5") continue;
    const auto e = edges.at(harness::CellSpec{c.metric, c.threshold, "", 0}.id());
    if (budget != 0 && e > budget) {
      ++skipped;
      continue;
    }
    (c.model == "gat2" ? gat_cells : gcn_cells).push_back(c);
  }
  detail(fmt("graph selection: %zu GCN and %zu GAT candidates, %zu over the %zu-edge budget skipped",
             gcn_cells.size(), gat_cells.size(), skipped, budget));

  auto best_of = [&](const std::vector<harness::CellSpec>& cells) {
    const auto rs = harness::run_grid(data, grid(cells));
    const harness::ExperimentResult* best = nullptr;
    for (const auto& r : rs) {
      print_result(r);
      if (r.status == "ok" && (best == nullptr || r.best_eval_accuracy > best->best_eval_accuracy)) best = &r;
    }
    require(best != nullptr, ErrorCode::kInvalidArgument, "no candidate trained");
    detail("best on evaluation accuracy: " + best->cell.id());
    return *best;
  };
  const auto gcn_best = best_of(gcn_cells);
  const auto gat_best = best_of(gat_cells);

  std::vector<harness::CellSpec> runs;
  for (std::uint64_t s = kSeed; s < kSeed + 3; ++s) {
    if (s != kSeed) {
      runs.push_back({gcn_best.cell.metric, gcn_best.cell.threshold, gcn_best.cell.model, s});
      runs.push_back({gat_best.cell.metric, gat_best.cell.threshold, gat_best.cell.model, s});
    }
    runs.push_back({"cosine", 0.95, "sage5", s});
    runs.push_back({"", 0.0, "knn", s});
    runs.push_back({"", 0.0, "svm", s});
  }
  auto rs = harness::run_grid(data, grid(runs));
  rs.push_back(gcn_best);
  rs.push_back(gat_best);
  std::map<std::string, std::vector<double>> acc;
  for (const auto& r : rs) {
    if (r.cell.seed != kSeed || (r.cell.model != "gcn5" && r.cell.model != "gcn4" && r.cell.model != "gat2"))
      print_result(r);
    const std::string family = r.cell.model == "gat2" ? "GAT" : r.cell.model.starts_with("gcn") ? "GCN"
                               : r.cell.model == "sage5"                                        ? "SAGE"
                                                                                                : r.cell.model;
    acc[family].push_back(r.status == "ok" ? r.test_accuracy : 0.0);
  }
  std::map<std::string, double> med;
  for (const auto& [k, v] : acc) {
    med[k] = median3(v);
    detail(fmt("median test accuracy %-4s %.4f", k.c_str(), med[k]));
  }
  const bool sage_top = med["SAGE"] > med["knn"] && med["SAGE"] > med["svm"];
  const bool tabular_mid = std::min(med["knn"], med["svm"]) > std::max(med["GCN"], med["GAT"]);
  const std::string summary =
      fmt("SAGE %.3f, knn %.3f, svm %.3f, GCN %.3f, GAT %.3f", med["SAGE"], med["knn"], med["svm"],
          med["GCN"], med["GAT"]);
  if (sage_top && tabular_mid) return {Status::kPass, summary};
  std::string why;
  if (!sage_top) why += "GraphSAGE does not exceed both tabular baselines";
  if (!tabular_mid) why += std::string(why.empty() ? "" : "; ") + "tabular baselines do not exceed both GCN and GAT";
  return {Status::kDeviation, summary + "; " + why};
}

Outcome ablation() {
  const auto results =
      harness::run_grid(main_source().data, grid(harness::ablation_grid({kSeed, kSeed + 1, kSeed + 2})));
  for (const auto& r : results) print_result(r);
  const auto summary = harness::summarize_ablation(results);
  const std::string target = gnn::sage_ablation({2, 3, 4}, 8).name;
  double target_median = -1.0, others_min = 2.0;
  std::string argmin;
  std::size_t variants = 0;
  for (const auto& s : summary) {
    detail(fmt("%-16s median %.4f", s.model.c_str(), s.median_test_accuracy));
    if (s.model == "sage5") continue;
    ++variants;
    if (s.model == target) {
      target_median = s.median_test_accuracy;
    } else if (s.median_test_accuracy < others_min) {
      others_min = s.median_test_accuracy;
      argmin = s.model;
    }
  }
  const bool failed_cells = std::any_of(results.begin(), results.end(),
                                        [](const auto& r) { return r.status != "ok"; });
  const bool pass = variants == 8 && !failed_cells && target_median >= 0.0 && target_median <= others_min;
  return {pass ? Status::kPass : Status::kFail,
          fmt("%zu variants; %s median %.4f, lowest other %s %.4f", variants, target.c_str(),
              target_median, argmin.c_str(), others_min)};
}

// ---------------------------------------------------------------------------
// Determinism

std::map<std::string, std::vector<std::byte>> tree_bytes(const std::string& dir) {
  std::map<std::string, std::vector<std::byte>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "timing.csv") continue;
    out[rel] = read_file_bytes(e.path().string());
  }
  return out;
}

Outcome determinism() {
  const auto root = fixtures::temp_dir("acceptance_determinism");
  std::size_t compared = 0, differing = 0;
  auto compare = [&](const std::string& what, bool same) {
    ++compared;
    differing += !same;
    if (!same) detail(what + " differs between runs");
  };

  const auto a = make_source(false, 800, kSeed);
  const auto b = make_source(false, 800, kSeed);
  ingest::save_dataset(root + "/a.bin", a.data);
  ingest::save_dataset(root + "/b.bin", b.data);
  compare("dataset file", read_file_bytes(root + "/a.bin") == read_file_bytes(root + "/b.bin"));

  for (const auto& name : kMetrics) {
    const auto m = simnet::SimilarityMetric::parse(name);
    const double t = harness::default_thresholds(name).front();
    simnet::save_graph(root + "/a.graph", simnet::build_graph(a.data.features, a.data.labels, m, t, {256, 1}));
    simnet::save_graph(root + "/b.graph", simnet::build_graph(b.data.features, b.data.labels, m, t, {64, 3}));
    compare(name + " graph file", read_file_bytes(root + "/a.graph") == read_file_bytes(root + "/b.graph"));
  }

  std::vector<harness::CellSpec> cells;
  for (const char* m : {"gcn5", "gcn4", "gat2", "sage5", "sage5-r234-w8"}) cells.push_back({"cosine", 0.95, m, kSeed});
  cells.push_back({"euclidean", 0.2, "gcn4", kSeed + 1});
  cells.push_back({"", 0.0, "knn", kSeed});
  cells.push_back({"", 0.0, "svm", kSeed});
  auto opts = grid(cells);
  opts.train.epochs = 25;
  opts.save_checkpoints = true;
  opts.output_dir = root + "/run_a";
  harness::run_grid(a.data, opts);
  opts.output_dir = root + "/run_b";
  opts.workers = 2;
  harness::run_grid(b.data, opts);
  const auto ta = tree_bytes(root + "/run_a"), tb = tree_bytes(root + "/run_b");
  for (const auto& [rel, bytes] : ta) {
    const auto it = tb.find(rel);
    compare(rel, it != tb.end() && it->second == bytes);
  }
  for (const auto& [rel, bytes] : tb)
    if (!ta.count(rel)) compare(rel + " (only in second run)", false);
  detail(fmt("%zu result files per run compared byte for byte (timing.csv holds wall times and is excluded)",
             ta.size()));
  fs::remove_all(root);
  return {differing == 0 ? Status::kPass : Status::kFail,
          fmt("%zu/%zu files identical", compared - differing, compared)};
}

// ---------------------------------------------------------------------------
// Inference

json record_for_row(const ingest::PatientTable& t, std::size_t i) {
  const auto& fields = ingest::canonical_fields();
  json r = json::object();
  for (std::size_t c = 0; c < ingest::kFeatureCount; ++c) {
    const auto& cell = t.rows[i][c];
    const std::string key(fields[c].display);
    if (const auto* d = std::get_if<double>(&cell)) r[key] = *d;
    if (const auto* s = std::get_if<std::string>(&cell)) r[key] = *s;
  }
  return r;
}

Outcome inference() {
  const auto src = make_source(false, 1200, kSeed);
  auto g = simnet::build_graph(src.prep.features, src.prep.labels, simnet::SimilarityMetric::cosine(), 0.95);
  g.masks = harness::split_masks(g.labels, kSeed);
  const auto dir = fixtures::temp_dir("acceptance_inference");

  std::vector<serve::Checkpoint> models;
  for (const char* name : {"gcn5", "gcn4", "gat2", "sage5"}) {
    harness::TrainConfig tc;
    const auto spec = gnn::model_spec(name);
    tc.epochs = 30;
    tc.lr = spec.lr;
    tc.seed = kSeed;
    const auto out = harness::train_model(g, spec, tc);
    serve::Checkpoint c;
    c.spec = spec;
    c.params = out.params;
    c.column_mins = src.prep.features.column_mins;
    c.column_maxs = src.prep.features.column_maxs;
    c.encoders = src.prep.encoders;
    c.metric = g.stats.metric;
    c.threshold = g.stats.threshold;
    c.graph_file = "graph.bin";
    c.config_hash = name;
    c.seed = kSeed;
    c.sampling = out.eval_sampling;
    serve::save_checkpoint(dir + "/" + name + ".ckpt", c);
    models.push_back(serve::load_checkpoint(dir + "/" + name + ".ckpt"));
  }
  fs::remove_all(dir);

  std::vector<std::uint32_t> pool;
  for (std::size_t i = 0; i < src.prep.cleaned.rows.size(); ++i)
    if (g.masks.train[i]) pool.push_back(static_cast<std::uint32_t>(i));
  Rng rng(derive_seed(kSeed, 0x1f));
  double worst_full = 0.0, worst_field = 0.0, worst_scaled = 0.0;
  std::size_t probes = 0, fallbacks = 0;
  for (int p = 0; p < 100; ++p) {
    const std::uint32_t u = pool[rng.index(pool.size())];
    const json rec = record_for_row(src.prep.cleaned, u);
    for (const auto& c : models) {
      const auto r = serve::predict_patient(c, g, rec);
      const auto enc = serve::encode_record(c, rec);
      for (std::size_t k = 0; k < enc.scaled.size(); ++k)
        worst_scaled = std::max(worst_scaled, std::fabs(enc.scaled[k] - g.features.row(u)[k]));
      const auto nb = simnet::attach_node(g, enc.scaled, c.metric, c.threshold, serve::kFallbackK);
      fallbacks += nb.fallback_used;
      const auto full = simnet::materialize(simnet::AttachedView(g, enc.scaled, nb));
      const simnet::FullGraphView view(full);
      const auto whole = gnn::predict_log_proba(c.spec, c.params, view, c.sampling);
      const auto field = gnn::predict_log_proba(c.spec, c.params, view, c.sampling,
                                                {static_cast<std::uint32_t>(full.n - 1)});
      for (std::size_t k = 0; k < ingest::kClassCount; ++k) {
        worst_full = std::max(worst_full, std::fabs(r.probabilities[k] - std::exp(whole.at(full.n - 1, k))));
        worst_field = std::max(worst_field, std::fabs(r.probabilities[k] - std::exp(field.at(0, k))));
      }
      ++probes;
    }
  }
  detail(fmt("%zu predictions (100 training-node records x 4 models), %zu used the fallback", probes, fallbacks));
  detail(fmt("record encoding vs stored node features: max |diff| %.3g", worst_scaled));
  detail(fmt("vs receptive-field recomputation: max |diff| %.3g; vs whole-graph forward: %.3g (limit 1e-9)",
             worst_field, worst_full));
  const bool pass = worst_field <= 1e-9 && worst_full <= 1e-9 && worst_scaled <= 1e-12;
  return {pass ? Status::kPass : Status::kFail,
          fmt("100 probes x 4 models, max diff %.3g", std::max(worst_field, worst_full))};
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"graph_anchors", graph_anchors},   {"monotonicity", monotonicity},
    {"oracle_equivalence", oracle_equivalence}, {"gradient_suite", gradient_suite},
    {"training_sanity", training_sanity}, {"ordering", ordering},
    {"ablation", ablation},             {"determinism", determinism},
    {"inference", inference},
};

int run(const std::string& name, const std::function<Outcome()>& fn) {
  std::printf("[%s]\n", name.c_str());
  std::fflush(stdout);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {Status::kFail, std::string("error: ") + e.what()};
  }
  const char* tag = o.status == Status::kPass   ? "PASS"
                    : o.status == Status::kSkip ? "SKIP"
                    : o.status == Status::kFail ? "FAIL"
                                                : "FAIL (soft, deviation noted)";
  std::printf("%s %s: %s [%.1f s]\n", tag, name.c_str(), o.summary.c_str(), seconds_since(t0));
  std::fflush(stdout);
  return o.status == Status::kFail ? 1 : o.status == Status::kSkip ? 77 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string criterion = "all";
  std::vector<std::string> names = {"all"};
  for (const auto& [n, _] : kCriteria) names.push_back(n);
  app.add_option("--criterion", criterion, "criterion to run")->check(CLI::IsMember(names));
  CLI11_PARSE(app, argc, argv);

  if (criterion != "all") {
    for (const auto& [n, fn] : kCriteria)
      if (n == criterion) return run(n, fn);
  }
  int worst = 0;
  for (const auto& [n, fn] : kCriteria) {
    const int rc = run(n, fn);
    if (rc == 1) worst = 1;
  }
  return worst;
}
