#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "support/dense_oracle.hpp"
#include "support/fixtures.hpp"
#include "triage/autograd/ops.hpp"
#include "triage/common/error.hpp"
#include "triage/gnn/model.hpp"
#include "triage/gnn/params.hpp"
#include "triage/gnn/sampler.hpp"
#include "triage/gnn/spec.hpp"
#include "triage/simnet/attach.hpp"
#include "triage/simnet/view.hpp"

using namespace triage;
using namespace triage::gnn;

namespace {

std::vector<std::size_t> widths(const ModelSpec& s) {
  std::vector<std::size_t> w = {s.layers.front().in_dim};
  for (const auto& l : s.layers) w.push_back(l.output_width());
  return w;
}

// Random parameters with non-zero biases so bias handling is exercised.
ParamSet noisy_params(const ModelSpec& spec, std::uint64_t seed) {
  ParamSet p = init_params(spec, seed);
  Rng rng(seed + 99);
  for (std::size_t i = 0; i < p.tensors.size(); ++i)
    if (p.names[i].find("bias") != std::string::npos)
      for (double& v : p.tensors[i].values) v = 0.2 * (2 * rng.uniform() - 1);
  return p;
}

std::vector<std::uint32_t> iota_nodes(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

}  // namespace

TEST_CASE("model architectures") {
  CHECK(widths(gcn5()) == std::vector<std::size_t>{16, 64, 64, 64, 64, 4});
  CHECK(widths(gcn4()) == std::vector<std::size_t>{16, 32, 32, 32, 4});
  CHECK(widths(gat2()) == std::vector<std::size_t>{16, 32, 4});
  CHECK(gat2().layers[0].heads == 4);
  CHECK(gat2().layers[1].heads == 4);
  CHECK_FALSE(gat2().layers[1].concat_heads);
  CHECK(gat2().lr == 0.005);
  const auto s = sage5();
  CHECK(widths(s) == std::vector<std::size_t>{16, 64, 32, 16, 8, 4});
  const Aggregator agg[] = {Aggregator::kMax, Aggregator::kMax, Aggregator::kMean,
                            Aggregator::kMax, Aggregator::kMax};
  for (std::size_t l = 0; l < 5; ++l) CHECK(s.layers[l].aggregator == agg[l]);
  CHECK(s.uses_sampling());
  CHECK_FALSE(gcn5().uses_sampling());
  for (const auto& m : {gcn5(), gcn4(), gat2(), sage5()}) {
    validate(m, 16, 4);
    CHECK_FALSE(m.layers.back().activation_after);
    CHECK(model_spec(m.name).name == m.name);
  }
  CHECK_THROWS_AS(model_spec("mlp3"), Error);
  CHECK_THROWS_AS(validate(gcn5(), 12, 4), Error);
  CHECK(describe(gcn4()).find("gcn") != std::string::npos);
}

TEST_CASE("ablation variants") {
  const auto v = ablation_variants();
  REQUIRE(v.size() == 8);
  std::set<std::string> names;
  for (const auto& m : v) {
    names.insert(m.name);
    validate(m, 16, 4);
    CHECK(model_spec(m.name).layers.size() == m.layers.size());
  }
  CHECK(names.size() == 8);
  const auto r234 = sage_ablation({2, 3, 4}, 8);
  CHECK(r234.name == "sage5-r234-w8");
  CHECK(widths(r234) == std::vector<std::size_t>{16, 8, 4});
  CHECK(r234.layers[0].aggregator == Aggregator::kMax);
  CHECK(r234.layers[0].dropout_after);
  const auto r3 = sage_ablation({3}, 64);
  CHECK(widths(r3) == std::vector<std::size_t>{16, 64, 64, 64, 4});
  // layers 1, 2, 4, 5 keep their aggregators
  CHECK(r3.layers[2].aggregator == Aggregator::kMax);
  const auto r2 = sage_ablation({2}, 8);
  CHECK(r2.layers[1].aggregator == Aggregator::kMean);
  CHECK(r2.layers[2].dropout_after);
  CHECK_FALSE(r2.layers[0].dropout_after);
  CHECK_THROWS_AS(sage_ablation({1}, 8), Error);
  CHECK_THROWS_AS(sage_ablation({2}, 0), Error);
}

TEST_CASE("parameter initialization") {
  const auto p = init_params(gcn5(), 3);
  REQUIRE(p.tensors.size() == 10);
  CHECK(p.tensors[0].size() + p.tensors[1].size() == 1024 + 64);
  CHECK(p.scalar_count() == (16 * 64 + 64) + 3 * (64 * 64 + 64) + (64 * 4 + 4));
  const double bound = std::sqrt(6.0 / (16 + 64));
  double lo = 1, hi = -1;
  for (double v : p.tensors[0].values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= -bound);
  CHECK(hi <= bound);
  CHECK(lo < -0.8 * bound);
  CHECK(hi > 0.8 * bound);
  for (double v : p.tensors[1].values) CHECK(v == 0.0);
  CHECK(init_params(gcn5(), 3) == p);
  CHECK_FALSE(init_params(gcn5(), 4) == p);

  const auto g = init_params(gat2(), 1);
  CHECK(g.tensors.size() == 8);
  CHECK(g.tensors[0].shape() == std::array<std::size_t, 2>{16, 32});
  CHECK(g.tensors[2].shape() == std::array<std::size_t, 2>{4, 8});
  CHECK(g.tensors[7].shape() == std::array<std::size_t, 2>{1, 4});
  CHECK(init_params(sage5(), 1).tensors.size() == 15);
  CHECK(params_per_layer(LayerKind::kSage) == 3);
}

TEST_CASE("gcn layer on a 3-node path by hand") {
  // 0 - 1 - 2, degrees with self loops 2, 3, 2
  ingest::FeatureMatrix x;
  x.n = 3;
  x.d = 1;
  x.values = {1, 2, 3};
  const auto g = fixtures::graph_from_edges(3, {{0, 1}, {1, 2}}, x, {0, 1, 2});
  simnet::FullGraphView view(g);
  ModelSpec spec;
  spec.name = "one";
  spec.layers = {LayerSpec{LayerKind::kGcn, 1, 1}};
  const auto block = build_block(spec, view, {0, 1, 2}, {});
  ag::Tape tape;
  auto out = gcn_layer(block.blocks[0], tape.constant(gather_features(view, block.input_nodes)),
                       tape.constant(ag::Tensor(1, 1, {1.0})), tape.constant(ag::Tensor(1, 1, {0.5})));
  const double s6 = std::sqrt(6.0);
  CHECK(out.value().at(0, 0) == doctest::Approx(1.0 / 2 + 2 / s6 + 0.5));
  CHECK(out.value().at(1, 0) == doctest::Approx(1 / s6 + 2.0 / 3 + 3 / s6 + 0.5));
  CHECK(out.value().at(2, 0) == doctest::Approx(2 / s6 + 3.0 / 2 + 0.5));
}

TEST_CASE("gcn models equal the dense oracle") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto g = fixtures::random_graph(50, 0.08, 16, seed);
    simnet::FullGraphView view(g);
    for (const auto& spec : {gcn5(), gcn4()}) {
      const auto p = noisy_params(spec, seed);
      const auto got = predict_logits(spec, p, view, {});
      CHECK(oracle::max_rel_diff(got, oracle::gcn_forward(spec, p, view)) <= 1e-12);
    }
  }
}

TEST_CASE("gat2 equals the explicit-loop oracle") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto g = fixtures::random_graph(40, 0.1, 16, seed + 10);
    simnet::FullGraphView view(g);
    const auto spec = gat2();
    const auto p = noisy_params(spec, seed);
    CHECK(oracle::max_rel_diff(predict_logits(spec, p, view, {}), oracle::gat_forward(spec, p, view)) <=
          1e-12);
  }
}

TEST_CASE("gatv2 star graph attention") {
  // centre 0 with leaves 1..4; attention rows sum to one and match the oracle
  ingest::FeatureMatrix x = fixtures::random_features(5, 3, 4);
  const auto g = fixtures::graph_from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, x, {0, 0, 0, 0, 0});
  simnet::FullGraphView view(g);
  ModelSpec spec;
  spec.name = "star";
  LayerSpec l{LayerKind::kGatv2, 3, 2};
  l.heads = 1;
  spec.layers = {l};
  const auto p = noisy_params(spec, 8);
  const auto block = build_block(spec, view, iota_nodes(5), {});
  ag::Tape tape;
  const auto vars = bind_params(tape, p, false);
  std::vector<double> alpha;
  auto out = gatv2_layer(l, block.blocks[0], tape.constant(gather_features(view, block.input_nodes)),
                         vars[0], vars[1], vars[2], vars[3], &alpha);
  oracle::Mat alpha_rows;
  const auto expect = oracle::gatv2_layer(l, oracle::features(view), oracle::adjacency(view),
                                          oracle::to_mat(p.tensors[0]), oracle::to_mat(p.tensors[1]),
                                          oracle::to_mat(p.tensors[2]), oracle::to_mat(p.tensors[3]),
                                          &alpha_rows);
  CHECK(oracle::max_rel_diff(out.value(), expect) <= 1e-12);
  const auto& op = *block.blocks[0].op;
  REQUIRE(op.row_size(0) == 5);
  for (std::size_t u = 0; u < 5; ++u) {
    double total = 0;
    for (auto e = op.offsets[u]; e < op.offsets[u + 1]; ++e) {
      total += alpha[e];
      CHECK(alpha[e] == doctest::Approx(alpha_rows[u][e - op.offsets[u]]).epsilon(1e-12));
    }
    CHECK(total == doctest::Approx(1.0));
  }
  // zero attention vector: the centre averages its closed neighbourhood
  auto p0 = p;
  for (double& v : p0.tensors[2].values) v = 0.0;
  const auto uni = predict_logits(spec, p0, view, {});
  const auto xs = oracle::matmul(oracle::features(view), oracle::to_mat(p.tensors[0]));
  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0;
    for (std::size_t v = 0; v < 5; ++v) mean += xs[v][j] / 5;
    CHECK(uni.at(0, j) == doctest::Approx(mean + p.tensors[3].at(0, j)));
  }
}

TEST_CASE("sage layers by hand") {
  ingest::FeatureMatrix x;
  x.n = 4;
  x.d = 2;
  x.values = {1, 0, 3, -1, 5, 2, 7, 7};
  // 0 - 1, 0 - 2, node 3 isolated
  const auto g = fixtures::graph_from_edges(4, {{0, 1}, {0, 2}}, x, {0, 0, 0, 0});
  simnet::FullGraphView view(g);
  for (Aggregator agg : {Aggregator::kMean, Aggregator::kMax}) {
    ModelSpec spec;
    spec.name = "s";
    LayerSpec l{LayerKind::kSage, 2, 2};
    l.aggregator = agg;
    spec.layers = {l};
    ParamSet p;
    p.names = {"ws", "wn", "b"};
    p.tensors = {ag::Tensor::identity(2), ag::Tensor(2, 2, {2, 0, 0, 2}), ag::Tensor(1, 2, {0.5, 0.5})};
    const auto out = predict_logits(spec, p, view, {});
    // node 0: self (1,0) + 2 * agg{(3,-1),(5,2)} + 0.5
    if (agg == Aggregator::kMean) {
      CHECK(out.at(0, 0) == doctest::Approx(1 + 2 * 4 + 0.5));
      CHECK(out.at(0, 1) == doctest::Approx(0 + 2 * 0.5 + 0.5));
    } else {
      CHECK(out.at(0, 0) == doctest::Approx(1 + 2 * 5 + 0.5));
      CHECK(out.at(0, 1) == doctest::Approx(0 + 2 * 2 + 0.5));
    }
    CHECK(out.at(1, 0) == doctest::Approx(3 + 2 * 1 + 0.5));
    // empty neighbourhood aggregates to zero
    CHECK(out.at(3, 0) == doctest::Approx(7.5));
    CHECK(out.at(3, 1) == doctest::Approx(7.5));
  }
}

TEST_CASE("sage5 full-neighbourhood forward equals the oracle") {
  const auto g = fixtures::random_graph(45, 0.1, 16, 31);
  simnet::FullGraphView view(g);
  const auto spec = sage5();
  const auto p = noisy_params(spec, 2);
  const auto got = predict_logits(spec, p, view, {0, 0});
  CHECK(oracle::max_rel_diff(got, oracle::sage_forward(spec, p, view, oracle::full_neighbourhoods(view, 5))) <=
        1e-12);
}

TEST_CASE("sampled sage5 forward equals the oracle on the sampled neighbourhoods") {
  const auto g = fixtures::random_graph(80, 0.25, 16, 41);
  simnet::FullGraphView view(g);
  CHECK(g.max_degree() > 10);
  const auto spec = sage5();
  const auto p = noisy_params(spec, 3);
  const Sampling s{10, 1234};
  std::vector<std::vector<std::vector<std::uint32_t>>> nbs(5, std::vector<std::vector<std::uint32_t>>(g.n));
  std::vector<std::uint32_t> scratch;
  for (std::size_t l = 0; l < 5; ++l)
    for (std::size_t u = 0; u < g.n; ++u) {
      sample_neighbors(view, u, l, s, scratch, nbs[l][u]);
      CHECK(nbs[l][u].size() == std::min<std::size_t>(10, g.degree(u)));
    }
  CHECK(oracle::max_rel_diff(predict_logits(spec, p, view, s), oracle::sage_forward(spec, p, view, nbs)) <=
        1e-12);
}

TEST_CASE("neighbour sampler properties") {
  const auto g = fixtures::random_graph(60, 0.5, 4, 7);
  simnet::FullGraphView view(g);
  std::vector<std::uint32_t> scratch, a, b, full;
  for (std::size_t u = 0; u < g.n; ++u) {
    view.neighbors(u, full);
    sample_neighbors(view, u, 1, {10, 5}, scratch, a);
    CHECK(a.size() == std::min<std::size_t>(10, full.size()));
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
    CHECK(std::includes(full.begin(), full.end(), a.begin(), a.end()));
    sample_neighbors(view, u, 1, {10, 5}, scratch, b);
    CHECK(a == b);
    sample_neighbors(view, u, 1, {0, 5}, scratch, b);
    CHECK(b == full);
  }
  // different layers and seeds draw different samples somewhere
  bool layer_differs = false, seed_differs = false;
  for (std::size_t u = 0; u < g.n; ++u) {
    sample_neighbors(view, u, 1, {10, 5}, scratch, a);
    sample_neighbors(view, u, 2, {10, 5}, scratch, b);
    layer_differs = layer_differs || a != b;
    sample_neighbors(view, u, 1, {10, 6}, scratch, b);
    seed_differs = seed_differs || a != b;
  }
  CHECK(layer_differs);
  CHECK(seed_differs);
}

TEST_CASE("sampler golden output") {
  // Pins the sampling stream: any change here changes every sampled model.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t v = 1; v <= 30; ++v) edges.emplace_back(0, v);
  const auto g = fixtures::graph_from_edges(31, edges, fixtures::random_features(31, 2, 1),
                                            ingest::LabelVector(31, 0));
  simnet::FullGraphView view(g);
  std::vector<std::uint32_t> scratch, out;
  sample_neighbors(view, 0, 0, {5, 42}, scratch, out);
  CHECK(out == std::vector<std::uint32_t>{5, 11, 15, 25, 29});
  sample_neighbors(view, 0, 3, {5, 42}, scratch, out);
  CHECK(out == std::vector<std::uint32_t>{16, 23, 25, 26, 30});
}

TEST_CASE("blocks: destinations prefix sources and the field is minimal") {
  const auto g = fixtures::random_graph(100, 0.04, 16, 3);
  simnet::FullGraphView view(g);
  const auto spec = sage5();
  const Sampling s{3, 9};
  const auto blk = build_block(spec, view, {17, 4, 60}, s);
  REQUIRE(blk.hops() == 5);
  CHECK(blk.blocks.back().num_dst == 3);
  CHECK(std::vector<std::uint32_t>(blk.blocks.back().src_nodes.begin(),
                                   blk.blocks.back().src_nodes.begin() + 3) ==
        std::vector<std::uint32_t>{17, 4, 60});
  for (std::size_t l = 0; l + 1 < blk.hops(); ++l) {
    CHECK(blk.blocks[l].num_dst == blk.blocks[l + 1].num_src);
    CHECK(std::equal(blk.blocks[l + 1].src_nodes.begin(), blk.blocks[l + 1].src_nodes.end(),
                     blk.blocks[l].src_nodes.begin()));
  }
  CHECK(blk.input_nodes == blk.blocks.front().src_nodes);
  CHECK_THROWS_AS(build_block(spec, view, {1, 1}, s), Error);
  CHECK_THROWS_AS(build_block(spec, view, {}, s), Error);
  CHECK_THROWS_AS(build_block(spec, view, {1000}, s), Error);

  // full-graph gcn forwards share one operator across layers
  const auto full = build_block(gcn5(), view, iota_nodes(g.n), {});
  for (std::size_t l = 1; l < full.hops(); ++l) CHECK(full.blocks[l].op == full.blocks[0].op);
}

TEST_CASE("receptive-field forwards equal full forwards") {
  const auto g = fixtures::random_graph(120, 0.06, 16, 5);
  simnet::FullGraphView view(g);
  for (const auto& spec : {gcn4(), gat2(), sage5()}) {
    const auto p = noisy_params(spec, 5);
    const Sampling s{3, 77};
    const auto full = predict_logits(spec, p, view, s);
    const std::vector<std::uint32_t> probe = {5, 99, 0, 64};
    const auto part = predict_logits(spec, p, view, s, probe);
    for (std::size_t i = 0; i < probe.size(); ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(part.at(i, j) == full.at(probe[i], j));
  }
}

TEST_CASE("permutation equivariance") {
  const auto g = fixtures::random_graph(20, 0.2, 16, 13);
  Rng rng(2);
  std::vector<std::uint32_t> perm = iota_nodes(20);  // new id of old node
  rng.shuffle(perm.begin(), perm.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t u = 0; u < 20; ++u)
    for (auto v : g.neighbors(u))
      if (u < v) edges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
  auto x = g.features;
  ingest::LabelVector y(20);
  for (std::uint32_t u = 0; u < 20; ++u) {
    std::copy(g.features.row(u), g.features.row(u) + 16, x.row(perm[u]));
    y[perm[u]] = g.labels[u];
  }
  const auto h = fixtures::graph_from_edges(20, edges, x, y);
  simnet::FullGraphView va(g), vb(h);
  for (const auto& spec : {gcn5(), gat2(), sage5()}) {
    const auto p = noisy_params(spec, 6);
    const auto a = predict_logits(spec, p, va, {0, 0});
    const auto b = predict_logits(spec, p, vb, {0, 0});
    for (std::uint32_t u = 0; u < 20; ++u)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(a.at(u, j) == doctest::Approx(b.at(perm[u], j)).epsilon(1e-12));
  }
}

TEST_CASE("log probabilities normalize") {
  const auto g = fixtures::random_graph(30, 0.1, 16, 2);
  simnet::FullGraphView view(g);
  const auto lp = predict_log_proba(gcn4(), init_params(gcn4(), 1), view, {});
  for (std::size_t i = 0; i < lp.rows; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < lp.cols; ++j) s += std::exp(lp.at(i, j));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("training forward applies dropout and requires an rng") {
  const auto g = fixtures::random_graph(30, 0.1, 16, 2);
  simnet::FullGraphView view(g);
  const auto spec = gcn4();
  const auto p = init_params(spec, 1);
  const auto blk = build_block(spec, view, iota_nodes(30), {});
  ag::Tape train(true);
  const auto vars = bind_params(train, p, true);
  const auto x = train.constant(gather_features(view, blk.input_nodes));
  CHECK_THROWS_AS(model_forward(spec, vars, blk, x, nullptr), Error);
  Rng rng(1);
  const auto out = model_forward(spec, vars, blk, x, &rng);
  CHECK_FALSE(out.value() == predict_logits(spec, p, view, {}));
  train.backward(ag::sum(out));
  CHECK(vars[0].grad().size() == 16 * 32);
}

TEST_CASE("a node without neighbours attends only to itself") {
  const auto x = fixtures::random_features(4, 3, 6);
  const auto g = fixtures::graph_from_edges(4, {{0, 1}, {1, 2}}, x, {0, 0, 0, 0});
  simnet::FullGraphView view(g);
  ModelSpec spec;
  spec.name = "lonely";
  LayerSpec l{LayerKind::kGatv2, 3, 2};
  l.heads = 2;
  spec.layers = {l};
  const auto p = noisy_params(spec, 5);
  const auto block = build_block(spec, view, iota_nodes(4), {});
  ag::Tape tape;
  const auto vars = bind_params(tape, p, false);
  std::vector<double> alpha;
  gatv2_layer(l, block.blocks[0], tape.constant(gather_features(view, block.input_nodes)), vars[0],
              vars[1], vars[2], vars[3], &alpha);
  const auto& op = *block.blocks[0].op;
  REQUIRE(op.row_size(3) == 1);
  for (std::size_t h = 0; h < 2; ++h) CHECK(alpha[op.offsets[3] * 2 + h] == 1.0);
}

TEST_CASE("untrained models give finite n x 4 logits") {
  const auto g = fixtures::random_graph(60, 0.1, 16, 77);
  simnet::FullGraphView view(g);
  for (const auto& spec : {gcn5(), gcn4(), gat2(), sage5()}) {
    const auto logits = predict_logits(spec, init_params(spec, 1), view, {10, 1});
    CHECK(logits.rows == 60);
    CHECK(logits.cols == 4);
    for (double v : logits.values) CHECK(std::isfinite(v));
  }
}
