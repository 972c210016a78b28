#include "triage/gnn/spec.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "triage/common/error.hpp"

namespace triage::gnn {
namespace {

LayerSpec gcn(std::size_t in, std::size_t out, bool hidden) {
  LayerSpec l;
  l.kind = LayerKind::kGcn;
  l.in_dim = in;
  l.out_dim = out;
  l.activation_after = hidden;
  l.dropout_after = hidden;
  return l;
}

LayerSpec sage(std::size_t in, std::size_t out, Aggregator agg) {
  LayerSpec l;
  l.kind = LayerKind::kSage;
  l.in_dim = in;
  l.out_dim = out;
  l.aggregator = agg;
  return l;
}

// Hidden layers: ReLU everywhere, dropout only after the last one.
void finish_sage(ModelSpec& spec) {
  for (std::size_t i = 0; i + 1 < spec.layers.size(); ++i) spec.layers[i].activation_after = true;
  if (spec.layers.size() >= 2) spec.layers[spec.layers.size() - 2].dropout_after = true;
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kGcn: return "gcn";
    case LayerKind::kGatv2: return "gatv2";
    case LayerKind::kSage: return "sage";
  }
  return "?";
}

}  // namespace

bool ModelSpec::uses_sampling() const {
  return fan_out > 0 && std::any_of(layers.begin(), layers.end(), [](const LayerSpec& l) {
           return l.kind == LayerKind::kSage;
         });
}

ModelSpec gcn5() {
  ModelSpec s;
  s.name = "gcn5";
  s.layers = {gcn(16, 64, true), gcn(64, 64, true), gcn(64, 64, true), gcn(64, 64, true),
              gcn(64, 4, false)};
  return s;
}

ModelSpec gcn4() {
  ModelSpec s;
  s.name = "gcn4";
  s.layers = {gcn(16, 32, true), gcn(32, 32, true), gcn(32, 32, true), gcn(32, 4, false)};
  return s;
}

ModelSpec gat2() {
  ModelSpec s;
  s.name = "gat2";
  s.lr = 0.005;
  s.input_dropout = true;
  LayerSpec a;
  a.kind = LayerKind::kGatv2;
  a.in_dim = 16;
  a.out_dim = 8;
  a.heads = 4;
  a.concat_heads = true;
  a.activation_after = true;
  a.dropout_after = true;
  LayerSpec b = a;
  b.in_dim = 32;
  b.out_dim = 4;
  b.concat_heads = false;
  b.activation_after = false;
  b.dropout_after = false;
  s.layers = {a, b};
  return s;
}

ModelSpec sage5() {
  ModelSpec s;
  s.name = "sage5";
  s.layers = {sage(16, 64, Aggregator::kMax), sage(64, 32, Aggregator::kMax),
              sage(32, 16, Aggregator::kMean), sage(16, 8, Aggregator::kMax),
              sage(8, 4, Aggregator::kMax)};
  finish_sage(s);
  return s;
}

ModelSpec sage_ablation(const std::vector<int>& removed_layers, std::size_t width) {
  require(width > 0, ErrorCode::kInvalidArgument, "ablation width must be positive");
  std::vector<int> removed = removed_layers;
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  require(!removed.empty(), ErrorCode::kInvalidArgument, "ablation must remove a layer");
  for (int r : removed)
    require(r >= 2 && r <= 4, ErrorCode::kInvalidArgument,
            "only hidden layers 2, 3 and 4 can be removed");

  const ModelSpec base = sage5();
  ModelSpec s = base;
  s.name = "sage5-r";
  for (int r : removed) s.name += std::to_string(r);
  s.name += "-w" + std::to_string(width);
  s.layers.clear();
  for (std::size_t i = 0; i < base.layers.size(); ++i) {
    if (std::find(removed.begin(), removed.end(), static_cast<int>(i + 1)) != removed.end())
      continue;
    s.layers.push_back(sage(0, 0, base.layers[i].aggregator));
  }
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    s.layers[i].in_dim = i == 0 ? base.layers.front().in_dim : width;
    s.layers[i].out_dim = i + 1 == s.layers.size() ? base.layers.back().out_dim : width;
  }
  finish_sage(s);
  return s;
}

std::vector<ModelSpec> ablation_variants() {
  std::vector<ModelSpec> out;
  for (std::size_t width : {8, 64})
    for (const auto& removed : std::vector<std::vector<int>>{{2}, {3}, {4}, {2, 3, 4}})
      out.push_back(sage_ablation(removed, width));
  return out;
}

ModelSpec model_spec(std::string_view name) {
  if (name == "gcn5") return gcn5();
  if (name == "gcn4") return gcn4();
  if (name == "gat2") return gat2();
  if (name == "sage5") return sage5();
  constexpr std::string_view prefix = "sage5-r";
  if (name.substr(0, prefix.size()) == prefix) {
    const auto rest = name.substr(prefix.size());
    const auto dash = rest.find("-w");
    if (dash != std::string_view::npos && dash > 0) {
      std::vector<int> removed;
      for (char c : rest.substr(0, dash)) {
        if (c < '0' || c > '9') fail(ErrorCode::kInvalidArgument, "bad model name " + std::string(name));
        removed.push_back(c - '0');
      }
      std::size_t width = 0;
      const auto w = rest.substr(dash + 2);
      const auto res = std::from_chars(w.data(), w.data() + w.size(), width);
      if (res.ec == std::errc{} && res.ptr == w.data() + w.size())
        return sage_ablation(removed, width);
    }
  }
  fail(ErrorCode::kInvalidArgument, "unknown model " + std::string(name));
}

void validate(const ModelSpec& spec, std::size_t input_dim, std::size_t class_count) {
  require(!spec.layers.empty(), ErrorCode::kInvalidArgument, spec.name + ": no layers");
  require(spec.lr > 0.0, ErrorCode::kInvalidArgument, spec.name + ": lr must be positive");
  require(spec.dropout_rate >= 0.0 && spec.dropout_rate < 1.0, ErrorCode::kInvalidArgument,
          spec.name + ": dropout rate must be in [0,1)");
  std::size_t width = input_dim;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const std::string where = spec.name + " layer " + std::to_string(i + 1);
    require(l.in_dim > 0 && l.out_dim > 0 && l.heads >= 1, ErrorCode::kInvalidArgument,
            where + ": dims and heads must be positive");
    require(l.in_dim == width, ErrorCode::kShapeMismatch,
            where + ": expects " + std::to_string(l.in_dim) + " inputs, gets " +
                std::to_string(width));
    width = l.output_width();
  }
  require(width == class_count, ErrorCode::kShapeMismatch,
          spec.name + ": final width " + std::to_string(width) + " != " +
              std::to_string(class_count) + " classes");
}

std::string describe(const ModelSpec& spec) {
  std::string out = spec.name + ":";
  for (const auto& l : spec.layers) {
    out += " ";
    out += kind_name(l.kind);
    if (l.kind == LayerKind::kSage) out += l.aggregator == Aggregator::kMax ? "[max]" : "[mean]";
    out += "(" + std::to_string(l.in_dim) + "->" + std::to_string(l.output_width());
    if (l.kind == LayerKind::kGatv2)
      out += ", " + std::to_string(l.heads) + (l.concat_heads ? " heads concat" : " heads mean");
    out += ")";
    if (l.activation_after) out += " relu";
    if (l.dropout_after) out += " dropout";
  }
  return out;
}

}  // namespace triage::gnn
