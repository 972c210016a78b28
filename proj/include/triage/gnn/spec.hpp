#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace triage::gnn {

enum class LayerKind { kGcn, kGatv2, kSage };
enum class Aggregator { kMax, kMean };

struct LayerSpec {
  LayerKind kind = LayerKind::kGcn;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;  // per head for gatv2
  std::size_t heads = 1;
  bool concat_heads = true;  // gatv2: concatenate (true) or average heads
  Aggregator aggregator = Aggregator::kMax;
  bool activation_after = false;  // ReLU
  bool dropout_after = false;

  std::size_t output_width() const {
    return kind == LayerKind::kGatv2 && concat_heads ? out_dim * heads : out_dim;
  }
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  double lr = 0.01;
  double dropout_rate = 0.2;
  bool input_dropout = false;
  // GraphSAGE neighbour sampling. fan_out 0 means the full neighbourhood.
  std::size_t fan_out = 10;
  std::size_t batch_size = 3000;

  std::size_t depth() const { return layers.size(); }
  bool uses_sampling() const;
};

ModelSpec gcn5();
ModelSpec gcn4();
ModelSpec gat2();
ModelSpec sage5();

// "gcn5" | "gcn4" | "gat2" | "sage5" | ablation names from sage_ablation().
ModelSpec model_spec(std::string_view name);

// sage5 with the listed hidden layers (1-based, subset of {2,3,4}) removed
// and every hidden width set to `width`. Named "sage5-r<layers>-w<width>",
// e.g. "sage5-r234-w8".
ModelSpec sage_ablation(const std::vector<int>& removed_layers, std::size_t width);

// The eight variants: remove 2, 3, 4, and {2,3,4}, each at widths 8 and 64.
std::vector<ModelSpec> ablation_variants();

// Dim chain must run input_dim -> ... -> class_count with matching widths.
void validate(const ModelSpec& spec, std::size_t input_dim, std::size_t class_count);

std::string describe(const ModelSpec& spec);

}  // namespace triage::gnn
