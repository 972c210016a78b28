#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "triage/autograd/tape.hpp"
#include "triage/gnn/spec.hpp"

namespace triage::gnn {

// Flat parameter list in layer order. Per layer:
//   gcn:   W (in x out), b (1 x out)
//   gatv2: W_src, W_dst (in x heads*out), att (heads x out), b (1 x width)
//   sage:  W_self, W_neigh (in x out), b (1 x out)
struct ParamSet {
  std::vector<std::string> names;
  std::vector<ag::Tensor> tensors;

  std::size_t scalar_count() const;
  friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

// Glorot-uniform weights, zero biases. Deterministic in `seed`.
ParamSet init_params(const ModelSpec& spec, std::uint64_t seed);

// Number of tensors each layer owns, in order.
std::size_t params_per_layer(LayerKind kind);

}  // namespace triage::gnn
