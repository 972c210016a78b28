#include "triage/gnn/params.hpp"

#include <cmath>

#include "triage/common/random.hpp"

namespace triage::gnn {
namespace {

ag::Tensor glorot(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                  Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  ag::Tensor t(rows, cols);
  for (double& v : t.values) v = (2.0 * rng.uniform() - 1.0) * bound;
  return t;
}

}  // namespace

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

std::size_t params_per_layer(LayerKind kind) {
  switch (kind) {
    case LayerKind::kGcn: return 2;
    case LayerKind::kGatv2: return 4;
    case LayerKind::kSage: return 3;
  }
  return 0;
}

ParamSet init_params(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x1417));
  ParamSet p;
  auto add = [&p](std::string name, ag::Tensor t) {
    p.names.push_back(std::move(name));
    p.tensors.push_back(std::move(t));
  };
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const std::string prefix = "layer" + std::to_string(i + 1) + ".";
    switch (l.kind) {
      case LayerKind::kGcn:
        add(prefix + "weight", glorot(l.in_dim, l.out_dim, l.in_dim, l.out_dim, rng));
        add(prefix + "bias", ag::Tensor(1, l.out_dim));
        break;
      case LayerKind::kGatv2: {
        const std::size_t proj = l.heads * l.out_dim;
        add(prefix + "weight_src", glorot(l.in_dim, proj, l.in_dim, proj, rng));
        add(prefix + "weight_dst", glorot(l.in_dim, proj, l.in_dim, proj, rng));
        add(prefix + "attention", glorot(l.heads, l.out_dim, l.out_dim, 1, rng));
        add(prefix + "bias", ag::Tensor(1, l.output_width()));
        break;
      }
      case LayerKind::kSage:
        add(prefix + "weight_self", glorot(l.in_dim, l.out_dim, l.in_dim, l.out_dim, rng));
        add(prefix + "weight_neigh", glorot(l.in_dim, l.out_dim, l.in_dim, l.out_dim, rng));
        add(prefix + "bias", ag::Tensor(1, l.out_dim));
        break;
    }
  }
  return p;
}

}  // namespace triage::gnn
