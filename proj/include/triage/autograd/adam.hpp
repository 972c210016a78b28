#pragma once

#include <cstdint>
#include <vector>

#include "triage/autograd/tensor.hpp"

namespace triage::ag {

struct AdamConfig {
  double lr = 0.01;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

// Adam with bias correction. Weight decay is coupled: g <- g + wd * theta
// before the moment updates. Throws kNonFinite on a NaN/inf gradient.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state);

}  // namespace triage::ag
