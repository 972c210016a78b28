#include "triage/autograd/adam.hpp"

#include <cmath>
#include <string>

#include "triage/common/error.hpp"

namespace triage::ag {

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state) {
  require(params.size() == grads.size(), ErrorCode::kShapeMismatch,
          "parameter and gradient lists differ in length");
  for (std::size_t p = 0; p < params.size(); ++p) {
    require(params[p].shape() == grads[p].shape(), ErrorCode::kShapeMismatch,
            "gradient shape mismatch for parameter " + std::to_string(p));
    for (double g : grads[p].values)
      require(std::isfinite(g), ErrorCode::kNonFinite,
              "non-finite gradient for parameter " + std::to_string(p));
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.rows, p.cols);
      state.v.emplace_back(p.rows, p.cols);
    }
  }
  require(state.m.size() == params.size(), ErrorCode::kShapeMismatch,
          "optimizer state does not match parameters");

  const auto& c = state.config;
  ++state.t;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& theta = params[p].values;
    auto& m = state.m[p].values;
    auto& v = state.v[p].values;
    const auto& grad = grads[p].values;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i] + c.weight_decay * theta[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace triage::ag
