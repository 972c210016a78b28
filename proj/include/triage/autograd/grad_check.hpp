#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "triage/autograd/tape.hpp"

namespace triage::ag {

struct GradCheckReport {
  bool passed = true;
  double max_error = 0.0;  // worst scaled error
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;

  std::string describe() const;
};

// Builds a scalar from tape variables created for `inputs`.
using ScalarFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

// Compares reverse-mode gradients against central differences,
//   |analytic - numeric| <= rtol * max(|analytic|, |numeric|, floor).
// The floor keeps round-off in near-zero gradients from registering as
// relative error.
GradCheckReport grad_check(const ScalarFunction& f, const std::vector<Tensor>& inputs,
                           double rtol = 1e-4, double h = 1e-5, double floor = 1e-3);

}  // namespace triage::ag
