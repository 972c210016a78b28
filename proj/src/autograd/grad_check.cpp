#include "triage/autograd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "triage/common/error.hpp"

namespace triage::ag {
namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  const Var out = f(tape, vars);
  require(out.rows() == 1 && out.cols() == 1, ErrorCode::kShapeMismatch,
          "grad_check function must be scalar");
  return out.value().values[0];
}

}  // namespace

std::string GradCheckReport::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: worst error %.3e at input %zu index %zu (analytic %.10g, numeric %.10g)",
                passed ? "passed" : "FAILED", max_error, worst_input, worst_index, analytic,
                numeric);
  return buf;
}

GradCheckReport grad_check(const ScalarFunction& f, const std::vector<Tensor>& inputs,
                           double rtol, double h, double floor) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.parameter(t));
  const Var out = f(tape, vars);
  tape.backward(out);

  GradCheckReport report;
  std::vector<Tensor> probe = inputs;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const Tensor analytic = vars[a].grad();
    for (std::size_t i = 0; i < inputs[a].size(); ++i) {
      const double orig = probe[a].values[i];
      probe[a].values[i] = orig + h;
      const double up = evaluate(f, probe);
      probe[a].values[i] = orig - h;
      const double down = evaluate(f, probe);
      probe[a].values[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double an = analytic.values[i];
      const double scale = std::max({std::fabs(an), std::fabs(numeric), floor});
      const double err = std::fabs(an - numeric) / scale;
      if (err > report.max_error || (!std::isfinite(err) && report.passed)) {
        report.max_error = err;
        report.worst_input = a;
        report.worst_index = i;
        report.analytic = an;
        report.numeric = numeric;
      }
      if (!(err <= rtol)) report.passed = false;
    }
  }
  return report;
}

}  // namespace triage::ag
