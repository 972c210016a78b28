#include "triage/autograd/tape.hpp"

#include <string>

#include "triage/common/error.hpp"

namespace triage::ag {

Tensor::Tensor(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  require(values.size() == rows * cols, ErrorCode::kShapeMismatch,
          "tensor values do not match shape " + std::to_string(r) + "x" + std::to_string(c));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) { return record(std::move(value), false, nullptr); }

Var Tape::parameter(Tensor value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Tensor value, bool requires_grad, BackwardFn backward) {
  require(!backward_done_, ErrorCode::kInvalidArgument,
          "tape already ran backward; reset() before recording again");
  nodes_.push_back(Node{std::move(value), Tensor{}, requires_grad,
                        requires_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& node = nodes_[id];
  if (node.grad.values.size() != node.value.values.size())
    node.grad = Tensor(node.value.rows, node.value.cols);
  return node.grad;
}

Tensor& Tape::grad_mut(std::size_t id) {
  grad(id);
  return nodes_[id].grad;
}

void Tape::backward(const Var& output) {
  require(output.tape() == this, ErrorCode::kInvalidArgument, "variable belongs to another tape");
  require(!backward_done_, ErrorCode::kInvalidArgument, "backward already ran on this tape");
  const Tensor& out = nodes_[output.id()].value;
  require(out.rows == 1 && out.cols == 1, ErrorCode::kShapeMismatch,
          "backward needs a 1x1 output");
  backward_done_ = true;
  if (!nodes_[output.id()].requires_grad) return;
  grad_mut(output.id()).values[0] += 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.backward || node.grad.values.empty()) continue;
    node.backward(*this, id);
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace triage::ag
