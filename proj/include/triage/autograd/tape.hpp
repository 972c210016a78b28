#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "triage/autograd/tensor.hpp"

namespace triage::ag {

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; only valid while the
// tape lives and has not been reset.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Zero-filled tensor of the value's shape until backward touches it.
  const Tensor& grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records operations in execution order (hence topological order). One
// backward pass per recording; reset() clears everything.
class Tape {
 public:
  explicit Tape(bool training = false) : training_(training) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  // Seeds d(output)/d(output) = 1 (output must be 1 x 1) and runs every
  // recorded backward closure in reverse order.
  void backward(const Var& output);
  void reset();

  bool training() const { return training_; }
  void set_training(bool training) { training_ = training; }
  std::size_t size() const { return nodes_.size(); }

  // Op-author interface. The closure receives the tape and must accumulate
  // into parents through grad_mut(); it only runs when the node's gradient
  // is needed.
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  Var record(Tensor value, bool requires_grad, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  Tensor& grad_mut(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    mutable Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool training_ = false;
  bool backward_done_ = false;
};

}  // namespace triage::ag
