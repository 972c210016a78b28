#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace triage::ag {

// Dense row-major matrix of doubles. Vectors are 1 x n or n x 1; scalars
// are 1 x 1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  Tensor(std::size_t r, std::size_t c, std::vector<double> v);
  Tensor(std::size_t r, std::size_t c, std::initializer_list<double> v)
      : Tensor(r, c, std::vector<double>(v)) {}

  static Tensor identity(std::size_t n);

  std::array<std::size_t, 2> shape() const { return {rows, cols}; }
  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double* row(std::size_t i) { return values.data() + i * cols; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

}  // namespace triage::ag
