#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace triage::ag {

// rows x cols sparse matrix in CSR form. Used both as a weighted operator
// (spmm) and as a neighbourhood pattern (segment_max, attention) where the
// values are ignored.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint64_t> offsets{0};
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  std::size_t row_size(std::size_t r) const {
    return static_cast<std::size_t>(offsets[r + 1] - offsets[r]);
  }
};

}  // namespace triage::ag
