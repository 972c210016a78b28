#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "triage/autograd/sparse.hpp"
#include "triage/autograd/tape.hpp"
#include "triage/common/random.hpp"

namespace triage::ag {

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
// a (r x c) + bias (1 x c) broadcast over rows.
Var add_bias(const Var& a, const Var& bias);
Var scale(const Var& a, double s);
Var mul(const Var& a, const Var& b);  // element-wise
Var sum(const Var& a);                // 1 x 1
Var concat_cols(const std::vector<Var>& parts);
// Gathers rows; repeated indices accumulate in backward.
Var slice_rows(const Var& a, const std::vector<std::uint32_t>& rows);
// Average of `blocks` equal-width column blocks: r x (c / blocks).
Var mean_column_blocks(const Var& a, std::size_t blocks);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope = 0.2);

// Inverted dropout. Identity unless the tape is in training mode.
Var dropout(const Var& x, double rate, Rng& rng);

Var log_softmax(const Var& x);
// Mean over rows with mask[i] != 0 of -log softmax(logits)[i, targets[i]].
// Throws kInvalidArgument when the mask selects nothing.
Var cross_entropy(const Var& logits, const std::vector<int>& targets,
                  const std::vector<std::uint8_t>& mask);

// The sparse operands of spmm, segment_max and gatv2_attention are held by
// reference until backward runs; keep them alive as long as the tape.

// S (rows x cols) times x (cols x f).
Var spmm(const SparseMatrix& s, const Var& x);

// Element-wise maximum over each row's neighbourhood in `pattern`; empty
// rows give zeros.
Var segment_max(const SparseMatrix& pattern, const Var& x);

// GATv2 attention. For destination u and head h:
//   e(u,v) = att_h . LeakyReLU(x_dst[u]_h + x_src[v]_h),  v in pattern row u
//   alpha  = softmax_v e(u, .)
//   out[u]_h = sum_v alpha(u,v) x_src[v]_h
// x_src and x_dst have heads * f columns (head-major); att is heads x f. The
// result concatenates heads. If `alpha_out` is given it receives the
// coefficients, edge-major with `heads` entries per pattern entry.
Var gatv2_attention(const SparseMatrix& pattern, const Var& x_src, const Var& x_dst,
                    const Var& att, std::size_t heads, double slope,
                    std::vector<double>* alpha_out = nullptr);

}  // namespace triage::ag
