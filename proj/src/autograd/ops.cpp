#include "triage/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "triage/common/error.hpp"
#include "triage/simd/kernels.hpp"

namespace triage::ag {
namespace {

const simd::KernelTable& K() { return simd::active_kernels(); }

void same_tape(const Var& a, const Var& b) {
  require(a.valid() && a.tape() == b.tape(), ErrorCode::kInvalidArgument,
          "variables from different tapes");
}

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.cols == B.rows, ErrorCode::kShapeMismatch,
          "matmul " + shape_str(A) + " by " + shape_str(B));
  Tensor C(A.rows, B.cols);
  const auto& k = K();
  for (std::size_t i = 0; i < A.rows; ++i) {
    const double* ar = A.row(i);
    double* cr = C.row(i);
    for (std::size_t j = 0; j < A.cols; ++j) {
      if (ar[j] != 0.0) k.axpy(ar[j], B.row(j), cr, B.cols);
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  Tape& tape = *a.tape();
  return tape.record(std::move(C), a.requires_grad() || b.requires_grad(),
                     [ia, ib](Tape& t, std::size_t self) {
                       const Tensor& G = t.grad(self);
                       const Tensor& A = t.value(ia);
                       const Tensor& B = t.value(ib);
                       const auto& k = K();
                       if (t.requires_grad(ia)) {
                         Tensor& GA = t.grad_mut(ia);
                         for (std::size_t i = 0; i < A.rows; ++i)
                           for (std::size_t j = 0; j < A.cols; ++j)
                             GA.at(i, j) += k.dot(G.row(i), B.row(j), B.cols);
                       }
                       if (t.requires_grad(ib)) {
                         Tensor& GB = t.grad_mut(ib);
                         for (std::size_t i = 0; i < A.rows; ++i)
                           for (std::size_t j = 0; j < A.cols; ++j)
                             if (A.at(i, j) != 0.0) k.axpy(A.at(i, j), G.row(i), GB.row(j), B.cols);
                       }
                     });
}

Var add(const Var& a, const Var& b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.shape() == B.shape(), ErrorCode::kShapeMismatch,
          "add " + shape_str(A) + " and " + shape_str(B));
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.values[i] += B.values[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(C), a.requires_grad() || b.requires_grad(),
                          [ia, ib](Tape& t, std::size_t self) {
                            const Tensor& G = t.grad(self);
                            for (std::size_t p : {ia, ib}) {
                              if (!t.requires_grad(p)) continue;
                              Tensor& GP = t.grad_mut(p);
                              for (std::size_t i = 0; i < G.size(); ++i) GP.values[i] += G.values[i];
                            }
                          });
}

Var add_bias(const Var& a, const Var& bias) {
  same_tape(a, bias);
  const Tensor& A = a.value();
  const Tensor& b = bias.value();
  require(b.rows == 1 && b.cols == A.cols, ErrorCode::kShapeMismatch,
          "bias " + shape_str(b) + " for " + shape_str(A));
  Tensor C = A;
  for (std::size_t i = 0; i < C.rows; ++i)
    for (std::size_t j = 0; j < C.cols; ++j) C.at(i, j) += b.values[j];
  const std::size_t ia = a.id(), ib = bias.id();
  return a.tape()->record(std::move(C), a.requires_grad() || bias.requires_grad(),
                          [ia, ib](Tape& t, std::size_t self) {
                            const Tensor& G = t.grad(self);
                            if (t.requires_grad(ia)) {
                              Tensor& GA = t.grad_mut(ia);
                              for (std::size_t i = 0; i < G.size(); ++i) GA.values[i] += G.values[i];
                            }
                            if (t.requires_grad(ib)) {
                              Tensor& GB = t.grad_mut(ib);
                              for (std::size_t i = 0; i < G.rows; ++i)
                                for (std::size_t j = 0; j < G.cols; ++j) GB.values[j] += G.at(i, j);
                            }
                          });
}

Var scale(const Var& a, double s) {
  Tensor C = a.value();
  for (double& v : C.values) v *= s;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(C), a.requires_grad(), [ia, s](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GA = t.grad_mut(ia);
    for (std::size_t i = 0; i < G.size(); ++i) GA.values[i] += s * G.values[i];
  });
}

Var mul(const Var& a, const Var& b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require(A.shape() == B.shape(), ErrorCode::kShapeMismatch,
          "mul " + shape_str(A) + " and " + shape_str(B));
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C.values[i] *= B.values[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(C), a.requires_grad() || b.requires_grad(),
                          [ia, ib](Tape& t, std::size_t self) {
                            const Tensor& G = t.grad(self);
                            const Tensor& A = t.value(ia);
                            const Tensor& B = t.value(ib);
                            if (t.requires_grad(ia)) {
                              Tensor& GA = t.grad_mut(ia);
                              for (std::size_t i = 0; i < G.size(); ++i) GA.values[i] += G.values[i] * B.values[i];
                            }
                            if (t.requires_grad(ib)) {
                              Tensor& GB = t.grad_mut(ib);
                              for (std::size_t i = 0; i < G.size(); ++i) GB.values[i] += G.values[i] * A.values[i];
                            }
                          });
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().values) total += v;
  const std::size_t ia = a.id();
  return a.tape()->record(Tensor(1, 1, total), a.requires_grad(),
                          [ia](Tape& t, std::size_t self) {
                            const double g = t.grad(self).values[0];
                            for (double& v : t.grad_mut(ia).values) v += g;
                          });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), ErrorCode::kInvalidArgument, "concat of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool needs = false;
  std::vector<std::size_t> ids, widths;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    require(p.rows() == rows, ErrorCode::kShapeMismatch, "concat row mismatch");
    cols += p.cols();
    needs = needs || p.requires_grad();
    ids.push_back(p.id());
    widths.push_back(p.cols());
  }
  Tensor C(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Tensor& P = p.value();
    for (std::size_t i = 0; i < rows; ++i) std::copy(P.row(i), P.row(i) + P.cols, C.row(i) + off);
    off += P.cols;
  }
  return parts.front().tape()->record(std::move(C), needs, [ids, widths](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        Tensor& GP = t.grad_mut(ids[k]);
        for (std::size_t i = 0; i < G.rows; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j) GP.at(i, j) += G.at(i, off + j);
      }
      off += widths[k];
    }
  });
}

Var slice_rows(const Var& a, const std::vector<std::uint32_t>& rows) {
  const Tensor& A = a.value();
  Tensor C(rows.size(), A.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    require(rows[r] < A.rows, ErrorCode::kShapeMismatch, "slice_rows index out of range");
    std::copy(A.row(rows[r]), A.row(rows[r]) + A.cols, C.row(r));
  }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(C), a.requires_grad(), [ia, rows](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GA = t.grad_mut(ia);
    for (std::size_t r = 0; r < rows.size(); ++r) K().axpy(1.0, G.row(r), GA.row(rows[r]), G.cols);
  });
}

Var mean_column_blocks(const Var& a, std::size_t blocks) {
  const Tensor& A = a.value();
  require(blocks > 0 && A.cols % blocks == 0, ErrorCode::kShapeMismatch,
          "columns not divisible into blocks");
  const std::size_t w = A.cols / blocks;
  Tensor C(A.rows, w);
  for (std::size_t i = 0; i < A.rows; ++i)
    for (std::size_t j = 0; j < w; ++j) {
      double s = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) s += A.at(i, b * w + j);
      C.at(i, j) = s / static_cast<double>(blocks);
    }
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(C), a.requires_grad(), [ia, blocks, w](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GA = t.grad_mut(ia);
    const double inv = 1.0 / static_cast<double>(blocks);
    for (std::size_t i = 0; i < G.rows; ++i)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t b = 0; b < blocks; ++b) GA.at(i, b * w + j) += G.at(i, j) * inv;
  });
}

Var relu(const Var& x) {
  Tensor C = x.value();
  for (double& v : C.values) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(C), x.requires_grad(), [ix](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    const Tensor& X = t.value(ix);
    Tensor& GX = t.grad_mut(ix);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (X.values[i] > 0.0) GX.values[i] += G.values[i];
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor C = x.value();
  for (double& v : C.values) v = v > 0.0 ? v : slope * v;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(C), x.requires_grad(), [ix, slope](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    const Tensor& X = t.value(ix);
    Tensor& GX = t.grad_mut(ix);
    for (std::size_t i = 0; i < G.size(); ++i)
      GX.values[i] += X.values[i] > 0.0 ? G.values[i] : slope * G.values[i];
  });
}

Var dropout(const Var& x, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, ErrorCode::kInvalidArgument, "dropout rate must be in [0,1)");
  if (!x.tape()->training() || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.value().size());
  Tensor C = x.value();
  for (std::size_t i = 0; i < C.size(); ++i) {
    (*mask)[i] = rng.uniform() >= rate ? keep_scale : 0.0;
    C.values[i] *= (*mask)[i];
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(C), x.requires_grad(), [ix, mask](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GX = t.grad_mut(ix);
    for (std::size_t i = 0; i < G.size(); ++i) GX.values[i] += G.values[i] * (*mask)[i];
  });
}

Var log_softmax(const Var& x) {
  const Tensor& X = x.value();
  Tensor C(X.rows, X.cols);
  for (std::size_t i = 0; i < X.rows; ++i) {
    const double* r = X.row(i);
    const double mx = *std::max_element(r, r + X.cols);
    double s = 0.0;
    for (std::size_t j = 0; j < X.cols; ++j) s += std::exp(r[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < X.cols; ++j) C.at(i, j) = r[j] - lse;
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(C), x.requires_grad(), [ix](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    const Tensor& Y = t.value(self);
    Tensor& GX = t.grad_mut(ix);
    for (std::size_t i = 0; i < G.rows; ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < G.cols; ++j) gs += G.at(i, j);
      for (std::size_t j = 0; j < G.cols; ++j) GX.at(i, j) += G.at(i, j) - std::exp(Y.at(i, j)) * gs;
    }
  });
}

Var cross_entropy(const Var& logits, const std::vector<int>& targets,
                  const std::vector<std::uint8_t>& mask) {
  const Tensor& Z = logits.value();
  require(targets.size() == Z.rows && mask.size() == Z.rows, ErrorCode::kShapeMismatch,
          "targets/mask do not match logits rows");
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < Z.rows; ++i)
    if (mask[i] != 0) rows.push_back(static_cast<std::uint32_t>(i));
  require(!rows.empty(), ErrorCode::kInvalidArgument, "cross_entropy with empty mask");
  auto probs = std::make_shared<Tensor>(rows.size(), Z.cols);
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const int target = targets[i];
    require(target >= 0 && static_cast<std::size_t>(target) < Z.cols, ErrorCode::kInvalidArgument,
            "target class out of range");
    const double* z = Z.row(i);
    const double mx = *std::max_element(z, z + Z.cols);
    double s = 0.0;
    for (std::size_t j = 0; j < Z.cols; ++j) s += std::exp(z[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < Z.cols; ++j) probs->at(r, j) = std::exp(z[j] - lse);
    total += lse - z[target];
  }
  const double m = static_cast<double>(rows.size());
  const std::size_t iz = logits.id();
  return logits.tape()->record(
      Tensor(1, 1, total / m), logits.requires_grad(),
      [iz, rows, targets, probs, m](Tape& t, std::size_t self) {
        const double g = t.grad(self).values[0] / m;
        Tensor& GZ = t.grad_mut(iz);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const std::size_t i = rows[r];
          for (std::size_t j = 0; j < GZ.cols; ++j) {
            const double onehot = static_cast<int>(j) == targets[i] ? 1.0 : 0.0;
            GZ.at(i, j) += g * (probs->at(r, j) - onehot);
          }
        }
      });
}

Var spmm(const SparseMatrix& s, const Var& x) {
  const Tensor& X = x.value();
  require(s.cols == X.rows && s.values.size() == s.nnz(), ErrorCode::kShapeMismatch,
          "spmm operator " + std::to_string(s.rows) + "x" + std::to_string(s.cols) + " by " +
              shape_str(X));
  Tensor Y(s.rows, X.cols);
  const auto& k = K();
  for (std::size_t r = 0; r < s.rows; ++r)
    for (auto e = s.offsets[r]; e < s.offsets[r + 1]; ++e)
      k.axpy(s.values[e], X.row(s.indices[e]), Y.row(r), X.cols);
  const std::size_t ix = x.id();
  const SparseMatrix* sp = &s;
  return x.tape()->record(std::move(Y), x.requires_grad(), [ix, sp](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GX = t.grad_mut(ix);
    const auto& k = K();
    for (std::size_t r = 0; r < sp->rows; ++r)
      for (auto e = sp->offsets[r]; e < sp->offsets[r + 1]; ++e)
        k.axpy(sp->values[e], G.row(r), GX.row(sp->indices[e]), G.cols);
  });
}

Var segment_max(const SparseMatrix& pattern, const Var& x) {
  const Tensor& X = x.value();
  require(pattern.cols == X.rows, ErrorCode::kShapeMismatch, "segment_max pattern mismatch");
  const std::size_t f = X.cols;
  Tensor Y(pattern.rows, f);
  auto arg = std::make_shared<std::vector<int>>(pattern.rows * f, -1);
  const auto& k = K();
  for (std::size_t r = 0; r < pattern.rows; ++r) {
    const auto b = pattern.offsets[r], e = pattern.offsets[r + 1];
    if (b == e) continue;
    const std::uint32_t first = pattern.indices[b];
    std::copy(X.row(first), X.row(first) + f, Y.row(r));
    std::fill(arg->begin() + static_cast<std::ptrdiff_t>(r * f),
              arg->begin() + static_cast<std::ptrdiff_t>((r + 1) * f), static_cast<int>(first));
    for (auto p = b + 1; p < e; ++p)
      k.max_update(X.row(pattern.indices[p]), Y.row(r), arg->data() + r * f,
                   static_cast<int>(pattern.indices[p]), f);
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), x.requires_grad(), [ix, arg, f](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    Tensor& GX = t.grad_mut(ix);
    for (std::size_t r = 0; r < G.rows; ++r)
      for (std::size_t j = 0; j < f; ++j) {
        const int src = (*arg)[r * f + j];
        if (src >= 0) GX.at(static_cast<std::size_t>(src), j) += G.at(r, j);
      }
  });
}

Var gatv2_attention(const SparseMatrix& pattern, const Var& x_src, const Var& x_dst,
                    const Var& att, std::size_t heads, double slope,
                    std::vector<double>* alpha_out) {
  same_tape(x_src, x_dst);
  same_tape(x_src, att);
  const Tensor& XS = x_src.value();
  const Tensor& XD = x_dst.value();
  const Tensor& A = att.value();
  require(heads > 0 && A.rows == heads, ErrorCode::kShapeMismatch, "attention vector shape");
  const std::size_t f = A.cols;
  require(XS.cols == heads * f && XD.cols == heads * f, ErrorCode::kShapeMismatch,
          "GATv2 projections must have heads*f columns");
  require(pattern.rows == XD.rows && pattern.cols == XS.rows, ErrorCode::kShapeMismatch,
          "GATv2 neighbourhood pattern does not match inputs");

  auto alpha = std::make_shared<std::vector<double>>(pattern.nnz() * heads, 0.0);
  Tensor out(XD.rows, heads * f);
  std::vector<double> z(f);
  std::vector<double> e;
  for (std::size_t u = 0; u < pattern.rows; ++u) {
    const auto b = pattern.offsets[u], end = pattern.offsets[u + 1];
    const std::size_t deg = static_cast<std::size_t>(end - b);
    if (deg == 0) continue;
    e.resize(deg);
    for (std::size_t h = 0; h < heads; ++h) {
      const double* xd = XD.row(u) + h * f;
      const double* a = A.row(h);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < deg; ++k) {
        const double* xs = XS.row(pattern.indices[b + k]) + h * f;
        double s = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
          const double zz = xd[j] + xs[j];
          s += a[j] * (zz > 0.0 ? zz : slope * zz);
        }
        e[k] = s;
        mx = std::max(mx, s);
      }
      double total = 0.0;
      for (std::size_t k = 0; k < deg; ++k) {
        e[k] = std::exp(e[k] - mx);
        total += e[k];
      }
      double* o = out.row(u) + h * f;
      for (std::size_t k = 0; k < deg; ++k) {
        const double al = e[k] / total;
        (*alpha)[(b + k) * heads + h] = al;
        const double* xs = XS.row(pattern.indices[b + k]) + h * f;
        for (std::size_t j = 0; j < f; ++j) o[j] += al * xs[j];
      }
    }
  }
  if (alpha_out != nullptr) *alpha_out = *alpha;

  const std::size_t is = x_src.id(), id = x_dst.id(), ia = att.id();
  const SparseMatrix* pat = &pattern;
  const bool needs = x_src.requires_grad() || x_dst.requires_grad() || att.requires_grad();
  return x_src.tape()->record(
      std::move(out), needs, [is, id, ia, pat, heads, f, slope, alpha](Tape& t, std::size_t self) {
        const Tensor& G = t.grad(self);
        const Tensor& XS = t.value(is);
        const Tensor& XD = t.value(id);
        const Tensor& A = t.value(ia);
        Tensor& GS = t.grad_mut(is);
        Tensor& GD = t.grad_mut(id);
        Tensor& GA = t.grad_mut(ia);
        std::vector<double> galpha;
        for (std::size_t u = 0; u < pat->rows; ++u) {
          const auto b = pat->offsets[u], end = pat->offsets[u + 1];
          const std::size_t deg = static_cast<std::size_t>(end - b);
          if (deg == 0) continue;
          galpha.resize(deg);
          for (std::size_t h = 0; h < heads; ++h) {
            const double* g = G.row(u) + h * f;
            const double* xd = XD.row(u) + h * f;
            const double* a = A.row(h);
            double weighted = 0.0;
            for (std::size_t k = 0; k < deg; ++k) {
              const double* xs = XS.row(pat->indices[b + k]) + h * f;
              double s = 0.0;
              for (std::size_t j = 0; j < f; ++j) s += g[j] * xs[j];
              galpha[k] = s;
              weighted += (*alpha)[(b + k) * heads + h] * s;
            }
            for (std::size_t k = 0; k < deg; ++k) {
              const std::size_t v = pat->indices[b + k];
              const double al = (*alpha)[(b + k) * heads + h];
              const double ge = al * (galpha[k] - weighted);
              const double* xs = XS.row(v) + h * f;
              double* gs = GS.row(v) + h * f;
              double* gd = GD.row(u) + h * f;
              double* ga = GA.row(h);
              for (std::size_t j = 0; j < f; ++j) {
                const double zz = xd[j] + xs[j];
                const double act = zz > 0.0 ? zz : slope * zz;
                ga[j] += ge * act;
                const double gz = ge * a[j] * (zz > 0.0 ? 1.0 : slope);
                gd[j] += gz;
                gs[j] += gz + al * g[j];
              }
            }
          }
        }
      });
}

}  // namespace triage::ag
