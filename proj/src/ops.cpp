#include "relgnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace relgnn {

Activation activation_from_name(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "leaky_relu") return Activation::LeakyRelu;
  if (name == "elu") return Activation::Elu;
  if (name == "gelu") return Activation::Gelu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Elu: return "elu";
    case Activation::Gelu: return "gelu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "identity";
}

}  // namespace relgnn

namespace relgnn::ops {

namespace {

TensorImpl& parent(TensorImpl& self, std::size_t i) { return *self.parents[i]; }

void require_matrix(const Tensor& t, const char* op, const char* arg) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": " + arg + " must be a matrix, got shape " +
                         shape_to_string(t.shape()));
  }
}

bool is_row_vector_for(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) return false;
  const auto& bs = b.shape();
  std::size_t n = a.shape()[1];
  return (bs.size() == 1 && bs[0] == n) || (bs.size() == 2 && bs[0] == 1 && bs[1] == n);
}

enum class BinaryKind { Add, Sub, Mul };

Tensor binary(BinaryKind kind, const Tensor& a, const Tensor& b, const char* name) {
  const bool same = a.shape() == b.shape();
  const bool bcast = !same && is_row_vector_for(a, b);
  if (!same && !bcast) {
    throw DimensionError(std::string(name) + ": cannot combine shapes " +
                         shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
  const std::size_t n = a.numel();
  const std::size_t width = bcast ? b.numel() : n;
  auto av = a.values();
  auto bv = b.values();
  std::vector<real> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    real y = bv[bcast ? i % width : i];
    switch (kind) {
      case BinaryKind::Add: out[i] = av[i] + y; break;
      case BinaryKind::Sub: out[i] = av[i] - y; break;
      case BinaryKind::Mul: out[i] = av[i] * y; break;
    }
  }
  return make_result(a.shape(), std::move(out), {a, b}, name,
                     [kind, bcast, width](TensorImpl& self) {
                       TensorImpl& pa = parent(self, 0);
                       TensorImpl& pb = parent(self, 1);
                       const auto& g = self.grad;
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         std::size_t j = bcast ? i % width : i;
                         real da = 0, db = 0;
                         switch (kind) {
                           case BinaryKind::Add: da = g[i]; db = g[i]; break;
                           case BinaryKind::Sub: da = g[i]; db = -g[i]; break;
                           case BinaryKind::Mul:
                             da = g[i] * pb.values[j];
                             db = g[i] * pa.values[i];
                             break;
                         }
                         if (pa.requires_grad) pa.grad[i] += da;
                         if (pb.requires_grad) pb.grad[j] += db;
                       }
                     });
}

real gelu_value(real x) {
  constexpr real c = real(0.7978845608028654);  // sqrt(2/pi)
  real inner = c * (x + real(0.044715) * x * x * x);
  return real(0.5) * x * (real(1) + std::tanh(inner));
}

real gelu_derivative(real x) {
  constexpr real c = real(0.7978845608028654);
  real inner = c * (x + real(0.044715) * x * x * x);
  real t = std::tanh(inner);
  real dinner = c * (real(1) + real(3) * real(0.044715) * x * x);
  return real(0.5) * (real(1) + t) + real(0.5) * x * (real(1) - t * t) * dinner;
}

real sigmoid_value(real x) {
  if (x >= 0) return real(1) / (real(1) + std::exp(-x));
  real e = std::exp(x);
  return e / (real(1) + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul", "lhs");
  require_matrix(b, "matmul", "rhs");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
  }
  std::vector<real> out(m * n, real(0));
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    real* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const real x = av[i * k + p];
      if (x == real(0)) continue;
      const real* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, "matmul", [m, k, n](TensorImpl& self) {
    TensorImpl& pa = parent(self, 0);
    TensorImpl& pb = parent(self, 1);
    const real* g = self.grad.data();
    if (pa.requires_grad) {
      // dA = G B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const real* grow = g + i * n;
          const real* brow = pb.values.data() + p * n;
          real acc = 0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      // dB = A^T G
      for (std::size_t i = 0; i < m; ++i) {
        const real* grow = g + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const real x = pa.values[i * k + p];
          if (x == real(0)) continue;
          real* dbrow = pb.grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) dbrow[j] += x * grow[j];
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Add, a, b, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Sub, a, b, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(BinaryKind::Mul, a, b, "mul"); }

Tensor affine(const Tensor& x, real scale, real shift) {
  std::vector<real> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * xv[i] + shift;
  return make_result(x.shape(), std::move(out), {x}, "affine", [scale](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += scale * self.grad[i];
  });
}

Tensor activate(Activation act, const Tensor& x) {
  if (act == Activation::Identity) return x;
  std::vector<real> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const real v = xv[i];
    switch (act) {
      case Activation::Relu: out[i] = v < 0 ? real(0) : v; break;  // keeps NaN
      case Activation::LeakyRelu: out[i] = v > 0 ? v : kLeakyReluSlope * v; break;
      case Activation::Elu: out[i] = v > 0 ? v : std::expm1(v); break;
      case Activation::Gelu: out[i] = gelu_value(v); break;
      case Activation::Tanh: out[i] = std::tanh(v); break;
      case Activation::Sigmoid: out[i] = sigmoid_value(v); break;
      case Activation::Identity: out[i] = v; break;
    }
  }
  return make_result(x.shape(), std::move(out), {x}, "activation", [act](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const real v = px.values[i];
      const real y = self.values[i];
      real d = 1;
      switch (act) {
        case Activation::Relu: d = v > 0 ? real(1) : real(0); break;
        case Activation::LeakyRelu: d = v > 0 ? real(1) : kLeakyReluSlope; break;
        case Activation::Elu: d = v > 0 ? real(1) : y + real(1); break;
        case Activation::Gelu: d = gelu_derivative(v); break;
        case Activation::Tanh: d = real(1) - y * y; break;
        case Activation::Sigmoid: d = y * (real(1) - y); break;
        case Activation::Identity: d = 1; break;
      }
      px.grad[i] += d * self.grad[i];
    }
  });
}

Tensor elementwise(std::string_view op_name, const Tensor& a, const Tensor* b) {
  auto need_b = [&]() -> const Tensor& {
    if (!b) throw std::invalid_argument("elementwise '" + std::string(op_name) + "' needs two operands");
    return *b;
  };
  if (op_name == "add") return add(a, need_b());
  if (op_name == "sub") return sub(a, need_b());
  if (op_name == "hadamard" || op_name == "mul") return mul(a, need_b());
  return activate(activation_from_name(op_name), a);
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  Tensor y = matmul(x, weight);
  return bias ? add(y, *bias) : y;
}

Tensor gather_rows(const Tensor& x, IndexSpan idx) {
  require_matrix(x, "gather_rows", "x");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  std::vector<real> out(idx.size() * d);
  auto xv = x.values();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) {
      throw IndexError("gather_rows: index " + std::to_string(idx[r]) + " out of range for " +
                       std::to_string(n) + " rows");
    }
    std::copy_n(xv.data() + idx[r] * d, d, out.data() + r * d);
  }
  return make_result({idx.size(), d}, std::move(out), {x}, "gather_rows",
                     [ids = std::vector<Index>(idx.begin(), idx.end()), d](TensorImpl& self) {
                       TensorImpl& px = parent(self, 0);
                       for (std::size_t r = 0; r < ids.size(); ++r) {
                         real* dst = px.grad.data() + ids[r] * d;
                         const real* src = self.grad.data() + r * d;
                         for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                       }
                     });
}

Tensor segment_sum(const Tensor& data, IndexSpan ids, std::size_t num_segments) {
  require_matrix(data, "segment_sum", "data");
  const std::size_t e = data.shape()[0], d = data.shape()[1];
  if (ids.size() != e) {
    throw DimensionError("segment_sum: " + std::to_string(ids.size()) + " segment ids for " +
                         std::to_string(e) + " rows");
  }
  std::vector<real> out(num_segments * d, real(0));
  auto dv = data.values();
  for (std::size_t r = 0; r < e; ++r) {
    if (ids[r] >= num_segments) {
      throw IndexError("segment_sum: segment id " + std::to_string(ids[r]) + " at row " +
                       std::to_string(r) + " not in [0, " + std::to_string(num_segments) + ")");
    }
    real* dst = out.data() + ids[r] * d;
    const real* src = dv.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  return make_result({num_segments, d}, std::move(out), {data}, "segment_sum",
                     [seg = std::vector<Index>(ids.begin(), ids.end()), d](TensorImpl& self) {
                       TensorImpl& pd = parent(self, 0);
                       for (std::size_t r = 0; r < seg.size(); ++r) {
                         const real* src = self.grad.data() + seg[r] * d;
                         real* dst = pd.grad.data() + r * d;
                         for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
                       }
                     });
}

Tensor segment_softmax(const Tensor& logits, IndexSpan ids, std::size_t num_segments,
                       bool require_nonempty) {
  const bool column = logits.rank() == 2 && logits.shape()[1] == 1;
  if (logits.rank() != 1 && !column) {
    throw DimensionError("segment_softmax: logits must be [E] or [E x 1], got " +
                         shape_to_string(logits.shape()));
  }
  const std::size_t e = logits.numel();
  if (ids.size() != e) {
    throw DimensionError("segment_softmax: " + std::to_string(ids.size()) +
                         " segment ids for " + std::to_string(e) + " logits");
  }
  std::vector<real> seg_max(num_segments, -std::numeric_limits<real>::infinity());
  std::vector<std::size_t> seg_count(num_segments, 0);
  auto lv = logits.values();
  for (std::size_t r = 0; r < e; ++r) {
    if (ids[r] >= num_segments) {
      throw IndexError("segment_softmax: segment id " + std::to_string(ids[r]) + " not in [0, " +
                       std::to_string(num_segments) + ")");
    }
    seg_max[ids[r]] = std::max(seg_max[ids[r]], lv[r]);
    ++seg_count[ids[r]];
  }
  if (require_nonempty) {
    for (std::size_t s = 0; s < num_segments; ++s) {
      if (seg_count[s] == 0) {
        throw ContractError("segment_softmax: segment " + std::to_string(s) + " has no entries");
      }
    }
  }
  std::vector<real> out(e);
  std::vector<real> denom(num_segments, real(0));
  for (std::size_t r = 0; r < e; ++r) {
    out[r] = std::exp(lv[r] - seg_max[ids[r]]);
    denom[ids[r]] += out[r];
  }
  for (std::size_t r = 0; r < e; ++r) out[r] /= denom[ids[r]];
  return make_result(logits.shape(), std::move(out), {logits}, "segment_softmax",
                     [seg = std::vector<Index>(ids.begin(), ids.end()),
                      num_segments](TensorImpl& self) {
                       TensorImpl& pl = parent(self, 0);
                       std::vector<real> dot(num_segments, real(0));
                       for (std::size_t r = 0; r < seg.size(); ++r) {
                         dot[seg[r]] += self.grad[r] * self.values[r];
                       }
                       for (std::size_t r = 0; r < seg.size(); ++r) {
                         pl.grad[r] += self.values[r] * (self.grad[r] - dot[seg[r]]);
                       }
                     });
}

Tensor scale_rows(const Tensor& x, const Tensor& weights) {
  require_matrix(x, "scale_rows", "x");
  const std::size_t e = x.shape()[0], d = x.shape()[1];
  if (weights.numel() != e || weights.cols() != 1) {
    throw DimensionError("scale_rows: weights " + shape_to_string(weights.shape()) +
                         " do not match rows of " + shape_to_string(x.shape()));
  }
  std::vector<real> out(e * d);
  auto xv = x.values();
  auto wv = weights.values();
  for (std::size_t r = 0; r < e; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = xv[r * d + j] * wv[r];
  }
  return make_result({e, d}, std::move(out), {x, weights}, "scale_rows", [e, d](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    TensorImpl& pw = parent(self, 1);
    for (std::size_t r = 0; r < e; ++r) {
      real acc = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const real g = self.grad[r * d + j];
        if (px.requires_grad) px.grad[r * d + j] += g * pw.values[r];
        acc += g * px.values[r * d + j];
      }
      if (pw.requires_grad) pw.grad[r] += acc;
    }
  });
}

Tensor scale_rows(const Tensor& x, std::span<const real> weights) {
  require_matrix(x, "scale_rows", "x");
  const std::size_t e = x.shape()[0], d = x.shape()[1];
  if (weights.size() != e) {
    throw DimensionError("scale_rows: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(e) + " rows");
  }
  std::vector<real> out(e * d);
  auto xv = x.values();
  for (std::size_t r = 0; r < e; ++r) {
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] = xv[r * d + j] * weights[r];
  }
  return make_result({e, d}, std::move(out), {x}, "scale_rows_const",
                     [w = std::vector<real>(weights.begin(), weights.end()), d](TensorImpl& self) {
                       TensorImpl& px = parent(self, 0);
                       for (std::size_t r = 0; r < w.size(); ++r) {
                         for (std::size_t j = 0; j < d; ++j) {
                           px.grad[r * d + j] += self.grad[r * d + j] * w[r];
                         }
                       }
                     });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_cols", "part");
    if (p.rows() != n) {
      throw DimensionError("concat_cols: row mismatch " + shape_to_string(parts[0].shape()) +
                           " vs " + shape_to_string(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<real> out(n * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pv = parts[k].values();
    for (std::size_t r = 0; r < n; ++r) {
      std::copy_n(pv.data() + r * widths[k], widths[k], out.data() + r * total + offset);
    }
    offset += widths[k];
  }
  return make_result({n, total}, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
                     "concat_cols", [widths, n, total](TensorImpl& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         TensorImpl& p = parent(self, k);
                         if (p.requires_grad) {
                           for (std::size_t r = 0; r < n; ++r) {
                             for (std::size_t j = 0; j < widths[k]; ++j) {
                               p.grad[r * widths[k] + j] += self.grad[r * total + off + j];
                             }
                           }
                         }
                         off += widths[k];
                       }
                     });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t d = parts[0].cols();
  std::size_t total = 0;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.cols() != d) {
      throw DimensionError("concat_rows: column mismatch " + shape_to_string(parts[0].shape()) +
                           " vs " + shape_to_string(p.shape()));
    }
    sizes.push_back(p.numel());
    total += p.rows();
  }
  std::vector<real> out;
  out.reserve(total * d);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_result({total, d}, std::move(out), std::vector<Tensor>(parts.begin(), parts.end()),
                     "concat_rows", [sizes](TensorImpl& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < sizes.size(); ++k) {
                         TensorImpl& p = parent(self, k);
                         if (p.requires_grad) {
                           for (std::size_t i = 0; i < sizes[k]; ++i) p.grad[i] += self.grad[off + i];
                         }
                         off += sizes[k];
                       }
                     });
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_cols", "x");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (start + count > d) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") exceeds " + shape_to_string(x.shape()));
  }
  std::vector<real> out(n * count);
  auto xv = x.values();
  for (std::size_t r = 0; r < n; ++r) std::copy_n(xv.data() + r * d + start, count, out.data() + r * count);
  return make_result({n, count}, std::move(out), {x}, "slice_cols",
                     [n, d, start, count](TensorImpl& self) {
                       TensorImpl& px = parent(self, 0);
                       for (std::size_t r = 0; r < n; ++r) {
                         for (std::size_t j = 0; j < count; ++j) {
                           px.grad[r * d + start + j] += self.grad[r * count + j];
                         }
                       }
                     });
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_rows", "x");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (start + count > n) {
    throw DimensionError("slice_rows: [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") exceeds " + shape_to_string(x.shape()));
  }
  auto xv = x.values();
  std::vector<real> out(xv.begin() + start * d, xv.begin() + (start + count) * d);
  return make_result({count, d}, std::move(out), {x}, "slice_rows", [start, d](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[start * d + i] += self.grad[i];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                         shape_to_string(shape));
  }
  std::vector<real> out(x.values().begin(), x.values().end());
  return make_result(std::move(shape), std::move(out), {x}, "reshape", [](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) px.grad[i] += self.grad[i];
  });
}

Tensor batched_vecmat(const Tensor& vecs, const Tensor& mats) {
  require_matrix(vecs, "batched_vecmat", "vecs");
  require_matrix(mats, "batched_vecmat", "mats");
  const std::size_t e = vecs.shape()[0], k = vecs.shape()[1];
  if (mats.shape()[0] != e || mats.shape()[1] != k * k) {
    throw DimensionError("batched_vecmat: matrices " + shape_to_string(mats.shape()) +
                         " do not fit vectors " + shape_to_string(vecs.shape()));
  }
  std::vector<real> out(e * k, real(0));
  auto vv = vecs.values();
  auto mv = mats.values();
  for (std::size_t r = 0; r < e; ++r) {
    const real* m = mv.data() + r * k * k;
    for (std::size_t i = 0; i < k; ++i) {
      const real x = vv[r * k + i];
      for (std::size_t j = 0; j < k; ++j) out[r * k + j] += x * m[i * k + j];
    }
  }
  return make_result({e, k}, std::move(out), {vecs, mats}, "batched_vecmat", [e, k](TensorImpl& self) {
    TensorImpl& pv = parent(self, 0);
    TensorImpl& pm = parent(self, 1);
    for (std::size_t r = 0; r < e; ++r) {
      const real* g = self.grad.data() + r * k;
      for (std::size_t i = 0; i < k; ++i) {
        real acc = 0;
        for (std::size_t j = 0; j < k; ++j) {
          acc += g[j] * pm.values[r * k * k + i * k + j];
          if (pm.requires_grad) pm.grad[r * k * k + i * k + j] += pv.values[r * k + i] * g[j];
        }
        if (pv.requires_grad) pv.grad[r * k + i] += acc;
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, real eps) {
  require_matrix(x, "layer_norm", "x");
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (d == 0) throw DimensionError("layer_norm: feature dimension must be >= 1");
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("layer_norm: gain " + shape_to_string(gain.shape()) + " / bias " +
                         shape_to_string(bias.shape()) + " do not match " +
                         shape_to_string(x.shape()));
  }
  std::vector<real> out(n * d);
  std::vector<real> normed(n * d);
  std::vector<real> inv_std(n);
  auto xv = x.values();
  auto gv = gain.values();
  auto bv = bias.values();
  for (std::size_t r = 0; r < n; ++r) {
    const real* row = xv.data() + r * d;
    real mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= real(d);
    real var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= real(d);
    inv_std[r] = real(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      normed[r * d + j] = (row[j] - mu) * inv_std[r];
      out[r * d + j] = normed[r * d + j] * gv[j] + bv[j];
    }
  }
  return make_result({n, d}, std::move(out), {x, gain, bias}, "layer_norm",
                     [n, d, normed = std::move(normed), inv_std = std::move(inv_std)](TensorImpl& self) {
                       TensorImpl& px = parent(self, 0);
                       TensorImpl& pg = parent(self, 1);
                       TensorImpl& pb = parent(self, 2);
                       std::vector<real> dxhat(d);
                       for (std::size_t r = 0; r < n; ++r) {
                         const real* g = self.grad.data() + r * d;
                         const real* xh = normed.data() + r * d;
                         real mean_dxhat = 0, mean_dxhat_xhat = 0;
                         for (std::size_t j = 0; j < d; ++j) {
                           dxhat[j] = g[j] * pg.values[j];
                           mean_dxhat += dxhat[j];
                           mean_dxhat_xhat += dxhat[j] * xh[j];
                           if (pg.requires_grad) pg.grad[j] += g[j] * xh[j];
                           if (pb.requires_grad) pb.grad[j] += g[j];
                         }
                         mean_dxhat /= real(d);
                         mean_dxhat_xhat /= real(d);
                         if (px.requires_grad) {
                           for (std::size_t j = 0; j < d; ++j) {
                             px.grad[r * d + j] +=
                                 inv_std[r] * (dxhat[j] - mean_dxhat - xh[j] * mean_dxhat_xhat);
                           }
                         }
                       }
                     });
}

Tensor dropout(const Tensor& x, double keep_prob, Rng& rng, bool training) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw std::invalid_argument("dropout: keep_prob must lie in (0, 1], got " +
                                std::to_string(keep_prob));
  }
  if (!training || keep_prob == 1.0) return x;
  const real scale = real(1.0 / keep_prob);
  std::vector<real> mask(x.numel());
  for (auto& m : mask) m = rng.bernoulli(keep_prob) ? scale : real(0);
  std::vector<real> out(x.numel());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return make_result(x.shape(), std::move(out), {x}, "dropout", [mask = std::move(mask)](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) px.grad[i] += self.grad[i] * mask[i];
  });
}

Tensor sum(const Tensor& x) {
  real acc = 0;
  for (real v : x.values()) acc += v;
  return make_result({}, {acc}, {x}, "sum", [](TensorImpl& self) {
    TensorImpl& px = parent(self, 0);
    for (auto& g : px.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const std::size_t n = x.numel();
  if (n == 0) return Tensor::scalar(0);
  return affine(sum(x), real(1) / real(n));
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& labels) {
  if (logits.shape() != labels.shape()) {
    throw DimensionError("bce_with_logits: logits " + shape_to_string(logits.shape()) +
                         " vs labels " + shape_to_string(labels.shape()));
  }
  const std::size_t n = logits.numel();
  auto lv = logits.values();
  auto yv = labels.values();
  real acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const real x = lv[i];
    acc += std::max(x, real(0)) - x * yv[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const real inv_n = n ? real(1) / real(n) : real(0);
  return make_result({}, {acc * inv_n}, {logits, labels}, "bce_with_logits", [inv_n](TensorImpl& self) {
    TensorImpl& pl = parent(self, 0);
    TensorImpl& py = parent(self, 1);
    const real g = self.grad[0] * inv_n;
    for (std::size_t i = 0; i < pl.values.size(); ++i) {
      if (pl.requires_grad) pl.grad[i] += g * (sigmoid_value(pl.values[i]) - py.values[i]);
      if (py.requires_grad) py.grad[i] += -g * pl.values[i];
    }
  });
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  Tensor diff = sub(pred, target);
  return mean(mul(diff, diff));
}

}  // namespace relgnn::ops
