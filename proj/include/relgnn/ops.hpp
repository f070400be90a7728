#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relgnn/rng.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

/// A caller broke an operation's documented precondition (e.g. queried an
/// empty softmax segment).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Activation { Identity, Relu, LeakyRelu, Elu, Gelu, Tanh, Sigmoid };

inline constexpr real kLeakyReluSlope = real(0.2);
inline constexpr real kLayerNormEpsilon = real(1e-5);

/// Accepts identity, relu, leaky_relu, elu, gelu, tanh, sigmoid.
Activation activation_from_name(std::string_view name);
std::string activation_name(Activation act);

}  // namespace relgnn

namespace relgnn::ops {

using Index = std::size_t;
using IndexSpan = std::span<const Index>;

Tensor matmul(const Tensor& a, const Tensor& b);

// Binary ops take equal shapes, or a matrix `a` and a row vector `b`
// ([n] or [1 x n]) broadcast over the rows of `a`.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

/// scale * x + shift, element-wise.
Tensor affine(const Tensor& x, real scale, real shift = 0);

Tensor activate(Activation act, const Tensor& x);
inline Tensor relu(const Tensor& x) { return activate(Activation::Relu, x); }
inline Tensor leaky_relu(const Tensor& x) { return activate(Activation::LeakyRelu, x); }
inline Tensor elu(const Tensor& x) { return activate(Activation::Elu, x); }
inline Tensor gelu(const Tensor& x) { return activate(Activation::Gelu, x); }
inline Tensor tanh(const Tensor& x) { return activate(Activation::Tanh, x); }
inline Tensor sigmoid(const Tensor& x) { return activate(Activation::Sigmoid, x); }

/// Name-dispatched element-wise op: add, sub, hadamard (alias mul), or any
/// activation name. Binary ops require `b`.
Tensor elementwise(std::string_view op_name, const Tensor& a, const Tensor* b = nullptr);

/// x @ weight + bias; bias may be omitted.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor* bias = nullptr);

/// Row r of the result is row idx[r] of x.
Tensor gather_rows(const Tensor& x, IndexSpan idx);

/// Row s of the result sums the rows e of `data` with ids[e] == s.
Tensor segment_sum(const Tensor& data, IndexSpan ids, std::size_t num_segments);

/// Softmax of `logits` ([E] or [E x 1]) within each segment, stabilised by
/// the per-segment maximum. With `require_nonempty`, every segment in
/// [0, num_segments) must receive at least one entry.
Tensor segment_softmax(const Tensor& logits, IndexSpan ids, std::size_t num_segments,
                       bool require_nonempty = false);

/// Multiplies row r of x by weights[r]; weights is [E] or [E x 1].
Tensor scale_rows(const Tensor& x, const Tensor& weights);
/// Same, with constant (non-differentiable) weights.
Tensor scale_rows(const Tensor& x, std::span<const real> weights);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
Tensor reshape(const Tensor& x, Shape shape);

/// out[e] = vecs[e] (1 x K) times mats[e] viewed as a row-major K x K matrix.
Tensor batched_vecmat(const Tensor& vecs, const Tensor& mats);

/// Row-wise normalisation: (x - mean) / sqrt(var + eps) * gain + bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  real eps = kLayerNormEpsilon);

/// Inverted dropout. Identity when !training or keep_prob == 1.
Tensor dropout(const Tensor& x, double keep_prob, Rng& rng, bool training);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Mean element-wise binary cross-entropy on logits.
Tensor bce_with_logits(const Tensor& logits, const Tensor& labels);
/// Mean squared error.
Tensor mse(const Tensor& pred, const Tensor& target);

}  // namespace relgnn::ops
