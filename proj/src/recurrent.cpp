#include "relgnn/recurrent.hpp"

#include <cmath>
#include <stdexcept>

#include "relgnn/ops.hpp"

namespace relgnn {

RecurrentKind recurrent_kind_from_name(std::string_view name) {
  if (name == "RNN" || name == "rnn") return RecurrentKind::RNN;
  if (name == "GRU" || name == "gru") return RecurrentKind::GRU;
  if (name == "LSTM" || name == "lstm") return RecurrentKind::LSTM;
  throw std::invalid_argument("unknown recurrent cell '" + std::string(name) + "'");
}

std::string recurrent_kind_name(RecurrentKind kind) {
  switch (kind) {
    case RecurrentKind::RNN: return "RNN";
    case RecurrentKind::GRU: return "GRU";
    case RecurrentKind::LSTM: return "LSTM";
  }
  return "GRU";
}

std::size_t recurrent_gate_count(RecurrentKind kind) {
  switch (kind) {
    case RecurrentKind::RNN: return 1;
    case RecurrentKind::GRU: return 3;
    case RecurrentKind::LSTM: return 4;
  }
  return 1;
}

void add_recurrent_params(ParameterStore& store, const std::string& prefix, RecurrentKind kind,
                          std::size_t message_dim, std::size_t hidden_dim, Rng& rng) {
  const std::size_t gates = recurrent_gate_count(kind);
  auto init = [&](std::size_t fan_in) {
    // Glorot limit of a single gate block, shared by all stacked blocks.
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + hidden_dim));
    std::vector<real> v(fan_in * gates * hidden_dim);
    for (auto& x : v) x = static_cast<real>(rng.uniform(-limit, limit));
    return Tensor::from({fan_in, gates * hidden_dim}, std::move(v));
  };
  store.add(prefix + "input_weight", init(message_dim));
  store.add(prefix + "state_weight", init(hidden_dim));
  store.add(prefix + "bias", Tensor::zeros({gates * hidden_dim}));
}

RecurrentParams recurrent_params_from(const ParameterStore& store, const std::string& prefix,
                                      RecurrentKind kind) {
  return {kind, store.get(prefix + "input_weight"), store.get(prefix + "state_weight"),
          store.get(prefix + "bias")};
}

RecurrentState recurrent_cell(const RecurrentState& state, const Tensor& message,
                              const RecurrentParams& p) {
  using namespace ops;
  const Tensor& h = state.hidden;
  const std::size_t d = h.cols();
  const std::size_t gates = recurrent_gate_count(p.kind);
  if (p.state_weight.rank() != 2 || p.state_weight.rows() != d ||
      p.state_weight.cols() != gates * d) {
    throw DimensionError("recurrent_cell: state " + shape_to_string(h.shape()) +
                         " does not fit state weight " + shape_to_string(p.state_weight.shape()));
  }
  if (message.rows() != h.rows() || p.input_weight.rows() != message.cols()) {
    throw DimensionError("recurrent_cell: message " + shape_to_string(message.shape()) +
                         " does not fit input weight " + shape_to_string(p.input_weight.shape()));
  }

  switch (p.kind) {
    case RecurrentKind::RNN: {
      Tensor pre = add(add(matmul(message, p.input_weight), matmul(h, p.state_weight)), p.bias);
      return {ops::tanh(pre), std::nullopt};
    }
    case RecurrentKind::GRU: {
      Tensor x_proj = add(matmul(message, p.input_weight), p.bias);
      Tensor w_gates = slice_cols(p.state_weight, 0, 2 * d);
      Tensor w_cand = slice_cols(p.state_weight, 2 * d, d);
      Tensor gates_pre = add(slice_cols(x_proj, 0, 2 * d), matmul(h, w_gates));
      Tensor reset = sigmoid(slice_cols(gates_pre, 0, d));
      Tensor update = sigmoid(slice_cols(gates_pre, d, d));
      Tensor cand = ops::tanh(add(slice_cols(x_proj, 2 * d, d), matmul(mul(reset, h), w_cand)));
      Tensor out = add(mul(update, h), mul(affine(update, -1, 1), cand));
      return {out, std::nullopt};
    }
    case RecurrentKind::LSTM: {
      Tensor pre = add(add(matmul(message, p.input_weight), matmul(h, p.state_weight)), p.bias);
      Tensor in_gate = sigmoid(slice_cols(pre, 0, d));
      Tensor forget_gate = sigmoid(slice_cols(pre, d, d));
      Tensor cand = ops::tanh(slice_cols(pre, 2 * d, d));
      Tensor out_gate = sigmoid(slice_cols(pre, 3 * d, d));
      Tensor memory = mul(in_gate, cand);
      if (state.memory) memory = add(mul(forget_gate, *state.memory), memory);
      Tensor hidden = mul(out_gate, ops::tanh(memory));
      return {hidden, memory};
    }
  }
  throw std::invalid_argument("recurrent_cell: unknown kind");
}

}  // namespace relgnn
