#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "relgnn/parameters.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

enum class RecurrentKind { RNN, GRU, LSTM };

RecurrentKind recurrent_kind_from_name(std::string_view name);
std::string recurrent_kind_name(RecurrentKind kind);
std::size_t recurrent_gate_count(RecurrentKind kind);

/// Gate weights stacked column-wise: input_weight is [message_dim x G*d],
/// state_weight is [d x G*d], bias is [G*d], with G blocks ordered
///   RNN:  candidate
///   GRU:  reset, update, candidate
///   LSTM: input, forget, candidate, output
struct RecurrentParams {
  RecurrentKind kind = RecurrentKind::GRU;
  Tensor input_weight;
  Tensor state_weight;
  Tensor bias;
};

struct RecurrentState {
  Tensor hidden;
  std::optional<Tensor> memory;  // LSTM cell state
};

/// Registers `<prefix>input_weight`, `<prefix>state_weight`, `<prefix>bias`.
void add_recurrent_params(ParameterStore& store, const std::string& prefix, RecurrentKind kind,
                          std::size_t message_dim, std::size_t hidden_dim, Rng& rng);
RecurrentParams recurrent_params_from(const ParameterStore& store, const std::string& prefix,
                                      RecurrentKind kind);

/// One update of the recurrent unit. GRU follows h' = u*h + (1-u)*c, so a
/// saturated update gate keeps the old state. An LSTM without a memory
/// tensor starts from zero memory.
RecurrentState recurrent_cell(const RecurrentState& state, const Tensor& message,
                              const RecurrentParams& params);

}  // namespace relgnn
