#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relgnn/cells.hpp"
#include "relgnn/graph.hpp"
#include "relgnn/parameters.hpp"
#include "relgnn/rng.hpp"

namespace relgnn {

/// Structural knobs for a stack of propagation steps.
struct StackConfig {
  CellConfig cell;
  std::size_t num_layers = 2;
  double input_dropout_keep_prob = 1.0;
  /// Layer norm after every propagation step.
  bool layer_norm = false;
  /// A node-wise fully connected layer between every `dense_layers` steps.
  std::size_t dense_layers = 32;
  /// A residual connection around every block of `res_connection` steps.
  std::size_t res_connection = 32;
  /// Linear map from input features to hidden_dim before the first step.
  bool input_projection = true;
};

/// Which structural extras fired during a forward pass; filled on request.
struct StackTrace {
  std::vector<std::size_t> residual_after_layer;
  std::vector<std::size_t> dense_after_layer;
};

/// A stack of GNN propagation steps over a fixed edge vocabulary. Each step
/// owns its own parameters ("layer<i>/...").
class Model {
 public:
  /// `edge_types` is the dataset vocabulary without SELF; the model adds it
  /// when its cell needs self-loops.
  Model(StackConfig config, std::vector<std::string> edge_types, std::size_t input_dim, Rng rng);

  const StackConfig& config() const { return config_; }
  const std::vector<std::string>& edge_types() const { return edge_types_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return config_.cell.hidden_dim; }

  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  /// Adds SELF if the cell needs it; checks the vocabulary matches.
  TypedGraph prepare(const TypedGraph& g) const;

  /// Node representations [num_nodes x hidden_dim] for a graph as returned
  /// by prepare(). `dropout_rng` is only drawn from when training.
  Tensor forward(const Tensor& features, const TypedGraph& prepared, bool training,
                 Rng* dropout_rng = nullptr, StackTrace* trace = nullptr) const;
  /// Convenience: prepare + forward on the graph's own features, no dropout.
  Tensor forward(const TypedGraph& g) const;

 private:
  StackConfig config_;
  std::vector<std::string> edge_types_;
  std::size_t input_dim_;
  ParameterStore params_;
};

Tensor features_tensor(const Matrix& m);

/// Parameter checkpoint: {"<name>": {"shape": [...], "values": [...]}}.
nlohmann::ordered_json parameters_to_json(const ParameterStore& store);
/// Copies values into `store`; rejects unknown or missing names and shape
/// mismatches.
void load_parameters_json(ParameterStore& store, const nlohmann::json& doc);

}  // namespace relgnn
