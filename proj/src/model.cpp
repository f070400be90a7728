#include "relgnn/model.hpp"

#include <stdexcept>

#include "relgnn/ops.hpp"

namespace relgnn {

using namespace ops;

namespace {

std::string layer_prefix(std::size_t i) { return "layer" + std::to_string(i) + "/"; }

bool dense_fires(const StackConfig& c, std::size_t layer) {
  return (layer + 1) % c.dense_layers == 0 && layer + 1 < c.num_layers;
}

bool residual_fires(const StackConfig& c, std::size_t layer) { return (layer + 1) % c.res_connection == 0; }

}  // namespace

Model::Model(StackConfig config, std::vector<std::string> edge_types, std::size_t input_dim, Rng rng)
    : config_(std::move(config)), edge_types_(std::move(edge_types)), input_dim_(input_dim) {
  const CellConfig& cell = config_.cell;
  cell.validate();
  if (config_.num_layers == 0) throw std::invalid_argument("graph_num_layers must be >= 1");
  if (!(config_.input_dropout_keep_prob > 0.0 && config_.input_dropout_keep_prob <= 1.0)) {
    throw std::invalid_argument("graph_layer_input_dropout_keep_prob must lie in (0, 1]");
  }
  if (config_.dense_layers == 0) throw std::invalid_argument("dense_layers must be >= 1");
  if (config_.res_connection == 0) throw std::invalid_argument("res_connection must be >= 1");

  const std::size_t d = cell.hidden_dim;
  std::size_t width = input_dim;
  if (config_.input_projection) {
    Rng input_rng = rng.split("input");
    params_.add("input/weight", glorot_uniform(input_dim, d, input_rng));
    params_.add("input/bias", Tensor::zeros({d}));
    width = d;
  } else if (width != d) {
    if (cell.required_input_dim()) {
      throw std::invalid_argument(cell_kind_name(cell.kind) + " without input projection needs feature width " +
                                  std::to_string(d) + ", got " + std::to_string(width));
    }
    if (config_.res_connection <= config_.num_layers) {
      throw std::invalid_argument("residual connection across a dimension change (" + std::to_string(width) +
                                  " -> " + std::to_string(d) + "); enable the input projection");
    }
  }

  const std::size_t num_types = edge_types_.size() + (cell.needs_self_loop() ? 1 : 0);
  for (std::size_t i = 0; i < config_.num_layers; ++i) {
    const std::string lp = layer_prefix(i);
    Rng layer_rng = rng.split(lp);
    init_cell_params(cell, width, num_types, params_, lp, layer_rng);
    width = d;
    if (config_.layer_norm) {
      params_.add(lp + "ln/gain", Tensor::full({d}, 1));
      params_.add(lp + "ln/bias", Tensor::zeros({d}));
    }
    if (dense_fires(config_, i)) {
      Rng dense_rng = layer_rng.split("dense");
      params_.add(lp + "dense/weight", glorot_uniform(d, d, dense_rng));
      params_.add(lp + "dense/bias", Tensor::zeros({d}));
    }
  }
}

TypedGraph Model::prepare(const TypedGraph& g) const {
  if (g.edge_types == edge_types_) {
    return config_.cell.needs_self_loop() ? augment_self_loops(g) : g;
  }
  if (config_.cell.needs_self_loop() && g.edge_types.size() == edge_types_.size() + 1 &&
      g.edge_types.back() == kSelfLoopType &&
      std::equal(edge_types_.begin(), edge_types_.end(), g.edge_types.begin())) {
    return g;
  }
  throw GraphError("graph edge types do not match the model vocabulary");
}

Tensor Model::forward(const Tensor& features, const TypedGraph& g, bool training, Rng* dropout_rng,
                      StackTrace* trace) const {
  if (features.rank() != 2 || features.cols() != input_dim_) {
    throw DimensionError("Model::forward: features " + shape_to_string(features.shape()) + " but model expects width " +
                         std::to_string(input_dim_));
  }
  const NormCounts counts = norm_counts(g);
  const bool drop = training && config_.input_dropout_keep_prob < 1.0;
  if (drop && !dropout_rng) throw std::invalid_argument("Model::forward: dropout needs an rng");

  Tensor h = features;
  if (config_.input_projection) {
    const Tensor& b = params_.get("input/bias");
    h = linear(h, params_.get("input/weight"), &b);
  }
  Tensor block_input = h;
  for (std::size_t i = 0; i < config_.num_layers; ++i) {
    const std::string lp = layer_prefix(i);
    if (i % config_.res_connection == 0) block_input = h;
    Tensor x = drop ? dropout(h, config_.input_dropout_keep_prob, *dropout_rng, true) : h;
    h = apply_cell(x, g, counts, LayerParams(params_, lp), config_.cell);
    if (config_.layer_norm) h = layer_norm(h, params_.get(lp + "ln/gain"), params_.get(lp + "ln/bias"));
    if (residual_fires(config_, i)) {
      h = add(h, block_input);
      if (trace) trace->residual_after_layer.push_back(i);
    }
    if (dense_fires(config_, i)) {
      const Tensor& b = params_.get(lp + "dense/bias");
      h = activate(config_.cell.activation, linear(h, params_.get(lp + "dense/weight"), &b));
      if (trace) trace->dense_after_layer.push_back(i);
    }
  }
  return h;
}

Tensor Model::forward(const TypedGraph& g) const {
  TypedGraph prepared = prepare(g);
  return forward(features_tensor(prepared.features), prepared, false);
}

Tensor features_tensor(const Matrix& m) {
  return Tensor::from({m.rows, m.cols}, std::vector<real>(m.data.begin(), m.data.end()));
}

nlohmann::ordered_json parameters_to_json(const ParameterStore& store) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [name, t] : store) {
    nlohmann::ordered_json entry;
    entry["shape"] = t.shape();
    entry["values"] = std::vector<double>(t.values().begin(), t.values().end());
    doc[name] = std::move(entry);
  }
  return doc;
}

void load_parameters_json(ParameterStore& store, const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("checkpoint parameters must be a JSON object");
  for (const auto& [name, entry] : doc.items()) {
    if (!store.contains(name)) throw std::invalid_argument("checkpoint has unknown parameter '" + name + "'");
  }
  for (auto& [name, tensor] : store) {
    auto it = doc.find(name);
    if (it == doc.end()) throw std::invalid_argument("checkpoint is missing parameter '" + name + "'");
    const auto shape = it->at("shape").get<Shape>();
    const auto values = it->at("values").get<std::vector<double>>();
    if (shape != tensor.shape() || values.size() != tensor.numel()) {
      throw std::invalid_argument("checkpoint parameter '" + name + "' has shape " + shape_to_string(shape) +
                                  ", model expects " + shape_to_string(tensor.shape()));
    }
    std::copy(values.begin(), values.end(), tensor.values().begin());
  }
}

}  // namespace relgnn
