#include "relgnn/tasks.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "relgnn/ops.hpp"

namespace relgnn {

using namespace ops;

void TaskSpec::validate() const {
  if (label_dim == 0) throw std::invalid_argument("task label_dim must be >= 1");
  auto require = [&](std::string_view want_loss, std::string_view want_metric, const char* kind) {
    if (loss != want_loss || metric != want_metric) {
      throw std::invalid_argument(std::string(kind) + " expects loss '" + std::string(want_loss) + "' and metric '" +
                                  std::string(want_metric) + "', got '" + loss + "' / '" + metric + "'");
    }
  };
  switch (kind) {
    case TaskSpecKind::NodeClassificationMultilabel:
      require("bce", "micro_f1", "node_classification_multilabel");
      break;
    case TaskSpecKind::GraphRegression:
      require("mse", "mae", "graph_regression");
      break;
    case TaskSpecKind::SyntheticNeighbourCount:
      require("mse", "mae", "synthetic_neighbour_count");
      break;
    case TaskSpecKind::WlPairProbe:
      require("none", "linf_gap", "wl_pair_probe");
      break;
  }
}

TaskSpec TaskSpec::for_task(TaskKind task, std::size_t label_dim) {
  switch (task) {
    case TaskKind::NodeClassification:
      return {TaskSpecKind::NodeClassificationMultilabel, label_dim, "bce", "micro_f1"};
    case TaskKind::NodeRegression:
      return {TaskSpecKind::SyntheticNeighbourCount, label_dim, "mse", "mae"};
    case TaskKind::GraphRegression:
      return {TaskSpecKind::GraphRegression, label_dim, "mse", "mae"};
  }
  throw std::invalid_argument("unknown task kind");
}

Head::Head(TaskKind task, std::size_t input_dim, std::size_t label_dim, Rng rng)
    : task_(task), label_dim_(label_dim) {
  if (label_dim == 0) throw std::invalid_argument("head label_dim must be >= 1");
  if (task == TaskKind::GraphRegression) {
    Rng gate_rng = rng.split("gate");
    Rng out_rng = rng.split("out");
    params_.add("head/gate/weight", glorot_uniform(input_dim, label_dim, gate_rng));
    params_.add("head/gate/bias", Tensor::zeros({label_dim}));
    params_.add("head/out/weight", glorot_uniform(input_dim, label_dim, out_rng));
    params_.add("head/out/bias", Tensor::zeros({label_dim}));
  } else {
    Rng w_rng = rng.split("weight");
    params_.add("head/weight", glorot_uniform(input_dim, label_dim, w_rng));
    params_.add("head/bias", Tensor::zeros({label_dim}));
  }
}

Tensor Head::forward(const Tensor& node_states, const BatchedGraph& batch) const {
  if (task_ == TaskKind::GraphRegression) {
    return graph_regression_head(node_states, batch.graph_of_node, batch.num_graphs, params_);
  }
  return node_classification_head(node_states, params_);
}

Tensor Head::loss(const Tensor& outputs, const Tensor& targets) const {
  return task_ == TaskKind::NodeClassification ? bce_with_logits(outputs, targets) : mse(outputs, targets);
}

Tensor node_classification_head(const Tensor& node_states, const ParameterStore& params) {
  const Tensor& w = params.get("head/weight");
  if (node_states.rank() != 2 || node_states.cols() != w.shape()[0]) {
    throw DimensionError("node head: states " + shape_to_string(node_states.shape()) + " do not match weight " +
                         shape_to_string(w.shape()));
  }
  const Tensor& b = params.get("head/bias");
  return linear(node_states, w, &b);
}

Tensor graph_regression_head(const Tensor& node_states, std::span<const std::size_t> graph_of_node,
                             std::size_t num_graphs, const ParameterStore& params) {
  const Tensor& gw = params.get("head/gate/weight");
  if (node_states.rank() != 2 || node_states.cols() != gw.shape()[0]) {
    throw DimensionError("graph head: states " + shape_to_string(node_states.shape()) + " do not match weight " +
                         shape_to_string(gw.shape()));
  }
  if (graph_of_node.size() != node_states.rows()) {
    throw DimensionError("graph head: " + std::to_string(graph_of_node.size()) + " graph ids for " +
                         std::to_string(node_states.rows()) + " nodes");
  }
  std::vector<std::size_t> nodes_per_graph(num_graphs, 0);
  for (std::size_t g : graph_of_node) {
    if (g >= num_graphs) throw IndexError("graph head: graph id " + std::to_string(g) + " out of range");
    ++nodes_per_graph[g];
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (nodes_per_graph[g] == 0) std::cerr << "warning: graph " << g << " has no nodes; readout is 0\n";
  }
  const Tensor& gb = params.get("head/gate/bias");
  const Tensor& ob = params.get("head/out/bias");
  Tensor gate = sigmoid(linear(node_states, gw, &gb));
  Tensor value = linear(node_states, params.get("head/out/weight"), &ob);
  return segment_sum(mul(gate, value), graph_of_node, num_graphs);
}

std::vector<int> threshold_predictions(const Tensor& logits) {
  std::vector<int> out(logits.numel());
  auto v = logits.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] >= 0 ? 1 : 0;
  return out;
}

double micro_f1(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("micro_f1: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) throw std::invalid_argument("micro_f1: entries must be 0 or 1");
    tp += p & y;
    fp += p & (1 - y);
    fn += (1 - p) & y;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double mae(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw DimensionError("mae: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(targets.size()) + " targets");
  }
  if (predictions.empty()) return 0.0;
  double total = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) total += std::abs(predictions[i] - targets[i]);
  return total / static_cast<double>(predictions.size());
}

Dataset gen_neighbour_count(std::uint64_t seed, std::size_t num_graphs, std::size_t nodes_per_graph,
                            double edges_per_node) {
  if (num_graphs == 0 || nodes_per_graph == 0) throw std::invalid_argument("gen_neighbour_count: sizes must be >= 1");
  Dataset ds;
  ds.task = TaskKind::NodeRegression;
  ds.edge_types = {"1", "2"};
  ds.feature_dim = 2;
  ds.label_dim = 1;
  const Rng root = Rng(seed).split("neighbour_count");
  const std::size_t n = nodes_per_graph;
  for (std::size_t gi = 0; gi < num_graphs; ++gi) {
    Rng rng = root.split(gi);
    TypedGraph g;
    g.num_nodes = n;
    g.edge_types = ds.edge_types;
    g.edges.resize(2);
    g.features = Matrix(n, 2);
    std::vector<bool> in_a(n);
    for (std::size_t v = 0; v < n; ++v) {
      in_a[v] = rng.bernoulli(0.5);
      g.features(v, in_a[v] ? 0 : 1) = 1.0;
    }
    // Edge count per type varies around edges_per_node * n.
    for (std::size_t t = 0; t < 2; ++t) {
      const auto max_edges = static_cast<std::uint64_t>(std::llround(2.0 * edges_per_node * static_cast<double>(n)));
      const std::uint64_t count = rng.uniform_index(max_edges + 1);
      for (std::uint64_t e = 0; e < count; ++e) {
        g.edges[t].emplace_back(rng.uniform_index(n), rng.uniform_index(n));
      }
    }
    Matrix labels(n, 1);
    for (std::size_t t = 0; t < 2; ++t) {
      for (const auto& [src, tgt] : g.edges[t]) {
        if (in_a[tgt] == (t == 0)) labels(tgt, 0) += 1.0;
      }
    }
    g.node_labels = std::move(labels);
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

Dataset gen_wl_pair() {
  Dataset ds;
  ds.task = TaskKind::GraphRegression;
  ds.edge_types = {"1", "2"};
  ds.feature_dim = 3;
  ds.label_dim = 1;
  constexpr std::size_t v = 0, u = 1, w = 2;
  for (int variant = 0; variant < 2; ++variant) {
    TypedGraph g;
    g.num_nodes = 3;
    g.edge_types = ds.edge_types;
    g.edges.resize(2);
    g.features = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) g.features(i, i) = 1.0;
    g.edges[variant == 0 ? 0 : 1].emplace_back(v, u);
    g.edges[variant == 0 ? 1 : 0].emplace_back(w, u);
    g.targets = std::vector<double>{static_cast<double>(variant)};
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

Dataset gen_ppi_like(std::uint64_t seed, const PpiLikeOptions& o) {
  if (o.num_graphs == 0 || o.nodes_per_graph == 0 || o.feature_dim == 0 || o.label_dim == 0) {
    throw std::invalid_argument("gen_ppi_like: sizes must be >= 1");
  }
  if (o.nodes_per_graph < 2 && (o.in_degree_a > 0 || o.in_degree_b > 0)) {
    throw std::invalid_argument("gen_ppi_like: in-edges need at least 2 nodes per graph");
  }
  Dataset ds;
  ds.task = TaskKind::NodeClassification;
  ds.edge_types = {"a", "b"};
  ds.feature_dim = o.feature_dim;
  ds.label_dim = o.label_dim;

  // The label rule is shared by every graph generated from `seed`.
  Rng rule_rng = Rng(seed).split("ppi_rule");
  struct Rule {
    std::size_t via_a, via_b, own;
  };
  std::vector<Rule> rules(o.label_dim);
  for (auto& r : rules) {
    r.via_a = rule_rng.uniform_index(o.feature_dim);
    r.via_b = rule_rng.uniform_index(o.feature_dim);
    r.own = rule_rng.uniform_index(o.feature_dim);
  }

  const Rng graph_root = Rng(seed).split("ppi_graphs");
  const std::size_t n = o.nodes_per_graph;
  for (std::size_t gi = 0; gi < o.num_graphs; ++gi) {
    Rng rng = graph_root.split(static_cast<std::uint64_t>(o.first_graph + gi));
    TypedGraph g;
    g.num_nodes = n;
    g.edge_types = ds.edge_types;
    g.edges.resize(2);
    g.features = Matrix(n, o.feature_dim);
    for (double& x : g.features.data) x = rng.bernoulli(o.feature_density) ? 1.0 : 0.0;
    const std::size_t degree[2] = {o.in_degree_a, o.in_degree_b};
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t k = 0; k < degree[t]; ++k) {
          std::size_t src = rng.uniform_index(n - 1);
          if (src >= v) ++src;
          g.edges[t].emplace_back(src, v);
        }
      }
    }
    Matrix score(n, o.label_dim);
    for (std::size_t t = 0; t < 2; ++t) {
      for (const auto& [src, tgt] : g.edges[t]) {
        for (std::size_t j = 0; j < o.label_dim; ++j) {
          score(tgt, j) += g.features(src, t == 0 ? rules[j].via_a : rules[j].via_b);
        }
      }
    }
    Matrix labels(n, o.label_dim);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t j = 0; j < o.label_dim; ++j) {
        labels(v, j) = score(v, j) + 2.0 * g.features(v, rules[j].own) >= 3.0 ? 1.0 : 0.0;
      }
    }
    g.node_labels = std::move(labels);
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

}  // namespace relgnn
