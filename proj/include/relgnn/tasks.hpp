#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relgnn/dataset.hpp"
#include "relgnn/graph.hpp"
#include "relgnn/parameters.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

enum class TaskSpecKind { NodeClassificationMultilabel, GraphRegression, SyntheticNeighbourCount, WlPairProbe };

struct TaskSpec {
  TaskSpecKind kind = TaskSpecKind::NodeClassificationMultilabel;
  std::size_t label_dim = 1;
  std::string loss;    // "bce" | "mse" | "none"
  std::string metric;  // "micro_f1" | "mae" | "linf_gap"

  /// Throws std::invalid_argument if loss/metric do not fit the kind.
  void validate() const;
  bool higher_is_better() const { return metric == "micro_f1"; }

  static TaskSpec for_task(TaskKind task, std::size_t label_dim);
};

/// Readout on top of the final node representations. Node tasks produce
/// one row per node; graph regression a gated sum per graph:
///   out_g = sum_{v in g} sigmoid(h_v W_gate + b_gate) * (h_v W_out + b_out)
class Head {
 public:
  Head(TaskKind task, std::size_t input_dim, std::size_t label_dim, Rng rng);

  TaskKind task() const { return task_; }
  std::size_t label_dim() const { return label_dim_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  Tensor forward(const Tensor& node_states, const BatchedGraph& batch) const;
  /// Training objective: BCE for classification, MSE for regression.
  Tensor loss(const Tensor& outputs, const Tensor& targets) const;

 private:
  TaskKind task_;
  std::size_t label_dim_;
  ParameterStore params_;
};

/// Per-node logits [N x L] = h W + b.
Tensor node_classification_head(const Tensor& node_states, const ParameterStore& params);
/// Gated sum per graph [num_graphs x L]. Empty graphs yield 0 and a warning.
Tensor graph_regression_head(const Tensor& node_states, std::span<const std::size_t> graph_of_node,
                             std::size_t num_graphs, const ParameterStore& params);

/// 1 where sigmoid(logit) >= 0.5, i.e. logit >= 0 (ties are positive).
std::vector<int> threshold_predictions(const Tensor& logits);

/// 2TP / (2TP + FP + FN) pooled over all entries; 1.0 when TP = FP = FN = 0.
double micro_f1(std::span<const int> predictions, std::span<const int> labels);
double mae(std::span<const double> predictions, std::span<const double> targets);

/// Random graphs over node sets A and B (one-hot features [1,0] / [0,1]) and
/// edge types "1" and "2". Target of a node in A is its number of type-1
/// in-neighbours, of a node in B its number of type-2 in-neighbours.
Dataset gen_neighbour_count(std::uint64_t seed, std::size_t num_graphs, std::size_t nodes_per_graph,
                            double edges_per_node = 2.0);

/// v -1-> u <-2- w and v -2-> u <-1- w, nodes ordered (v, u, w) with one-hot
/// role features shared by both graphs.
Dataset gen_wl_pair();

struct PpiLikeOptions {
  std::size_t num_graphs = 20;
  std::size_t nodes_per_graph = 200;
  std::size_t feature_dim = 50;
  std::size_t label_dim = 10;
  std::size_t in_degree_a = 4;
  std::size_t in_degree_b = 3;
  double feature_density = 0.25;
  /// Graph i is drawn from stream first_graph + i, so splits generated from
  /// one seed with disjoint ranges share the label rule but not graphs.
  std::size_t first_graph = 0;
};

/// Multi-label node classification over edge types "a" and "b". Each node
/// has exactly in_degree_a / in_degree_b incoming edges of each type; label j
/// fires when (#a-in-neighbours with feature p_j) + (#b-in-neighbours with
/// feature q_j) + 2 * own feature r_j reaches 3.
Dataset gen_ppi_like(std::uint64_t seed, const PpiLikeOptions& options = {});

}  // namespace relgnn
