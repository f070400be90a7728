#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace relgnn {

inline constexpr std::string_view kSelfLoopType = "SELF";
inline constexpr std::string_view kInversePrefix = "INV_";

/// Structural problem with a graph (duplicate type names, double
/// augmentation, mismatched vocabularies).
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major dense matrix of plain data (features, labels).
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// (source, target)
using Edge = std::pair<std::size_t, std::size_t>;

/// Directed multigraph whose edges are grouped by type. `edges[t]` holds the
/// edges of type `edge_types[t]`; messages flow from source to target only.
struct TypedGraph {
  std::size_t num_nodes = 0;
  std::vector<std::string> edge_types;
  std::vector<std::vector<Edge>> edges;
  Matrix features;                      // num_nodes x feature_dim
  std::optional<Matrix> node_labels;    // num_nodes x label_dim
  std::optional<std::vector<double>> targets;  // graph-level regression targets

  /// Throws GraphError / IndexError if any invariant is broken.
  void validate() const;

  std::optional<std::size_t> type_index(std::string_view name) const;
  bool has_self_loops() const { return type_index(kSelfLoopType).has_value(); }
  std::size_t num_edges() const;
  std::size_t feature_dim() const { return features.cols; }

  bool operator==(const TypedGraph&) const = default;
};

/// Per-target, per-type in-degree: count(v, t) = |{(u, t, v) in E}|.
class NormCounts {
 public:
  NormCounts(std::size_t num_nodes, std::size_t num_types)
      : num_nodes_(num_nodes), num_types_(num_types), counts_(num_nodes * num_types, 0) {}

  std::size_t operator()(std::size_t node, std::size_t type) const { return counts_[node * num_types_ + type]; }
  std::size_t& at(std::size_t node, std::size_t type) { return counts_[node * num_types_ + type]; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_types() const { return num_types_; }
  /// Sum over all types.
  std::size_t total(std::size_t node) const;

 private:
  std::size_t num_nodes_;
  std::size_t num_types_;
  std::vector<std::size_t> counts_;
};

/// Adds type "SELF" holding exactly one (v, v) per node. Throws GraphError
/// if the graph already has it.
TypedGraph augment_self_loops(const TypedGraph& g);

NormCounts norm_counts(const TypedGraph& g);

/// Adds a type "INV_<name>" with reversed edges for every existing type.
TypedGraph add_inverse_edges(const TypedGraph& g);

/// Relabels node v as perm[v], permuting features, labels and endpoints.
TypedGraph permute_nodes(const TypedGraph& g, std::span<const std::size_t> perm);

struct BatchedGraph {
  TypedGraph graph;
  std::vector<std::size_t> graph_of_node;
  std::vector<std::size_t> node_offsets;  // num_graphs + 1 entries
  std::size_t num_graphs = 0;

  std::size_t nodes_in(std::size_t graph_index) const {
    return node_offsets[graph_index + 1] - node_offsets[graph_index];
  }
};

/// Disjoint union; node ids of graph i are shifted by the node count of
/// graphs 0..i-1. All graphs must share edge vocabulary and feature width.
BatchedGraph batch_disjoint_union(std::span<const TypedGraph> graphs);

}  // namespace relgnn
