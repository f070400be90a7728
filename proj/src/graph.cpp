#include "relgnn/graph.hpp"

#include <set>

#include "relgnn/tensor.hpp"

namespace relgnn {

void TypedGraph::validate() const {
  if (edges.size() != edge_types.size()) {
    throw GraphError("graph has " + std::to_string(edge_types.size()) + " edge types but " +
                     std::to_string(edges.size()) + " edge lists");
  }
  std::set<std::string_view> seen;
  for (const auto& name : edge_types) {
    if (!seen.insert(name).second) throw GraphError("duplicate edge type '" + name + "'");
  }
  for (std::size_t t = 0; t < edges.size(); ++t) {
    for (std::size_t i = 0; i < edges[t].size(); ++i) {
      const auto [src, tgt] = edges[t][i];
      if (src >= num_nodes || tgt >= num_nodes) {
        throw IndexError("edge " + std::to_string(i) + " of type '" + edge_types[t] + "' [" +
                         std::to_string(src) + ", " + std::to_string(tgt) + "] out of range for " +
                         std::to_string(num_nodes) + " nodes");
      }
    }
  }
  if (features.rows != num_nodes) {
    throw GraphError("feature matrix has " + std::to_string(features.rows) + " rows for " +
                     std::to_string(num_nodes) + " nodes");
  }
  if (node_labels && node_labels->rows != num_nodes) {
    throw GraphError("label matrix has " + std::to_string(node_labels->rows) + " rows for " +
                     std::to_string(num_nodes) + " nodes");
  }
}

std::optional<std::size_t> TypedGraph::type_index(std::string_view name) const {
  for (std::size_t t = 0; t < edge_types.size(); ++t) {
    if (edge_types[t] == name) return t;
  }
  return std::nullopt;
}

std::size_t TypedGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& list : edges) n += list.size();
  return n;
}

std::size_t NormCounts::total(std::size_t node) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < num_types_; ++t) n += (*this)(node, t);
  return n;
}

TypedGraph augment_self_loops(const TypedGraph& g) {
  if (g.has_self_loops()) {
    throw GraphError("graph already carries the '" + std::string(kSelfLoopType) +
                     "' edge type; self-loop augmentation must be applied once");
  }
  TypedGraph out = g;
  out.edge_types.emplace_back(kSelfLoopType);
  auto& loops = out.edges.emplace_back();
  loops.reserve(g.num_nodes);
  for (std::size_t v = 0; v < g.num_nodes; ++v) loops.emplace_back(v, v);
  return out;
}

NormCounts norm_counts(const TypedGraph& g) {
  NormCounts counts(g.num_nodes, g.edge_types.size());
  for (std::size_t t = 0; t < g.edges.size(); ++t) {
    for (const auto& [src, tgt] : g.edges[t]) ++counts.at(tgt, t);
  }
  return counts;
}

TypedGraph add_inverse_edges(const TypedGraph& g) {
  TypedGraph out = g;
  for (std::size_t t = 0; t < g.edge_types.size(); ++t) {
    std::string name = std::string(kInversePrefix) + g.edge_types[t];
    if (g.type_index(name)) throw GraphError("inverse edge type '" + name + "' already present");
    out.edge_types.push_back(std::move(name));
    auto& inv = out.edges.emplace_back();
    inv.reserve(g.edges[t].size());
    for (const auto& [src, tgt] : g.edges[t]) inv.emplace_back(tgt, src);
  }
  return out;
}

TypedGraph permute_nodes(const TypedGraph& g, std::span<const std::size_t> perm) {
  if (perm.size() != g.num_nodes) {
    throw GraphError("permutation of length " + std::to_string(perm.size()) + " for " +
                     std::to_string(g.num_nodes) + " nodes");
  }
  TypedGraph out = g;
  auto permute_rows = [&](const Matrix& m) {
    Matrix r(m.rows, m.cols);
    for (std::size_t v = 0; v < m.rows; ++v) {
      for (std::size_t c = 0; c < m.cols; ++c) r(perm[v], c) = m(v, c);
    }
    return r;
  };
  out.features = permute_rows(g.features);
  if (g.node_labels) out.node_labels = permute_rows(*g.node_labels);
  for (auto& list : out.edges) {
    for (auto& [src, tgt] : list) {
      src = perm[src];
      tgt = perm[tgt];
    }
  }
  return out;
}

BatchedGraph batch_disjoint_union(std::span<const TypedGraph> graphs) {
  BatchedGraph batch;
  batch.num_graphs = graphs.size();
  batch.node_offsets.push_back(0);
  if (graphs.empty()) return batch;

  const auto& first = graphs.front();
  TypedGraph& u = batch.graph;
  u.edge_types = first.edge_types;
  u.edges.resize(first.edge_types.size());
  u.features = Matrix(0, first.features.cols);
  const bool labelled = first.node_labels.has_value();
  if (labelled) u.node_labels = Matrix(0, first.node_labels->cols);

  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& g = graphs[gi];
    if (g.edge_types != first.edge_types) {
      throw GraphError("batch_disjoint_union: graph " + std::to_string(gi) +
                       " has a different edge-type vocabulary");
    }
    if (g.features.cols != first.features.cols) {
      throw GraphError("batch_disjoint_union: graph " + std::to_string(gi) + " has feature dim " +
                       std::to_string(g.features.cols) + ", expected " +
                       std::to_string(first.features.cols));
    }
    if (g.node_labels.has_value() != labelled ||
        (labelled && g.node_labels->cols != first.node_labels->cols)) {
      throw GraphError("batch_disjoint_union: graph " + std::to_string(gi) + " has mismatched labels");
    }
    const std::size_t offset = u.num_nodes;
    for (std::size_t t = 0; t < g.edges.size(); ++t) {
      for (const auto& [src, tgt] : g.edges[t]) u.edges[t].emplace_back(src + offset, tgt + offset);
    }
    u.features.data.insert(u.features.data.end(), g.features.data.begin(), g.features.data.end());
    u.features.rows += g.num_nodes;
    if (labelled) {
      u.node_labels->data.insert(u.node_labels->data.end(), g.node_labels->data.begin(),
                                 g.node_labels->data.end());
      u.node_labels->rows += g.num_nodes;
    }
    batch.graph_of_node.insert(batch.graph_of_node.end(), g.num_nodes, gi);
    u.num_nodes += g.num_nodes;
    batch.node_offsets.push_back(u.num_nodes);
  }
  return batch;
}

}  // namespace relgnn
