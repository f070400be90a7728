#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relgnn/graph.hpp"

namespace relgnn {

enum class TaskKind { NodeClassification, NodeRegression, GraphRegression };

TaskKind task_kind_from_name(std::string_view name);
std::string task_kind_name(TaskKind kind);

/// Malformed dataset document. The message carries a line/column for parse
/// errors or a field path (e.g. `graphs[3].edges["1"][7]`) for schema errors.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  TaskKind task = TaskKind::NodeClassification;
  std::vector<std::string> edge_types;
  std::vector<TypedGraph> graphs;
  std::size_t feature_dim = 0;
  std::size_t label_dim = 0;

  std::size_t total_nodes() const;
};

struct LoadOptions {
  std::string format = "json";
  /// Materialise a reversed "INV_<type>" edge type for every type.
  bool add_inverse_edges = false;
};

/// Parses the JSON graph container:
///   {"task": "node_classification" | "node_regression" | "graph_regression",
///    "edge_types": [...],
///    "graphs": [{"num_nodes": n, "features": [[...]],
///                "edges": {"<type>": [[src, tgt], ...]},
///                "node_labels": [[...]] | "targets": [...]}]}
/// Unknown keys are rejected.
Dataset parse_dataset(std::string_view text, const LoadOptions& options = {});
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

std::string dataset_to_json(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace relgnn
