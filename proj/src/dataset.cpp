#include "relgnn/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relgnn/tensor.hpp"

namespace relgnn {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

TaskKind task_kind_from_name(std::string_view name) {
  if (name == "node_classification") return TaskKind::NodeClassification;
  if (name == "node_regression") return TaskKind::NodeRegression;
  if (name == "graph_regression") return TaskKind::GraphRegression;
  throw std::invalid_argument("unknown task '" + std::string(name) + "'");
}

std::string task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::NodeClassification: return "node_classification";
    case TaskKind::NodeRegression: return "node_regression";
    case TaskKind::GraphRegression: return "graph_regression";
  }
  return "node_classification";
}

std::size_t Dataset::total_nodes() const {
  std::size_t n = 0;
  for (const auto& g : graphs) n += g.num_nodes;
  return n;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError("dataset schema violation at " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(path, "unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
  return *it;
}

std::size_t as_index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

Matrix parse_matrix(const json& v, const std::string& path, std::size_t rows) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  if (v.size() != rows) {
    fail(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(v.size()));
  }
  Matrix m(rows, rows ? v[0].size() : 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array()) fail(rp, "expected an array of numbers");
    if (v[r].size() != m.cols) {
      fail(rp, "row has " + std::to_string(v[r].size()) + " entries, expected " + std::to_string(m.cols));
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      m(r, c) = as_number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Dataset parse_dataset(std::string_view text, const LoadOptions& options) {
  if (options.format != "json") {
    throw std::invalid_argument("unsupported dataset format '" + options.format + "'");
  }
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("dataset is not valid JSON (" + line_column(text, e.byte) + "): " + e.what());
  }

  check_keys(doc, "$", {"task", "edge_types", "graphs"});
  Dataset ds;
  const auto& task = require(doc, "$", "task");
  if (!task.is_string()) fail("$.task", "expected a string");
  try {
    ds.task = task_kind_from_name(task.get<std::string>());
  } catch (const std::invalid_argument&) {
    fail("$.task", "unknown task '" + task.get<std::string>() + "'");
  }

  const auto& types = require(doc, "$", "edge_types");
  if (!types.is_array()) fail("$.edge_types", "expected an array of strings");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string p = "$.edge_types[" + std::to_string(i) + "]";
    if (!types[i].is_string()) fail(p, "expected a string");
    auto name = types[i].get<std::string>();
    if (!seen.insert(name).second) fail(p, "duplicate edge type '" + name + "'");
    ds.edge_types.push_back(std::move(name));
  }

  const auto& graphs = require(doc, "$", "graphs");
  if (!graphs.is_array()) fail("$.graphs", "expected an array");
  bool dims_set = false;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const std::string gp = "$.graphs[" + std::to_string(gi) + "]";
    const auto& gj = graphs[gi];
    check_keys(gj, gp, {"num_nodes", "features", "edges", "node_labels", "targets"});
    TypedGraph g;
    g.num_nodes = as_index(require(gj, gp, "num_nodes"), gp + ".num_nodes");
    g.features = parse_matrix(require(gj, gp, "features"), gp + ".features", g.num_nodes);
    g.edge_types = ds.edge_types;
    g.edges.resize(ds.edge_types.size());

    if (auto it = gj.find("edges"); it != gj.end()) {
      if (!it->is_object()) fail(gp + ".edges", "expected an object keyed by edge type");
      for (const auto& [type_name, list] : it->items()) {
        const std::string ep = gp + ".edges[\"" + type_name + "\"]";
        auto t = g.type_index(type_name);
        if (!t) fail(ep, "edge type not declared in $.edge_types");
        if (!list.is_array()) fail(ep, "expected an array of [src, tgt] pairs");
        for (std::size_t k = 0; k < list.size(); ++k) {
          const std::string kp = ep + "[" + std::to_string(k) + "]";
          if (!list[k].is_array() || list[k].size() != 2) fail(kp, "expected [src, tgt]");
          const std::size_t src = as_index(list[k][0], kp + "[0]");
          const std::size_t tgt = as_index(list[k][1], kp + "[1]");
          if (src >= g.num_nodes || tgt >= g.num_nodes) {
            throw IndexError("dataset edge " + kp + " = [" + std::to_string(src) + ", " +
                             std::to_string(tgt) + "] out of range for " +
                             std::to_string(g.num_nodes) + " nodes");
          }
          g.edges[*t].emplace_back(src, tgt);
        }
      }
    }

    std::size_t label_dim = 0;
    const bool has_labels = gj.contains("node_labels");
    const bool has_targets = gj.contains("targets");
    if (ds.task == TaskKind::GraphRegression) {
      if (has_labels) fail(gp, "graph_regression graphs carry 'targets', not 'node_labels'");
      if (has_targets) {
        const auto& tj = gj["targets"];
        if (!tj.is_array()) fail(gp + ".targets", "expected an array of numbers");
        std::vector<double> targets;
        for (std::size_t k = 0; k < tj.size(); ++k) {
          targets.push_back(as_number(tj[k], gp + ".targets[" + std::to_string(k) + "]"));
        }
        label_dim = targets.size();
        g.targets = std::move(targets);
      }
    } else {
      if (has_targets) fail(gp, std::string(task_kind_name(ds.task)) + " graphs carry 'node_labels', not 'targets'");
      if (has_labels) {
        g.node_labels = parse_matrix(gj["node_labels"], gp + ".node_labels", g.num_nodes);
        label_dim = g.node_labels->cols;
      }
    }

    if (!dims_set) {
      ds.feature_dim = g.features.cols;
      ds.label_dim = label_dim;
      dims_set = g.num_nodes > 0 || ds.task == TaskKind::GraphRegression;
    } else {
      if (g.num_nodes > 0 && g.features.cols != ds.feature_dim) {
        fail(gp + ".features", "feature dim " + std::to_string(g.features.cols) + " differs from " +
                                   std::to_string(ds.feature_dim));
      }
      if ((has_labels || has_targets) && label_dim != ds.label_dim && g.num_nodes > 0) {
        fail(gp, "label dim " + std::to_string(label_dim) + " differs from " + std::to_string(ds.label_dim));
      }
    }
    if (g.num_nodes == 0) g.features.cols = ds.feature_dim;
    if (options.add_inverse_edges) g = add_inverse_edges(g);
    g.validate();
    ds.graphs.push_back(std::move(g));
  }
  if (options.add_inverse_edges && !ds.graphs.empty()) ds.edge_types = ds.graphs.front().edge_types;
  else if (options.add_inverse_edges) {
    const std::size_t n = ds.edge_types.size();
    for (std::size_t t = 0; t < n; ++t) ds.edge_types.push_back(std::string(kInversePrefix) + ds.edge_types[t]);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str(), options);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string dataset_to_json(const Dataset& ds) {
  ordered_json doc;
  doc["task"] = task_kind_name(ds.task);
  doc["edge_types"] = ds.edge_types;
  auto graphs = ordered_json::array();
  auto matrix_json = [](const Matrix& m) {
    auto rows = ordered_json::array();
    for (std::size_t r = 0; r < m.rows; ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
  };
  for (const auto& g : ds.graphs) {
    ordered_json gj;
    gj["num_nodes"] = g.num_nodes;
    gj["features"] = matrix_json(g.features);
    ordered_json edges = ordered_json::object();
    for (std::size_t t = 0; t < g.edge_types.size(); ++t) {
      auto list = ordered_json::array();
      for (const auto& [src, tgt] : g.edges[t]) list.push_back({src, tgt});
      edges[g.edge_types[t]] = std::move(list);
    }
    gj["edges"] = std::move(edges);
    if (g.node_labels) gj["node_labels"] = matrix_json(*g.node_labels);
    if (g.targets) gj["targets"] = *g.targets;
    graphs.push_back(std::move(gj));
  }
  doc["graphs"] = std::move(graphs);
  return doc.dump();
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset '" + path.string() + "'");
  out << dataset_to_json(dataset) << '\n';
}

}  // namespace relgnn
