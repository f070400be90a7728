#include "relgnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace relgnn {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::size_t read_count(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  throw ConfigError("'" + key + "' must be a non-negative integer");
}

double read_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

bool read_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return v.get<bool>();
}

std::string read_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
#define RELGNN_COUNT(field) t[#field] = [](ExperimentConfig& c, const json& v, const std::string& k) { c.field = read_count(v, k); }
#define RELGNN_REAL(field) t[#field] = [](ExperimentConfig& c, const json& v, const std::string& k) { c.field = read_real(v, k); }
#define RELGNN_BOOL(field) t[#field] = [](ExperimentConfig& c, const json& v, const std::string& k) { c.field = read_bool(v, k); }
#define RELGNN_STRING(field) t[#field] = [](ExperimentConfig& c, const json& v, const std::string& k) { c.field = read_string(v, k); }
    RELGNN_COUNT(hidden_size);
    RELGNN_COUNT(graph_num_layers);
    RELGNN_REAL(graph_layer_input_dropout_keep_prob);
    RELGNN_BOOL(layer_norm);
    RELGNN_COUNT(dense_layers);
    RELGNN_COUNT(res_connection);
    RELGNN_STRING(graph_activation_function);
    RELGNN_STRING(optimizer);
    RELGNN_REAL(lr);
    RELGNN_STRING(cell);
    RELGNN_COUNT(num_heads);
    RELGNN_STRING(model);
    RELGNN_STRING(data_dir);
    RELGNN_STRING(film_aggregation);
    RELGNN_STRING(film_post);
    RELGNN_COUNT(num_chunks);
    RELGNN_STRING(chunk_tying);
    RELGNN_STRING(normalization);
    RELGNN_BOOL(input_projection);
    RELGNN_BOOL(add_inverse_edges);
    RELGNN_COUNT(patience);
    RELGNN_COUNT(max_epochs);
    RELGNN_COUNT(batch_nodes);
#undef RELGNN_COUNT
#undef RELGNN_REAL
#undef RELGNN_BOOL
#undef RELGNN_STRING
    t["seed"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      if (v.is_null()) {
        c.seed.reset();
      } else {
        c.seed = read_count(v, k);
      }
    };
    t["clip_norm"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      if (v.is_null()) {
        c.clip_norm.reset();
      } else {
        c.clip_norm = read_real(v, k);
      }
    };
    return t;
  }();
  return table;
}

template <typename T>
void require_in(const std::string& key, const T& value, std::initializer_list<T> allowed) {
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
    throw ConfigError("'" + key + "' is outside its search domain; pass --allow-custom to use it");
  }
}

// Wraps parse errors of the enum helpers as configuration errors.
template <typename F>
auto parse_knob(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("'" + key + "': " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ordered_json schema_json(const Dataset& d) {
  ordered_json s;
  s["task"] = task_kind_name(d.task);
  s["edge_types"] = d.edge_types;
  s["feature_dim"] = d.feature_dim;
  s["label_dim"] = d.label_dim;
  return s;
}

}  // namespace

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

const std::vector<KnobDomain>& knob_domains() {
  static const std::vector<KnobDomain> domains = {
      {"hidden_size", "size of per-node representations", "{64, 96, 128, 192, 256, 320}"},
      {"graph_num_layers", "number of propagation steps / layers", "{2, 3, 4, 5, 6, 8, 10}"},
      {"graph_layer_input_dropout_keep_prob", "dropout keep probability before each propagation step",
       "{0.8, 0.9, 1.0}"},
      {"layer_norm", "layer norm after each propagation step", "{true, false}"},
      {"dense_layers", "node-wise dense layer between every N steps (32 disables)", "{1, 2, 32}"},
      {"res_connection", "residual connection around every N steps (32 disables)", "{1, 2, 32}"},
      {"graph_activation_function", "non-linearity after message passing", "{relu, leaky_relu, elu, gelu, tanh}"},
      {"optimizer", "optimiser with TF 1.x default parameters", "{RMSProp, Adam}"},
      {"lr", "learning rate", "[0.0005, 0.001]"},
      {"cell", "recurrent unit of GGNN", "{RNN, GRU, LSTM}"},
      {"num_heads", "attention heads of RGAT", "{4, 8, 16}"},
  };
  return domains;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) { return ExperimentConfig{}.with(doc); }

ExperimentConfig ExperimentConfig::with(const json& overrides) const {
  if (!overrides.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c = *this;
  const auto& table = setters();
  for (const auto& [key, value] : overrides.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value, key);
  }
  return c;
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json d;
  d["model"] = model;
  d["data_dir"] = data_dir;
  d["seed"] = seed ? json(*seed) : json(nullptr);
  d["hidden_size"] = hidden_size;
  d["graph_num_layers"] = graph_num_layers;
  d["graph_layer_input_dropout_keep_prob"] = graph_layer_input_dropout_keep_prob;
  d["layer_norm"] = layer_norm;
  d["dense_layers"] = dense_layers;
  d["res_connection"] = res_connection;
  d["graph_activation_function"] = graph_activation_function;
  d["optimizer"] = optimizer;
  d["lr"] = lr;
  d["cell"] = cell;
  d["num_heads"] = num_heads;
  d["film_aggregation"] = film_aggregation;
  d["film_post"] = film_post;
  d["num_chunks"] = num_chunks;
  d["chunk_tying"] = chunk_tying;
  d["normalization"] = normalization;
  d["input_projection"] = input_projection;
  d["add_inverse_edges"] = add_inverse_edges;
  d["patience"] = patience;
  d["max_epochs"] = max_epochs;
  d["batch_nodes"] = batch_nodes;
  d["clip_norm"] = clip_norm ? json(*clip_norm) : json(nullptr);
  return d;
}

void ExperimentConfig::validate(bool allow_custom) const {
  if (hidden_size == 0) throw ConfigError("'hidden_size' must be >= 1");
  if (graph_num_layers == 0) throw ConfigError("'graph_num_layers' must be >= 1");
  if (!(graph_layer_input_dropout_keep_prob > 0 && graph_layer_input_dropout_keep_prob <= 1)) {
    throw ConfigError("'graph_layer_input_dropout_keep_prob' must lie in (0, 1]");
  }
  if (dense_layers == 0) throw ConfigError("'dense_layers' must be >= 1");
  if (res_connection == 0) throw ConfigError("'res_connection' must be >= 1");
  if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("'lr' must be positive");
  if (num_heads == 0) throw ConfigError("'num_heads' must be >= 1");
  if (num_chunks == 0) throw ConfigError("'num_chunks' must be >= 1");
  if (patience == 0) throw ConfigError("'patience' must be >= 1");
  if (max_epochs == 0) throw ConfigError("'max_epochs' must be >= 1");
  if (batch_nodes == 0) throw ConfigError("'batch_nodes' must be >= 1");
  if (clip_norm && !(*clip_norm > 0)) throw ConfigError("'clip_norm' must be positive");
  parse_knob("optimizer", [&] { return optimizer_kind_from_name(optimizer); });
  parse_knob("cell", [&] { return recurrent_kind_from_name(cell); });
  const StackConfig stack = stack_config();
  parse_knob("model", [&] {
    stack.cell.validate();
    return 0;
  });

  if (allow_custom) return;
  require_in<std::size_t>("hidden_size", hidden_size, {64, 96, 128, 192, 256, 320});
  require_in<std::size_t>("graph_num_layers", graph_num_layers, {2, 3, 4, 5, 6, 8, 10});
  const double keep = graph_layer_input_dropout_keep_prob;
  if (std::abs(keep - 0.8) > 1e-12 && std::abs(keep - 0.9) > 1e-12 && keep != 1.0) {
    throw ConfigError("'graph_layer_input_dropout_keep_prob' is outside its search domain; pass --allow-custom");
  }
  require_in<std::size_t>("dense_layers", dense_layers, {1, 2, 32});
  require_in<std::size_t>("res_connection", res_connection, {1, 2, 32});
  require_in<std::string>("graph_activation_function", graph_activation_function,
                          {"relu", "leaky_relu", "elu", "gelu", "tanh"});
  require_in<std::string>("optimizer", optimizer_kind_name(optimizer_kind_from_name(optimizer)), {"RMSProp", "Adam"});
  if (lr < 0.0005 || lr > 0.001) throw ConfigError("'lr' is outside its search domain [0.0005, 0.001]");
  require_in<std::string>("cell", recurrent_kind_name(recurrent_kind_from_name(cell)), {"RNN", "GRU", "LSTM"});
  require_in<std::size_t>("num_heads", num_heads, {4, 8, 16});
}

StackConfig ExperimentConfig::stack_config() const {
  StackConfig s;
  CellConfig& c = s.cell;
  c.kind = parse_knob("model", [&] { return cell_kind_from_name(model); });
  c.hidden_dim = hidden_size;
  c.activation = parse_knob("graph_activation_function", [&] { return activation_from_name(graph_activation_function); });
  c.num_heads = num_heads;
  c.recurrent = parse_knob("cell", [&] { return recurrent_kind_from_name(cell); });
  c.num_chunks = num_chunks;
  c.chunk_tying = parse_knob("chunk_tying", [&] { return chunk_tying_from_name(chunk_tying); });
  c.film_aggregation = parse_knob("film_aggregation", [&] { return film_aggregation_from_name(film_aggregation); });
  c.film_post = parse_knob("film_post", [&] { return post_ops_from_name(film_post); });
  c.normalization = parse_knob("normalization", [&] { return normalization_from_name(normalization); });
  s.num_layers = graph_num_layers;
  s.input_dropout_keep_prob = graph_layer_input_dropout_keep_prob;
  s.layer_norm = layer_norm;
  s.dense_layers = dense_layers;
  s.res_connection = res_connection;
  s.input_projection = input_projection;
  return s;
}

TrainConfig ExperimentConfig::train_config(std::uint64_t run_seed) const {
  TrainConfig t;
  t.optimizer = parse_knob("optimizer", [&] { return optimizer_kind_from_name(optimizer); });
  t.lr = lr;
  t.max_epochs = max_epochs;
  t.patience = patience;
  t.batch_nodes = batch_nodes;
  t.seed = run_seed;
  t.clip_norm = clip_norm;
  return t;
}

Splits load_splits(const fs::path& dir, bool add_inverse_edges) {
  LoadOptions opts;
  opts.add_inverse_edges = add_inverse_edges;
  Splits s{load_dataset(dir / "train.json", opts), load_dataset(dir / "valid.json", opts),
           load_dataset(dir / "test.json", opts)};
  check_same_schema(s.train, s.valid);
  check_same_schema(s.train, s.test);
  return s;
}

std::unique_ptr<Network> build_network(const ExperimentConfig& config, const Dataset& schema, std::uint64_t seed) {
  return std::make_unique<Network>(config.stack_config(), schema.edge_types, schema.feature_dim, schema.task,
                                   schema.label_dim, seed);
}

ordered_json make_checkpoint(const ExperimentConfig& config, const Dataset& schema, std::uint64_t seed,
                             const Network& net) {
  ordered_json doc;
  doc["format"] = "relgnn-checkpoint";
  doc["version"] = 1;
  doc["seed"] = seed;
  doc["config"] = config.to_json();
  doc["schema"] = schema_json(schema);
  doc["parameters"] = parameters_to_json(net.parameters());
  return doc;
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "relgnn-checkpoint") {
    throw ConfigError(path.string() + " is not a relgnn checkpoint");
  }
  LoadedCheckpoint ck;
  ck.config = ExperimentConfig::from_json(doc.at("config"));
  ck.seed = doc.at("seed").get<std::uint64_t>();
  const json& schema = doc.at("schema");
  Dataset shape;
  shape.task = task_kind_from_name(schema.at("task").get<std::string>());
  shape.edge_types = schema.at("edge_types").get<std::vector<std::string>>();
  shape.feature_dim = schema.at("feature_dim").get<std::size_t>();
  shape.label_dim = schema.at("label_dim").get<std::size_t>();
  ck.network = build_network(ck.config, shape, ck.seed);
  load_parameters_json(ck.network->parameters(), doc.at("parameters"));
  ck.edge_types = shape.edge_types;
  ck.task = shape.task;
  return ck;
}

RunOutcome run_experiment(const ExperimentConfig& config, const Splits& splits, std::uint64_t seed,
                          const fs::path& run_dir) {
  auto net = build_network(config, splits.train, seed);
  TrainConfig tc = config.train_config(seed);

  std::ofstream log;
  std::ofstream metrics;
  if (!run_dir.empty()) {
    fs::create_directories(run_dir);
    ExperimentConfig snapshot = config;
    snapshot.seed = seed;
    write_text(run_dir / kRunConfigFile, snapshot.to_json().dump(2) + "\n");
    log.open(run_dir / kRunLogFile);
    metrics.open(run_dir / kRunMetricsFile);
    if (!log || !metrics) throw std::runtime_error("cannot write into run directory " + run_dir.string());
    metrics << "epoch,train_loss,train_metric,valid_metric,seconds\n";
    metrics.precision(17);
    tc.on_epoch = [&](const EpochRecord& e) {
      metrics << e.epoch << ',' << e.train_loss << ',' << e.train_metric << ',' << e.valid_metric << ','
              << e.seconds << '\n';
      ordered_json line = {{"event", "epoch"},         {"epoch", e.epoch},
                           {"train_loss", e.train_loss}, {"train_metric", e.train_metric},
                           {"valid_metric", e.valid_metric}, {"seconds", e.seconds}};
      log << line.dump() << '\n';
    };
  }

  RunOutcome outcome;
  outcome.run_dir = run_dir;
  outcome.record = train(*net, splits.train, splits.valid, splits.test, tc);
  if (!run_dir.empty()) {
    ordered_json done = {{"event", "finished"},
                         {"best_epoch", outcome.record.best_epoch},
                         {"best_valid", outcome.record.best_valid},
                         {"test_metric", outcome.record.test_metric}};
    log << done.dump() << '\n';
    write_text(run_dir / kRunCheckpointFile, make_checkpoint(config, splits.train, seed, *net).dump() + "\n");
    write_text(run_dir / kRunRecordFile, outcome.record.to_json().dump(2) + "\n");
  }
  return outcome;
}

}  // namespace relgnn
