#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relgnn/dataset.hpp"
#include "relgnn/model.hpp"
#include "relgnn/trainer.hpp"

namespace relgnn {

/// Invalid experiment configuration (unknown key, wrong type, out-of-domain
/// value). Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One experiment. Knob names match the hyperparameter lists they come from;
/// the remaining keys select model, data and training budget.
struct ExperimentConfig {
  // Searchable knobs.
  std::size_t hidden_size = 256;
  std::size_t graph_num_layers = 3;
  double graph_layer_input_dropout_keep_prob = 1.0;
  bool layer_norm = false;
  std::size_t dense_layers = 32;
  std::size_t res_connection = 32;
  std::string graph_activation_function = "relu";
  std::string optimizer = "Adam";
  double lr = 0.001;
  std::string cell = "GRU";
  std::size_t num_heads = 4;

  // Model and data.
  std::string model = "GNN_FILM";
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  std::string film_aggregation = "before";
  std::string film_post = "layer_norm";
  std::size_t num_chunks = 1;
  std::string chunk_tying = "per_chunk";
  std::string normalization = "per_type";
  bool input_projection = true;
  bool add_inverse_edges = false;

  // Budget.
  std::size_t patience = 25;
  std::size_t max_epochs = 100;
  std::size_t batch_nodes = 10000;
  std::optional<double> clip_norm;

  /// Strict parse: unknown keys and wrong types throw ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::ordered_json to_json() const;
  /// Applies `overrides` (same keys) on top of this config.
  ExperimentConfig with(const nlohmann::json& overrides) const;

  /// Type and consistency checks; with !allow_custom, searchable knobs must
  /// also lie in their published domains.
  void validate(bool allow_custom) const;

  StackConfig stack_config() const;
  TrainConfig train_config(std::uint64_t seed) const;
};

/// Domain of one searchable knob, for validation and --help.
struct KnobDomain {
  std::string name;
  std::string description;
  std::string domain;
};
const std::vector<KnobDomain>& knob_domains();

/// All keys ExperimentConfig accepts.
const std::vector<std::string>& experiment_keys();

struct Splits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

/// Loads train.json, valid.json and test.json from `dir`.
Splits load_splits(const std::filesystem::path& dir, bool add_inverse_edges = false);

/// Builds the network for `config` over the schema of `schema`.
std::unique_ptr<Network> build_network(const ExperimentConfig& config, const Dataset& schema, std::uint64_t seed);

/// Self-contained checkpoint: config, data schema, seed and parameters.
nlohmann::ordered_json make_checkpoint(const ExperimentConfig& config, const Dataset& schema, std::uint64_t seed,
                                       const Network& net);

struct LoadedCheckpoint {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::unique_ptr<Network> network;
  std::vector<std::string> edge_types;
  TaskKind task = TaskKind::NodeClassification;
};
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Files of a run directory.
inline constexpr const char* kRunConfigFile = "config.json";
inline constexpr const char* kRunCheckpointFile = "checkpoint.json";
inline constexpr const char* kRunMetricsFile = "metrics.csv";
inline constexpr const char* kRunLogFile = "log.jsonl";
inline constexpr const char* kRunRecordFile = "record.json";

struct RunOutcome {
  RunRecord record;
  std::filesystem::path run_dir;
};

/// Trains `config` on `splits` and writes the run directory (config snapshot,
/// checkpoint of the best parameters, per-epoch CSV, JSON-lines log and the
/// run record). An empty `run_dir` skips writing.
RunOutcome run_experiment(const ExperimentConfig& config, const Splits& splits, std::uint64_t seed,
                          const std::filesystem::path& run_dir);

}  // namespace relgnn
