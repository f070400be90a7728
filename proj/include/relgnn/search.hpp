#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "relgnn/experiment.hpp"

namespace relgnn {

enum class SearchMode { Grid, Random };

/// One searched key: a list of choices, or (random mode only) a continuous
/// range sampled uniformly.
struct SearchDimension {
  std::string name;
  std::vector<nlohmann::json> values;
  std::optional<std::pair<double, double>> range;
};

struct SearchSpace {
  SearchMode mode = SearchMode::Grid;
  std::vector<SearchDimension> dimensions;
  std::size_t budget = 0;  // number of sampled configurations in random mode
  std::uint64_t seed = 0;  // sampling seed in random mode

  /// Throws ConfigError for an empty space, unknown keys, a random space
  /// without budget or a range in grid mode.
  void validate() const;
  std::size_t grid_size() const;
  /// Override objects, one per configuration: the full product in grid mode
  /// (last dimension fastest), `budget` seeded samples in random mode.
  std::vector<nlohmann::json> configurations() const;

  /// {"mode": "grid"|"random", "budget": n, "seed": s,
  ///  "parameters": {"<key>": [choices...] | {"min": a, "max": b}}}
  static SearchSpace from_json(const nlohmann::json& doc);
  /// "ppi", "qm9" or "varmisuse".
  static SearchSpace preset(std::string_view name);
};

struct TrialResult {
  std::size_t config_index = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  nlohmann::json overrides;
  bool ok = false;
  std::string error;
  double valid_metric = 0;
  double test_metric = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
  double seconds = 0;
};

struct RankedConfig {
  std::size_t rank = 0;  // 1-based; failed configurations rank last
  std::size_t config_index = 0;
  nlohmann::json overrides;
  std::size_t ok_runs = 0;
  std::size_t failed_runs = 0;
  double mean_valid = 0;
  double mean_test = 0;
};

struct SearchResult {
  std::string metric;
  bool higher_is_better = true;
  std::vector<TrialResult> trials;    // ordered by (config, run)
  std::vector<RankedConfig> ranking;  // best first

  nlohmann::ordered_json to_json() const;
  std::string trials_csv() const;
};

struct SearchOptions {
  std::size_t runs_per_config = 1;
  std::size_t jobs = 1;
  bool allow_custom = false;
  /// Run r of every configuration uses seed base_seed + r.
  std::uint64_t base_seed = 0;
  /// Called (under a lock) as trials finish; may be empty.
  std::function<void(const TrialResult&)> on_trial;
};

/// Trains every configuration `runs_per_config` times on `splits` across
/// `jobs` threads. A failing trial is recorded and the search continues.
SearchResult hyper_search(const SearchSpace& space, const ExperimentConfig& base, const Splits& splits,
                          const SearchOptions& options);

/// Writes trials.json (ranking and trials) and trials.csv into `dir`.
void write_search_result(const SearchResult& result, const std::filesystem::path& dir);

/// Mean of `values` summed in sorted order, so the result does not depend on
/// the order trials finished.
double ordered_mean(std::vector<double> values);
/// Sample standard deviation (0 for fewer than two values), sorted reduction.
double ordered_stddev(std::vector<double> values);

}  // namespace relgnn
