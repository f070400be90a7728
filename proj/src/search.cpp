#include "relgnn/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace relgnn {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

SearchDimension choices(std::string name, std::vector<json> values) {
  return {std::move(name), std::move(values), std::nullopt};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ordered_json to_ordered(const json& j) { return ordered_json::parse(j.dump()); }

}  // namespace

double ordered_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double total = 0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double ordered_stddev(std::vector<double> values) {
  if (values.size() < 2) return 0.0;
  const double m = ordered_mean(values);
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - m) * (v - m));
  std::sort(sq.begin(), sq.end());
  double total = 0;
  for (double v : sq) total += v;
  return std::sqrt(total / static_cast<double>(values.size() - 1));
}

void SearchSpace::validate() const {
  if (dimensions.empty()) throw ConfigError("search space has no parameters");
  const auto& keys = experiment_keys();
  for (const auto& d : dimensions) {
    if (std::find(keys.begin(), keys.end(), d.name) == keys.end()) {
      throw ConfigError("search space names unknown config key '" + d.name + "'");
    }
    if (d.range) {
      if (mode == SearchMode::Grid) throw ConfigError("'" + d.name + "': ranges are only allowed in random mode");
      if (!(d.range->first <= d.range->second)) throw ConfigError("'" + d.name + "': empty range");
    } else if (d.values.empty()) {
      throw ConfigError("'" + d.name + "' has no values");
    }
  }
  if (mode == SearchMode::Random && budget == 0) throw ConfigError("random search needs a positive budget");
}

std::size_t SearchSpace::grid_size() const {
  std::size_t n = 1;
  for (const auto& d : dimensions) n *= d.range ? 1 : d.values.size();
  return n;
}

std::vector<json> SearchSpace::configurations() const {
  validate();
  std::vector<json> out;
  if (mode == SearchMode::Grid) {
    const std::size_t total = grid_size();
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      json cfg = json::object();
      std::size_t rest = i;
      for (std::size_t k = dimensions.size(); k-- > 0;) {
        const auto& d = dimensions[k];
        cfg[d.name] = d.values[rest % d.values.size()];
        rest /= d.values.size();
      }
      out.push_back(std::move(cfg));
    }
    return out;
  }
  const Rng root = Rng(seed).split("search");
  for (std::size_t i = 0; i < budget; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    json cfg = json::object();
    for (const auto& d : dimensions) {
      if (d.range) {
        cfg[d.name] = rng.uniform(d.range->first, d.range->second);
      } else {
        cfg[d.name] = d.values[rng.uniform_index(d.values.size())];
      }
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

namespace {

std::uint64_t non_negative_integer(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("'" + key + "' must be a non-negative integer");
}

}  // namespace

SearchSpace SearchSpace::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("search space must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "mode" && key != "budget" && key != "seed" && key != "parameters") {
      throw ConfigError("unknown search space key '" + key + "'");
    }
  }
  SearchSpace s;
  const std::string mode = doc.value("mode", "grid");
  if (mode == "grid") {
    s.mode = SearchMode::Grid;
  } else if (mode == "random") {
    s.mode = SearchMode::Random;
  } else {
    throw ConfigError("search mode must be 'grid' or 'random', got '" + mode + "'");
  }
  if (doc.contains("budget")) {
    s.budget = non_negative_integer(doc["budget"], "budget");
  }
  if (doc.contains("seed")) {
    s.seed = non_negative_integer(doc["seed"], "seed");
  }
  if (!doc.contains("parameters") || !doc["parameters"].is_object()) {
    throw ConfigError("search space needs a 'parameters' object");
  }
  for (const auto& [name, spec] : doc["parameters"].items()) {
    SearchDimension d{name, {}, std::nullopt};
    if (spec.is_array()) {
      d.values.assign(spec.begin(), spec.end());
    } else if (spec.is_object() && spec.size() == 2 && spec.contains("min") && spec.contains("max") &&
               spec["min"].is_number() && spec["max"].is_number()) {
      d.range = std::make_pair(spec["min"].get<double>(), spec["max"].get<double>());
    } else {
      throw ConfigError("'" + name + "' must be a list of choices or {\"min\": a, \"max\": b}");
    }
    s.dimensions.push_back(std::move(d));
  }
  s.validate();
  return s;
}

SearchSpace SearchSpace::preset(std::string_view name) {
  SearchSpace s;
  const std::vector<json> keep = {0.8, 0.9, 1.0};
  if (name == "ppi") {
    s.mode = SearchMode::Grid;
    s.dimensions = {choices("hidden_size", {192, 256, 320}), choices("graph_num_layers", {2, 3, 4, 5}),
                    choices("graph_layer_input_dropout_keep_prob", keep)};
  } else if (name == "qm9") {
    s.mode = SearchMode::Random;
    s.budget = 500;
    s.dimensions = {
        choices("hidden_size", {64, 96, 128}),
        choices("graph_num_layers", {4, 6, 8}),
        choices("graph_layer_input_dropout_keep_prob", keep),
        choices("layer_norm", {true, false}),
        choices("dense_layers", {1, 2, 32}),
        choices("res_connection", {1, 2, 32}),
        choices("graph_activation_function", {"relu", "leaky_relu", "elu", "gelu", "tanh"}),
        choices("optimizer", {"RMSProp", "Adam"}),
        SearchDimension{"lr", {}, std::make_pair(0.0005, 0.001)},
        choices("cell", {"RNN", "GRU", "LSTM"}),
        choices("num_heads", {4, 8, 16}),
    };
  } else if (name == "varmisuse") {
    s.mode = SearchMode::Grid;
    s.dimensions = {choices("hidden_size", {64, 96, 128}), choices("graph_num_layers", {6, 8, 10}),
                    choices("graph_layer_input_dropout_keep_prob", keep), choices("cell", {"GRU", "LSTM"}),
                    choices("num_heads", {4, 8})};
  } else {
    throw ConfigError("unknown search preset '" + std::string(name) + "' (expected ppi, qm9 or varmisuse)");
  }
  return s;
}

SearchResult hyper_search(const SearchSpace& space, const ExperimentConfig& base, const Splits& splits,
                          const SearchOptions& options) {
  if (options.runs_per_config == 0) throw ConfigError("runs_per_config must be >= 1");
  const auto configs = space.configurations();
  const std::size_t runs = options.runs_per_config;

  SearchResult result;
  const TaskSpec spec = TaskSpec::for_task(splits.train.task, splits.train.label_dim);
  result.metric = spec.metric;
  result.higher_is_better = spec.higher_is_better();
  result.trials.resize(configs.size() * runs);

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto worker = [&] {
    for (std::size_t task = next++; task < result.trials.size(); task = next++) {
      TrialResult& t = result.trials[task];
      t.config_index = task / runs;
      t.run = task % runs;
      t.seed = options.base_seed + t.run;
      t.overrides = configs[t.config_index];
      try {
        const ExperimentConfig cfg = base.with(t.overrides);
        cfg.validate(options.allow_custom);
        const RunRecord rec = run_experiment(cfg, splits, t.seed, {}).record;
        t.ok = true;
        t.valid_metric = rec.best_valid;
        t.test_metric = rec.test_metric;
        t.best_epoch = rec.best_epoch;
        t.epochs = rec.history.size();
        t.seconds = rec.wall_seconds;
      } catch (const std::exception& e) {
        t.ok = false;
        t.error = e.what();
      }
      if (options.on_trial) {
        std::lock_guard lock(report_mutex);
        options.on_trial(t);
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, result.trials.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t c = 0; c < configs.size(); ++c) {
    RankedConfig r;
    r.config_index = c;
    r.overrides = configs[c];
    std::vector<double> valid, test;
    for (std::size_t k = 0; k < runs; ++k) {
      const TrialResult& t = result.trials[c * runs + k];
      if (t.ok) {
        valid.push_back(t.valid_metric);
        test.push_back(t.test_metric);
      }
    }
    r.ok_runs = valid.size();
    r.failed_runs = runs - valid.size();
    r.mean_valid = ordered_mean(valid);
    r.mean_test = ordered_mean(test);
    result.ranking.push_back(std::move(r));
  }
  const bool higher = result.higher_is_better;
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [higher](const RankedConfig& a, const RankedConfig& b) {
    if ((a.ok_runs > 0) != (b.ok_runs > 0)) return a.ok_runs > 0;
    if (a.ok_runs == 0) return false;
    return higher ? a.mean_valid > b.mean_valid : a.mean_valid < b.mean_valid;
  });
  for (std::size_t i = 0; i < result.ranking.size(); ++i) result.ranking[i].rank = i + 1;
  return result;
}

ordered_json SearchResult::to_json() const {
  ordered_json doc;
  doc["metric"] = metric;
  doc["higher_is_better"] = higher_is_better;
  auto& ranked = doc["ranking"] = ordered_json::array();
  for (const auto& r : ranking) {
    ranked.push_back({{"rank", r.rank},
                      {"config_index", r.config_index},
                      {"overrides", to_ordered(r.overrides)},
                      {"ok_runs", r.ok_runs},
                      {"failed_runs", r.failed_runs},
                      {"mean_valid", r.mean_valid},
                      {"mean_test", r.mean_test}});
  }
  auto& all = doc["trials"] = ordered_json::array();
  for (const auto& t : trials) {
    ordered_json row = {{"config_index", t.config_index}, {"run", t.run},
                        {"seed", t.seed},                 {"overrides", to_ordered(t.overrides)},
                        {"ok", t.ok},                     {"valid_metric", t.valid_metric},
                        {"test_metric", t.test_metric},   {"best_epoch", t.best_epoch},
                        {"epochs", t.epochs},             {"seconds", t.seconds}};
    if (!t.ok) row["error"] = t.error;
    all.push_back(std::move(row));
  }
  return doc;
}

std::string SearchResult::trials_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "config_index,run,seed,ok,valid_metric,test_metric,best_epoch,epochs,seconds,overrides,error\n";
  for (const auto& t : trials) {
    out << t.config_index << ',' << t.run << ',' << t.seed << ',' << (t.ok ? 1 : 0) << ',' << t.valid_metric << ','
        << t.test_metric << ',' << t.best_epoch << ',' << t.epochs << ',' << t.seconds << ','
        << csv_field(t.overrides.dump()) << ',' << csv_field(t.error) << '\n';
  }
  return out.str();
}

void write_search_result(const SearchResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream json_out(dir / "trials.json");
  json_out << result.to_json().dump(2) << '\n';
  std::ofstream csv_out(dir / "trials.csv");
  csv_out << result.trials_csv();
  if (!json_out || !csv_out) throw std::runtime_error("failed writing search results to " + dir.string());
}

}  // namespace relgnn
