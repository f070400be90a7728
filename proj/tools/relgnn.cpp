// relgnn: train, evaluate and inspect relational GNNs from the command line.
//
// Exit codes: 0 success, 1 invalid input or failed check, 2 runtime failure
// (including divergence during training).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relgnn/dataset.hpp"
#include "relgnn/diagnostics.hpp"
#include "relgnn/experiment.hpp"
#include "relgnn/search.hpp"
#include "relgnn/tasks.hpp"
#include "relgnn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relgnn;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string fixed4(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << v;
  return out.str();
}

// Flag values arrive as text; the default config fixes each key's JSON type.
json typed_override(const std::string& key, const std::string& text) {
  static const json defaults = [] {
    json d = json::parse(ExperimentConfig{}.to_json().dump());
    d["seed"] = 0u;
    d["clip_norm"] = 1.0;
    return d;
  }();
  const json& proto = defaults.at(key);
  try {
    if (proto.is_boolean()) {
      if (text == "true" || text == "True" || text == "1") return true;
      if (text == "false" || text == "False" || text == "0") return false;
      throw ConfigError("--" + key + " expects true or false, got '" + text + "'");
    }
    if (proto.is_number_integer()) {
      std::size_t used = 0;
      const long long v = std::stoll(text, &used);
      if (used != text.size() || v < 0) throw ConfigError("--" + key + " expects a non-negative integer");
      return static_cast<std::uint64_t>(v);
    }
    if (proto.is_number()) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size()) throw ConfigError("--" + key + " expects a number");
      return v;
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("--" + key + ": cannot parse '" + text + "'");
  }
  return text;
}

// Seed precedence: explicit flag, config file, RELGNN_SEED, then 0.
std::uint64_t resolve_seed(const ExperimentConfig& cfg) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("RELGNN_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::logic_error&) {
    }
    throw ConfigError("RELGNN_SEED must be a non-negative integer, got '" + std::string(env) + "'");
  }
  return 0;
}

struct KnobFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    std::map<std::string, const KnobDomain*> domains;
    for (const auto& d : knob_domains()) domains[d.name] = &d;
    for (const auto& key : experiment_keys()) {
      std::string help = "override config key '" + key + "'";
      if (auto it = domains.find(key); it != domains.end()) {
        help = it->second->description + "; domain " + it->second->domain;
      }
      cmd->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { values[key] = v; }, help);
    }
  }

  json overrides() const {
    json out = json::object();
    for (const auto& [key, text] : values) out[key] = typed_override(key, text);
    return out;
  }
};

void print_record_summary(const RunRecord& r, const fs::path& dir) {
  std::cerr << "best epoch " << r.best_epoch << " of " << r.history.size() << ", valid " << r.metric << " "
            << fixed4(r.best_valid) << ", test " << r.metric << " " << fixed4(r.test_metric) << " ("
            << std::setprecision(3) << r.wall_seconds << " s)";
  if (!dir.empty()) std::cerr << " -> " << dir.string();
  std::cerr << "\n";
}

int cmd_train(const std::string& config_path, const KnobFlags& flags, bool allow_custom, const std::string& out) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ExperimentConfig::from_json(read_json_file(config_path));
  cfg = cfg.with(flags.overrides());
  cfg.validate(allow_custom);
  if (cfg.data_dir.empty()) throw ConfigError("no data directory: set 'data_dir' in the config or pass --data_dir");
  const std::uint64_t seed = resolve_seed(cfg);
  cfg.seed = seed;
  const Splits splits = load_splits(cfg.data_dir, cfg.add_inverse_edges);
  const fs::path run_dir = out.empty() ? fs::path("runs") / (cfg.model + "_seed" + std::to_string(seed)) : fs::path(out);
  const RunOutcome outcome = run_experiment(cfg, splits, seed, run_dir);
  print_record_summary(outcome.record, run_dir);
  std::cout << run_dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& dataset, bool as_json) {
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  LoadOptions opts;
  opts.add_inverse_edges = ck.config.add_inverse_edges;
  const Dataset data = load_dataset(dataset, opts);
  if (data.task != ck.task || data.edge_types != ck.edge_types) {
    throw ConfigError("dataset " + dataset + " does not match the checkpoint's task or edge types");
  }
  const double metric = evaluate(*ck.network, data, ck.config.batch_nodes);
  const std::string name = ck.network->task_spec().metric;
  if (as_json) {
    std::cout << json{{"metric", name}, {"value", metric}}.dump() << "\n";
  } else {
    std::cout << name << ": " << fixed4(metric) << "\n";
  }
  return 0;
}

int cmd_gradcheck(const std::string& kind_name, std::uint64_t seed) {
  std::vector<CellKind> kinds;
  if (kind_name == "all") {
    kinds = all_cell_kinds();
  } else {
    kinds.push_back(cell_kind_from_name(kind_name));
  }
  constexpr double kTolerance = 1e-4;
  bool all_pass = true;
  for (CellKind kind : kinds) {
    for (const auto& variant : gradient_variants(kind)) {
      const GradCheckReport report = cell_gradient_check(variant, seed);
      for (const auto& e : report.entries) {
        const bool pass = e.max_error < kTolerance;
        all_pass = all_pass && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << variant.label << " " << e.name << " max_rel_err="
                  << std::scientific << std::setprecision(2) << e.max_error << std::defaultfloat << "\n";
      }
    }
  }
  return all_pass ? 0 : kExitInvalid;
}

struct GenOptions {
  std::uint64_t seed = 0;
  std::size_t num_graphs = 0;
  std::size_t nodes = 0;
};

int cmd_gen_data(const std::string& task, const std::string& out, const GenOptions& o) {
  if (task == "wl_pair") {
    save_dataset(gen_wl_pair(), out);
    std::cerr << "wrote 2 graphs to " << out << "\n";
    return 0;
  }
  const Rng root(o.seed);
  auto split_seed = [&](const char* split) { return root.split(split).next_u64(); };
  const fs::path dir(out);
  std::size_t next_graph = 0;
  const std::pair<const char*, double> splits[] = {{"train", 1.0}, {"valid", 0.25}, {"test", 0.25}};
  for (const auto& [split, fraction] : splits) {
    Dataset d;
    if (task == "neighbour_count") {
      const std::size_t graphs = o.num_graphs ? o.num_graphs : 200;
      d = gen_neighbour_count(split_seed(split), std::max<std::size_t>(1, static_cast<std::size_t>(graphs * fraction)),
                              o.nodes ? o.nodes : 12);
    } else if (task == "ppi_like") {
      PpiLikeOptions p;
      if (o.nodes) p.nodes_per_graph = o.nodes;
      const std::size_t train_graphs = o.num_graphs ? o.num_graphs : 20;
      p.num_graphs = std::max<std::size_t>(1, static_cast<std::size_t>(train_graphs * fraction));
      p.first_graph = next_graph;
      next_graph += p.num_graphs;
      d = gen_ppi_like(o.seed, p);
    } else {
      throw ConfigError("unknown task '" + task + "' (expected wl_pair, neighbour_count or ppi_like)");
    }
    save_dataset(d, dir / (std::string(split) + ".json"));
  }
  std::cerr << "wrote train/valid/test to " << dir.string() << "\n";
  return 0;
}

int cmd_hypersearch(const std::string& space_file, const std::string& preset, const std::string& config_path,
                    const KnobFlags& flags, const std::string& out, std::size_t jobs, std::size_t runs,
                    bool allow_custom) {
  if (space_file.empty() == preset.empty()) throw ConfigError("give exactly one of SPACE_FILE or --preset");
  const SearchSpace space = preset.empty() ? SearchSpace::from_json(read_json_file(space_file))
                                           : SearchSpace::preset(preset);
  ExperimentConfig base;
  if (!config_path.empty()) base = ExperimentConfig::from_json(read_json_file(config_path));
  base = base.with(flags.overrides());
  if (base.data_dir.empty()) throw ConfigError("no data directory: set 'data_dir' in the config or pass --data_dir");
  const Splits splits = load_splits(base.data_dir, base.add_inverse_edges);

  SearchOptions opts;
  opts.jobs = jobs;
  opts.runs_per_config = runs;
  opts.allow_custom = allow_custom;
  opts.base_seed = resolve_seed(base);
  const std::size_t total = space.configurations().size() * runs;
  std::size_t done = 0;
  opts.on_trial = [&](const TrialResult& t) {
    ++done;
    std::cerr << "[" << done << "/" << total << "] config " << t.config_index << " run " << t.run << ": "
              << (t.ok ? "valid " + fixed4(t.valid_metric) : "FAILED " + t.error) << "\n";
  };
  const SearchResult result = hyper_search(space, base, splits, opts);
  const fs::path dir = out.empty() ? fs::path("search") : fs::path(out);
  write_search_result(result, dir);
  std::cout << "rank  mean_valid  mean_test  runs  overrides\n";
  for (const auto& r : result.ranking) {
    std::cout << std::setw(4) << r.rank << "  " << std::setw(10) << (r.ok_runs ? fixed4(r.mean_valid) : "failed")
              << "  " << std::setw(9) << (r.ok_runs ? fixed4(r.mean_test) : "-") << "  " << std::setw(4) << r.ok_runs
              << "  " << r.overrides.dump() << "\n";
  }
  return 0;
}

int cmd_summarize(const std::vector<std::string>& run_dirs) {
  struct Group {
    std::string metric;
    std::vector<double> test;
  };
  std::map<std::string, Group> groups;
  for (const auto& d : run_dirs) {
    const RunRecord r = RunRecord::from_json(read_json_file(fs::path(d) / kRunRecordFile));
    const ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(fs::path(d) / kRunConfigFile));
    Group& g = groups[cfg.model];
    g.metric = r.metric;
    g.test.push_back(r.test_metric);
  }
  std::cout << "model       metric      test (mean ± std)   runs\n";
  for (const auto& [model, g] : groups) {
    std::cout << std::left << std::setw(12) << model << std::setw(12) << g.metric << std::right
              << fixed4(ordered_mean(g.test)) << " ± " << fixed4(ordered_stddev(g.test)) << "   " << std::setw(4)
              << g.test.size() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational graph neural networks: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool allow_custom = false;
  KnobFlags train_flags;
  auto* train = app.add_subcommand("train", "train one configuration and write a run directory");
  train->add_option("--config", config_path, "experiment config (JSON)");
  train->add_option("--out", out_dir, "run directory (default runs/<model>_seed<seed>)");
  train->add_flag("--allow-custom", allow_custom, "accept knob values outside their search domains");
  train_flags.attach(train);
  train->footer("Seed: --seed, else the config's seed, else $RELGNN_SEED, else 0.");

  std::string checkpoint, dataset;
  bool eval_json = false;
  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
  eval->add_option("checkpoint", checkpoint, "checkpoint file from a run directory")->required();
  eval->add_option("dataset", dataset, "dataset file (JSON)")->required();
  eval->add_flag("--json", eval_json, "print {\"metric\", \"value\"} at full precision");

  std::string grad_kind;
  std::uint64_t grad_seed = 0;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of a cell's gradients");
  grad->add_option("model_kind", grad_kind, "GGNN, RGCN, RGAT, RGIN, GNN_MLP0, GNN_MLP1, RGDCN, GNN_FILM or all")
      ->required();
  grad->add_option("--seed", grad_seed, "graph and parameter seed");

  std::string gen_task, gen_out;
  GenOptions gen_opts;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("task", gen_task, "wl_pair (one file), neighbour_count or ppi_like (train/valid/test directory)")
      ->required();
  gen->add_option("out", gen_out, "output file or directory")->required();
  gen->add_option("--seed", gen_opts.seed, "generator seed");
  gen->add_option("--num-graphs", gen_opts.num_graphs, "training graphs (valid and test get a quarter each)");
  gen->add_option("--nodes", gen_opts.nodes, "nodes per graph");

  std::string space_file, preset, search_config, search_out;
  std::size_t jobs = 1, runs = 1;
  bool search_custom = false;
  KnobFlags search_flags;
  auto* search = app.add_subcommand("hypersearch", "grid or random search over experiment knobs");
  search->add_option("space", space_file, "search space (JSON)");
  search->add_option("--preset", preset, "built-in space: ppi, qm9 or varmisuse");
  search->add_option("--config", search_config, "base experiment config (JSON)");
  search->add_option("--out", search_out, "directory for trials.json and trials.csv (default search/)");
  search->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  search->add_option("--runs", runs, "runs per configuration")->check(CLI::PositiveNumber);
  search->add_flag("--allow-custom", search_custom, "accept knob values outside their search domains");
  search_flags.attach(search);

  std::vector<std::string> run_dirs;
  auto* summarize = app.add_subcommand("summarize", "mean ± std of test metrics over run directories");
  summarize->add_option("run_dirs", run_dirs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*train) return cmd_train(config_path, train_flags, allow_custom, out_dir);
    if (*eval) return cmd_evaluate(checkpoint, dataset, eval_json);
    if (*grad) return cmd_gradcheck(grad_kind, grad_seed);
    if (*gen) return cmd_gen_data(gen_task, gen_out, gen_opts);
    if (*search) {
      return cmd_hypersearch(space_file, preset, search_config, search_flags, search_out, jobs, runs, search_custom);
    }
    if (*summarize) return cmd_summarize(run_dirs);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}
