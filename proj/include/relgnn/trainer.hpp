#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relgnn/dataset.hpp"
#include "relgnn/model.hpp"
#include "relgnn/optimizer.hpp"
#include "relgnn/tasks.hpp"

namespace relgnn {

/// Loss became NaN or infinite during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kUnlimitedPatience = std::numeric_limits<std::size_t>::max();

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double train_metric = 0;
  double valid_metric = 0;
  double seconds = 0;
};

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lr = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t patience = 25;
  /// Whole graphs are packed into a batch until this many nodes.
  std::size_t batch_nodes = 10000;
  std::uint64_t seed = 0;
  std::optional<double> clip_norm;
  /// Called after every epoch; may be empty.
  std::function<void(const EpochRecord&)> on_epoch;

  void validate() const;
};

struct RunRecord {
  std::string metric;
  bool higher_is_better = true;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_valid = 0;
  double test_metric = 0;
  double wall_seconds = 0;
  std::uint64_t seed = 0;
  bool stopped_early = false;

  nlohmann::ordered_json to_json() const;
  static RunRecord from_json(const nlohmann::json& doc);
};

/// Tracks the best validation value under the strict-improvement rule.
class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, bool higher_is_better);
  /// Records the metric of the next epoch; returns true if it is a new best.
  bool update(double metric);
  bool should_stop() const { return epochs_ > 0 && epochs_ - best_epoch_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  std::size_t epochs() const { return epochs_; }

 private:
  std::size_t patience_;
  bool higher_is_better_;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0;
};

struct FitOutcome {
  std::vector<double> valid_history;
  std::size_t best_epoch = 0;
  double best_valid = 0;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
};

/// The epoch loop shared by train(): runs `run_epoch(epoch)` (1-based, returns
/// the validation metric) until `max_epochs` or `patience` epochs without a
/// strict improvement; `on_best(epoch)` fires on every new best.
FitOutcome fit_with_early_stopping(std::size_t max_epochs, std::size_t patience, bool higher_is_better,
                                   const std::function<double(std::size_t)>& run_epoch,
                                   const std::function<void(std::size_t)>& on_best = {});

/// GNN stack plus task readout, with a merged parameter view.
class Network {
 public:
  Network(const StackConfig& stack, const std::vector<std::string>& edge_types, std::size_t feature_dim,
          TaskKind task, std::size_t label_dim, std::uint64_t seed);
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  Model& model() { return model_; }
  const Model& model() const { return model_; }
  const Head& head() const { return head_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  TaskKind task() const { return head_.task(); }
  TaskSpec task_spec() const { return TaskSpec::for_task(head_.task(), head_.label_dim()); }

  /// Batches `graphs` and adds the edge types the stack needs.
  BatchedGraph prepare(std::span<const TypedGraph> graphs) const;
  Tensor forward(const BatchedGraph& prepared, bool training, Rng* dropout_rng = nullptr) const;
  Tensor loss(const Tensor& outputs, const Tensor& targets) const { return head_.loss(outputs, targets); }

 private:
  Model model_;
  Head head_;
  ParameterStore params_;
};

/// Targets of a batch in union order: node label rows, or one target row
/// per graph.
Tensor batch_targets(std::span<const TypedGraph> graphs, TaskKind task);

/// Greedy packing of graphs (in `order`) into batches of at most
/// `batch_nodes` nodes; a larger graph forms its own batch.
std::vector<std::vector<std::size_t>> make_batches(const Dataset& data, std::span<const std::size_t> order,
                                                   std::size_t batch_nodes);

/// Task metric over a whole dataset (micro-F1 or MAE), no dropout.
double evaluate(const Network& net, const Dataset& data, std::size_t batch_nodes = 10000);

/// Throws std::invalid_argument unless all splits share task, vocabulary and widths.
void check_same_schema(const Dataset& a, const Dataset& b);

/// Trains `net` in place, restores the best-validation parameters and
/// evaluates the test split. Streams: "dropout" and "shuffle" derive from
/// config.seed.
RunRecord train(Network& net, const Dataset& train_set, const Dataset& valid_set, const Dataset& test_set,
                const TrainConfig& config);

}  // namespace relgnn
