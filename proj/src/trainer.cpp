#include "relgnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "relgnn/ops.hpp"

namespace relgnn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<TypedGraph> select_graphs(const Dataset& data, std::span<const std::size_t> ids) {
  std::vector<TypedGraph> out;
  out.reserve(ids.size());
  for (std::size_t i : ids) out.push_back(data.graphs[i]);
  return out;
}

// Pools predictions of one dataset pass into a single metric.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(TaskKind task) : task_(task) {}

  void add(const Tensor& outputs, const Tensor& targets) {
    auto y = targets.values();
    if (task_ == TaskKind::NodeClassification) {
      const auto preds = threshold_predictions(outputs);
      predictions_.insert(predictions_.end(), preds.begin(), preds.end());
      for (real v : y) labels_.push_back(v >= real(0.5) ? 1 : 0);
    } else {
      auto p = outputs.values();
      values_.insert(values_.end(), p.begin(), p.end());
      targets_.insert(targets_.end(), y.begin(), y.end());
    }
  }

  double result() const {
    return task_ == TaskKind::NodeClassification ? micro_f1(predictions_, labels_) : mae(values_, targets_);
  }

 private:
  TaskKind task_;
  std::vector<int> predictions_;
  std::vector<int> labels_;
  std::vector<double> values_;
  std::vector<double> targets_;
};

std::string parameter_norms(const ParameterStore& params) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, t] : params) {
    double sq = 0;
    for (real v : t.values()) sq += static_cast<double>(v) * v;
    out << (first ? "" : ", ") << name << "=" << std::sqrt(sq);
    first = false;
  }
  return out.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be a positive number");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be >= 1");
  if (batch_nodes == 0) throw std::invalid_argument("batch_nodes must be >= 1");
  if (clip_norm && !(*clip_norm > 0)) throw std::invalid_argument("clip_norm must be positive");
}

nlohmann::ordered_json RunRecord::to_json() const {
  nlohmann::ordered_json doc;
  doc["metric"] = metric;
  doc["higher_is_better"] = higher_is_better;
  doc["seed"] = seed;
  doc["best_epoch"] = best_epoch;
  doc["best_valid"] = best_valid;
  doc["test_metric"] = test_metric;
  doc["stopped_early"] = stopped_early;
  doc["wall_seconds"] = wall_seconds;
  auto& hist = doc["history"] = nlohmann::ordered_json::array();
  for (const auto& e : history) {
    hist.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"train_metric", e.train_metric},
                    {"valid_metric", e.valid_metric},
                    {"seconds", e.seconds}});
  }
  return doc;
}

RunRecord RunRecord::from_json(const nlohmann::json& doc) {
  RunRecord r;
  r.metric = doc.at("metric").get<std::string>();
  r.higher_is_better = doc.at("higher_is_better").get<bool>();
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.best_epoch = doc.at("best_epoch").get<std::size_t>();
  r.best_valid = doc.at("best_valid").get<double>();
  r.test_metric = doc.at("test_metric").get<double>();
  r.stopped_early = doc.at("stopped_early").get<bool>();
  r.wall_seconds = doc.at("wall_seconds").get<double>();
  for (const auto& e : doc.at("history")) {
    r.history.push_back({e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(),
                         e.at("train_metric").get<double>(), e.at("valid_metric").get<double>(),
                         e.at("seconds").get<double>()});
  }
  return r;
}

EarlyStopping::EarlyStopping(std::size_t patience, bool higher_is_better)
    : patience_(patience), higher_is_better_(higher_is_better) {
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::update(double metric) {
  ++epochs_;
  const bool improved =
      best_epoch_ == 0 || (higher_is_better_ ? metric > best_ : metric < best_);
  if (improved) {
    best_ = metric;
    best_epoch_ = epochs_;
  }
  return improved;
}

FitOutcome fit_with_early_stopping(std::size_t max_epochs, std::size_t patience, bool higher_is_better,
                                   const std::function<double(std::size_t)>& run_epoch,
                                   const std::function<void(std::size_t)>& on_best) {
  EarlyStopping stopper(patience, higher_is_better);
  FitOutcome out;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const double metric = run_epoch(epoch);
    out.valid_history.push_back(metric);
    if (stopper.update(metric) && on_best) on_best(epoch);
    if (stopper.should_stop()) {
      out.stopped_early = epoch < max_epochs;
      break;
    }
  }
  out.epochs_run = stopper.epochs();
  out.best_epoch = stopper.best_epoch();
  out.best_valid = stopper.best();
  return out;
}

Network::Network(const StackConfig& stack, const std::vector<std::string>& edge_types, std::size_t feature_dim,
                 TaskKind task, std::size_t label_dim, std::uint64_t seed)
    : model_(stack, edge_types, feature_dim, Rng(seed).split("init").split("model")),
      head_(task, stack.cell.hidden_dim, label_dim, Rng(seed).split("init").split("head")) {
  params_.merge(model_.parameters());
  params_.merge(head_.parameters());
}

BatchedGraph Network::prepare(std::span<const TypedGraph> graphs) const {
  BatchedGraph batch = batch_disjoint_union(graphs);
  batch.graph = model_.prepare(batch.graph);
  return batch;
}

Tensor Network::forward(const BatchedGraph& prepared, bool training, Rng* dropout_rng) const {
  Tensor h = model_.forward(features_tensor(prepared.graph.features), prepared.graph, training, dropout_rng);
  return head_.forward(h, prepared);
}

Tensor batch_targets(std::span<const TypedGraph> graphs, TaskKind task) {
  std::vector<real> values;
  std::size_t rows = 0, cols = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const TypedGraph& g = graphs[i];
    if (task == TaskKind::GraphRegression) {
      if (!g.targets) throw std::invalid_argument("graph " + std::to_string(i) + " has no regression targets");
      if (rows > 0 && g.targets->size() != cols) throw DimensionError("graphs disagree on target width");
      cols = g.targets->size();
      values.insert(values.end(), g.targets->begin(), g.targets->end());
      ++rows;
    } else {
      if (!g.node_labels) throw std::invalid_argument("graph " + std::to_string(i) + " has no node labels");
      if (rows > 0 && g.node_labels->cols != cols) throw DimensionError("graphs disagree on label width");
      cols = g.node_labels->cols;
      values.insert(values.end(), g.node_labels->data.begin(), g.node_labels->data.end());
      rows += g.num_nodes;
    }
  }
  return Tensor::from({rows, cols}, std::move(values));
}

std::vector<std::vector<std::size_t>> make_batches(const Dataset& data, std::span<const std::size_t> order,
                                                   std::size_t batch_nodes) {
  if (batch_nodes == 0) throw std::invalid_argument("batch_nodes must be >= 1");
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> current;
  std::size_t nodes = 0;
  for (std::size_t i : order) {
    const std::size_t n = data.graphs.at(i).num_nodes;
    if (!current.empty() && nodes + n > batch_nodes) {
      batches.push_back(std::move(current));
      current.clear();
      nodes = 0;
    }
    current.push_back(i);
    nodes += n;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

double evaluate(const Network& net, const Dataset& data, std::size_t batch_nodes) {
  NoGradGuard no_grad;
  std::vector<std::size_t> order(data.graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  MetricAccumulator acc(net.task());
  for (const auto& ids : make_batches(data, order, batch_nodes)) {
    const auto graphs = select_graphs(data, ids);
    const BatchedGraph batch = net.prepare(graphs);
    acc.add(net.forward(batch, false), batch_targets(graphs, net.task()));
  }
  return acc.result();
}

void check_same_schema(const Dataset& a, const Dataset& b) {
  if (a.task != b.task) {
    throw std::invalid_argument("dataset splits disagree on task: " + task_kind_name(a.task) + " vs " +
                                task_kind_name(b.task));
  }
  if (a.edge_types != b.edge_types) throw std::invalid_argument("dataset splits disagree on edge types");
  if (a.feature_dim != b.feature_dim || a.label_dim != b.label_dim) {
    throw std::invalid_argument("dataset splits disagree on feature or label width");
  }
}

RunRecord train(Network& net, const Dataset& train_set, const Dataset& valid_set, const Dataset& test_set,
                const TrainConfig& config) {
  config.validate();
  check_same_schema(train_set, valid_set);
  check_same_schema(train_set, test_set);
  if (train_set.task != net.task()) throw std::invalid_argument("network head does not match the dataset task");

  const auto start = Clock::now();
  const TaskSpec spec = net.task_spec();
  const Rng root(config.seed);
  ParameterStore& params = net.parameters();
  Optimizer optimizer(config.optimizer, config.lr);

  RunRecord record;
  record.metric = spec.metric;
  record.higher_is_better = spec.higher_is_better();
  record.seed = config.seed;

  std::vector<std::vector<real>> best_params = params.snapshot();
  auto run_epoch = [&](std::size_t epoch) {
    const auto epoch_start = Clock::now();
    std::vector<std::size_t> order(train_set.graphs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = root.split("shuffle").split(epoch);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    Rng dropout_rng = root.split("dropout").split(epoch);

    MetricAccumulator acc(net.task());
    double loss_total = 0;
    std::size_t batch_index = 0;
    const auto batches = make_batches(train_set, order, config.batch_nodes);
    for (const auto& ids : batches) {
      const auto graphs = select_graphs(train_set, ids);
      const BatchedGraph batch = net.prepare(graphs);
      const Tensor targets = batch_targets(graphs, net.task());
      params.zero_grad();
      const Tensor outputs = net.forward(batch, true, &dropout_rng);
      const Tensor loss = net.loss(outputs, targets);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainingDiverged("non-finite loss (" + std::to_string(value) + ") at epoch " + std::to_string(epoch) +
                               ", batch " + std::to_string(batch_index) + "; parameter norms: " +
                               parameter_norms(params));
      }
      backward(loss);
      if (config.clip_norm) clip_global_norm(params, *config.clip_norm);
      optimizer.step(params);
      loss_total += value;
      acc.add(outputs, targets);
      ++batch_index;
    }

    EpochRecord e;
    e.epoch = epoch;
    e.train_loss = batches.empty() ? 0.0 : loss_total / static_cast<double>(batches.size());
    e.train_metric = acc.result();
    e.valid_metric = evaluate(net, valid_set, config.batch_nodes);
    e.seconds = seconds_since(epoch_start);
    record.history.push_back(e);
    if (config.on_epoch) config.on_epoch(e);
    return e.valid_metric;
  };

  const FitOutcome fit = fit_with_early_stopping(config.max_epochs, config.patience, record.higher_is_better,
                                                 run_epoch, [&](std::size_t) { best_params = params.snapshot(); });
  params.restore(best_params);
  params.zero_grad();
  record.best_epoch = fit.best_epoch;
  record.best_valid = fit.best_valid;
  record.stopped_early = fit.stopped_early;
  record.test_metric = evaluate(net, test_set, config.batch_nodes);
  record.wall_seconds = seconds_since(start);
  return record;
}

}  // namespace relgnn
