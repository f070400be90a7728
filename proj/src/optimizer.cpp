#include "relgnn/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace relgnn {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void require_coverage(const ParameterStore& params) {
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) throw CoverageError("parameter '" + name + "' received no gradient");
  }
}

void init_slots(const ParameterStore& params, std::vector<std::vector<real>>& slots, real fill) {
  if (!slots.empty()) {
    if (slots.size() != params.size()) throw std::logic_error("optimiser state does not match the parameter set");
    return;
  }
  for (const auto& [name, t] : params) slots.emplace_back(t.numel(), fill);
}

}  // namespace

OptimizerKind optimizer_kind_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "adam") return OptimizerKind::Adam;
  if (n == "rmsprop") return OptimizerKind::RMSProp;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected Adam or RMSProp)");
}

std::string optimizer_kind_name(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "Adam" : "RMSProp"; }

void adam_step(ParameterStore& params, AdamState& state, double lr, const AdamHyper& hyper) {
  require_coverage(params);
  init_slots(params, state.first_moment, 0);
  init_slots(params, state.second_moment, 0);
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double lr_t = lr * std::sqrt(1.0 - std::pow(hyper.beta2, t)) / (1.0 - std::pow(hyper.beta1, t));
  std::size_t k = 0;
  for (auto& [name, param] : params) {
    auto values = param.values();
    auto grad = param.grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = static_cast<real>(hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g);
      v[i] = static_cast<real>(hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g);
      values[i] -= static_cast<real>(lr_t * m[i] / (std::sqrt(static_cast<double>(v[i])) + hyper.epsilon));
    }
    ++k;
  }
}

void rmsprop_step(ParameterStore& params, RmsPropState& state, double lr, const RmsPropHyper& hyper) {
  require_coverage(params);
  init_slots(params, state.mean_square, 1);
  init_slots(params, state.momentum, 0);
  std::size_t k = 0;
  for (auto& [name, param] : params) {
    auto values = param.values();
    auto grad = param.grad();
    auto& ms = state.mean_square[k];
    auto& mom = state.momentum[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      ms[i] = static_cast<real>(ms[i] + (1.0 - hyper.decay) * (g * g - ms[i]));
      mom[i] = static_cast<real>(hyper.momentum * mom[i] + lr * g / std::sqrt(ms[i] + hyper.epsilon));
      values[i] -= mom[i];
    }
    ++k;
  }
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("learning rate must be positive");
}

void Optimizer::step(ParameterStore& params) {
  if (kind_ == OptimizerKind::Adam) {
    adam_step(params, adam_, lr_);
  } else {
    rmsprop_step(params, rmsprop_, lr_);
  }
}

double global_grad_norm(const ParameterStore& params) {
  double total = 0;
  for (const auto& [name, t] : params) {
    if (!t.has_grad()) continue;
    for (real g : t.grad()) total += static_cast<double>(g) * g;
  }
  return std::sqrt(total);
}

double clip_global_norm(ParameterStore& params, double max_norm) {
  if (!(max_norm > 0)) throw std::invalid_argument("clip_norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [name, t] : params) {
      if (!t.has_grad()) continue;
      for (real& g : t.mutable_grad()) g = static_cast<real>(g * scale);
    }
  }
  return norm;
}

}  // namespace relgnn
