#include "relgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace relgnn {

GradCheckReport gradient_check(const std::function<Tensor()>& loss_fn, const ParameterStore& params,
                               double epsilon) {
  for (const auto& entry : params) {
    Tensor t = entry.second;
    t.zero_grad();
  }
  {
    Tensor loss = loss_fn();
    backward(loss);
  }

  GradCheckReport report;
  NoGradGuard no_grad;
  for (const auto& [name, param] : params) {
    Tensor t = param;
    std::vector<real> analytic(t.numel(), real(0));
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    GradCheckEntry entry{name, 0.0};
    auto values = t.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const real saved = values[i];
      values[i] = static_cast<real>(saved + epsilon);
      const double up = loss_fn().item();
      values[i] = static_cast<real>(saved - epsilon);
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      entry.max_error = std::max(entry.max_error, err);
    }
    report.max_error = std::max(report.max_error, entry.max_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

double finite_difference_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                               double epsilon) {
  ParameterStore store;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool tracked = params[i].requires_grad();
    store.add("p" + std::to_string(i), params[i]);
    if (!tracked) params[i].set_requires_grad(true);
  }
  return gradient_check(loss_fn, store, epsilon).max_error;
}

}  // namespace relgnn
