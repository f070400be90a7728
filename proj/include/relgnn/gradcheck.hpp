#pragma once

#include <functional>
#include <string>
#include <vector>

#include "relgnn/parameters.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

struct GradCheckEntry {
  std::string name;
  double max_error = 0;  // max |analytic - numeric| / max(1, |numeric|)
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_error = 0;
};

/// Compares backward() gradients of `loss_fn` against central differences
/// with step `epsilon` for every scalar in `params`. `loss_fn` must be
/// deterministic and return a scalar.
GradCheckReport gradient_check(const std::function<Tensor()>& loss_fn, const ParameterStore& params,
                               double epsilon = 1e-4);

/// Same check over an unnamed tensor list; returns the maximum relative error.
double finite_difference_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                               double epsilon = 1e-4);

}  // namespace relgnn
