#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relgnn/parameters.hpp"

namespace relgnn {

/// A registered parameter reached an optimiser step without a gradient,
/// i.e. it is not connected to the loss.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { Adam, RMSProp };

/// Accepts "Adam" / "RMSProp" (case-insensitive).
OptimizerKind optimizer_kind_from_name(std::string_view name);
std::string optimizer_kind_name(OptimizerKind kind);

// Defaults follow the TensorFlow 1.x optimiser constructors.
struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct RmsPropHyper {
  double decay = 0.9;
  double momentum = 0.0;
  double epsilon = 1e-10;
};

struct AdamState {
  std::vector<std::vector<real>> first_moment;
  std::vector<std::vector<real>> second_moment;
  std::uint64_t steps = 0;
};

struct RmsPropState {
  std::vector<std::vector<real>> mean_square;  // starts at 1, as in TF
  std::vector<std::vector<real>> momentum;
};

/// theta -= lr * sqrt(1 - b2^t) / (1 - b1^t) * m / (sqrt(v) + eps).
/// Throws CoverageError if any parameter lacks a gradient.
void adam_step(ParameterStore& params, AdamState& state, double lr, const AdamHyper& hyper = {});
/// ms += (1 - decay) (g^2 - ms); mom = momentum mom + lr g / sqrt(ms + eps);
/// theta -= mom. Throws CoverageError if any parameter lacks a gradient.
void rmsprop_step(ParameterStore& params, RmsPropState& state, double lr, const RmsPropHyper& hyper = {});

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);
  void step(ParameterStore& params);
  OptimizerKind kind() const { return kind_; }
  double lr() const { return lr_; }

 private:
  OptimizerKind kind_;
  double lr_;
  AdamState adam_;
  RmsPropState rmsprop_;
};

/// sqrt of the sum of squared gradient entries over all parameters.
double global_grad_norm(const ParameterStore& params);
/// Rescales all gradients so the global norm is at most `max_norm`;
/// returns the norm before clipping.
double clip_global_norm(ParameterStore& params, double max_norm);

}  // namespace relgnn
