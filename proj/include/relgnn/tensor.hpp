#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relgnn {

#ifdef RELGNN_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes do not fit an operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an index (segment id, node id, gather index) is out of range.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

struct TensorImpl;
using BackwardFn = std::function<void(TensorImpl& self)>;

/// Storage node of the autodiff graph. Backward rules read `grad` of the node
/// and accumulate into the `grad` of its parents; they never capture the node
/// itself, so ownership only flows from outputs to inputs.
struct TensorImpl {
  Shape shape;
  std::vector<real> values;
  std::vector<real> grad;
  // Set on first accumulation; a zero-size tensor can hold a gradient too.
  bool grad_allocated = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  BackwardFn backward_fn;
  const char* op_name = "leaf";

  void ensure_grad() {
    if (!grad_allocated) grad.assign(values.size(), real(0));
    grad_allocated = true;
  }
};

/// Dense row-major tensor handle. Copies share storage; use `clone()` for a
/// detached deep copy.
class Tensor {
 public:
  Tensor();
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, real value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<real> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<real>> rows,
                       bool requires_grad = false);
  static Tensor vector(std::initializer_list<real> values, bool requires_grad = false);
  static Tensor scalar(real value, bool requires_grad = false);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->values.size(); }
  /// Rows of a matrix; length of a vector.
  std::size_t rows() const;
  /// Columns of a matrix; 1 for a vector.
  std::size_t cols() const;

  std::span<real> values() { return impl_->values; }
  std::span<const real> values() const { return impl_->values; }
  bool has_grad() const { return impl_->grad_allocated; }
  std::span<const real> grad() const { return impl_->grad; }
  std::span<real> mutable_grad() {
    impl_->ensure_grad();
    return impl_->grad;
  }
  void zero_grad() {
    impl_->grad.clear();
    impl_->grad_allocated = false;
  }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }

  real item() const;
  real at(std::size_t i) const { return impl_->values.at(i); }
  real at(std::size_t r, std::size_t c) const { return impl_->values.at(r * cols() + c); }

  /// Deep copy with no autodiff history.
  Tensor clone() const;
  /// Shares values with this tensor but drops history and grad tracking.
  Tensor detach() const;

  TensorImpl& impl() const { return *impl_; }
  const std::shared_ptr<TensorImpl>& impl_ptr() const { return impl_; }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// Creates an op output whose parents are `inputs`. History is only recorded
/// when grad mode is on and at least one input requires a gradient.
Tensor make_result(Shape shape, std::vector<real> values, std::vector<Tensor> inputs,
                   const char* op_name, BackwardFn backward);

/// Operations of a graph in the order they must be replayed for backward:
/// the loss first, then every op strictly after all of its consumers.
class ComputationTape {
 public:
  static ComputationTape record(const Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<TensorImpl*>& nodes() const { return nodes_; }
  void replay_backward() const;

 private:
  std::vector<TensorImpl*> nodes_;
};

/// Populates `.grad` of every tensor reachable from a scalar loss.
void backward(const Tensor& loss);

}  // namespace relgnn
