#include "relgnn/tensor.hpp"

#include <sstream>
#include <unordered_set>
#include <utility>

namespace relgnn {

namespace {
thread_local bool g_grad_enabled = true;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor() : impl_(std::make_shared<TensorImpl>()) { impl_->shape = {0}; }

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0, requires_grad); }

Tensor Tensor::full(Shape shape, real value, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->values.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<real> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("Tensor::from: shape " + shape_to_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<real>> rows, bool requires_grad) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<real> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::matrix: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return from({r, c}, std::move(values), requires_grad);
}

Tensor Tensor::vector(std::initializer_list<real> values, bool requires_grad) {
  return from({values.size()}, std::vector<real>(values), requires_grad);
}

Tensor Tensor::scalar(real value, bool requires_grad) { return from({}, {value}, requires_grad); }

std::size_t Tensor::rows() const {
  const auto& s = impl_->shape;
  return s.empty() ? 1 : s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = impl_->shape;
  std::size_t c = 1;
  for (std::size_t i = 1; i < s.size(); ++i) c *= s[i];
  return c;
}

real Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  }
  return impl_->values[0];
}

Tensor Tensor::clone() const { return from(shape(), impl_->values, false); }

Tensor Tensor::detach() const { return from(shape(), impl_->values, false); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_mode_enabled() { return g_grad_enabled; }

Tensor make_result(Shape shape, std::vector<real> values, std::vector<Tensor> inputs,
                   const char* op_name, BackwardFn backward_rule) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->op_name = op_name;
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& t : inputs) any = any || t.requires_grad();
    if (any) {
      impl->requires_grad = true;
      impl->parents.reserve(inputs.size());
      for (const auto& t : inputs) impl->parents.push_back(t.impl_ptr());
      impl->backward_fn = std::move(backward_rule);
    }
  }
  return Tensor(std::move(impl));
}

ComputationTape ComputationTape::record(const Tensor& root) {
  // Iterative post-order DFS; parents are visited in declaration order so
  // the resulting order is a deterministic function of the graph.
  ComputationTape tape;
  std::unordered_set<const TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  std::vector<TensorImpl*> post_order;
  if (!root.requires_grad()) return tape;
  stack.emplace_back(&root.impl(), 0);
  visited.insert(&root.impl());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      post_order.push_back(node);
      stack.pop_back();
    }
  }
  tape.nodes_.assign(post_order.rbegin(), post_order.rend());
  return tape;
}

void ComputationTape::replay_backward() const {
  for (TensorImpl* node : nodes_) {
    if (node->backward_fn && node->grad_allocated) {
      for (auto& p : node->parents) {
        if (p->requires_grad) p->ensure_grad();
      }
      node->backward_fn(*node);
    }
  }
}

void backward(const Tensor& loss) {
  if (loss.numel() != 1) {
    throw DimensionError("backward() requires a scalar loss, got shape " +
                         shape_to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  auto tape = ComputationTape::record(loss);
  auto& impl = loss.impl();
  impl.ensure_grad();
  impl.grad[0] += real(1);
  tape.replay_backward();
}

}  // namespace relgnn
