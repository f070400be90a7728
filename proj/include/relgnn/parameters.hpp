#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relgnn/rng.hpp"
#include "relgnn/tensor.hpp"

namespace relgnn {

/// Ordered, name-addressable set of trainable tensors. Iteration follows
/// registration order, which keeps optimiser updates and checkpoints stable.
class ParameterStore {
 public:
  using Entry = std::pair<std::string, Tensor>;

  /// Registers `value` (marked requires_grad) under a fresh name.
  Tensor& add(std::string name, Tensor value);
  /// Registers every entry of `other` under `prefix + name`, sharing storage.
  void merge(const ParameterStore& other, std::string_view prefix = "");

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t num_scalars() const;
  std::vector<std::string> names() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Deep copy of all values, in registration order.
  std::vector<std::vector<real>> snapshot() const;
  void restore(const std::vector<std::vector<real>>& values);

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Glorot/Xavier uniform: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace relgnn
