#include "relgnn/parameters.hpp"

#include <cmath>
#include <stdexcept>

namespace relgnn {

Tensor& ParameterStore::add(std::string name, Tensor value) {
  if (index_.contains(name)) {
    throw std::invalid_argument("parameter '" + name + "' registered twice");
  }
  value.set_requires_grad(true);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
  return entries_.back().second;
}

void ParameterStore::merge(const ParameterStore& other, std::string_view prefix) {
  for (const auto& [name, tensor] : other) add(std::string(prefix) + name, tensor);
}

bool ParameterStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

const Tensor& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return entries_[it->second].second;
}

Tensor& ParameterStore::get(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::size_t ParameterStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.numel();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(name);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

std::vector<std::vector<real>> ParameterStore::snapshot() const {
  std::vector<std::vector<real>> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.emplace_back(t.values().begin(), t.values().end());
  return out;
}

void ParameterStore::restore(const std::vector<std::vector<real>>& values) {
  if (values.size() != entries_.size()) {
    throw std::invalid_argument("restore: snapshot has " + std::to_string(values.size()) +
                                " tensors, store has " + std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto dst = entries_[i].second.values();
    if (dst.size() != values[i].size()) {
      throw std::invalid_argument("restore: size mismatch for '" + entries_[i].first + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<real> values(fan_in * fan_out);
  for (auto& v : values) v = static_cast<real>(rng.uniform(-limit, limit));
  return Tensor::from({fan_in, fan_out}, std::move(values));
}

}  // namespace relgnn
