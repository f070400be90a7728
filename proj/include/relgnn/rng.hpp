#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string_view>

namespace relgnn {

/// Counter-based generator: the n-th draw of a stream is a pure function of
/// (key, n), and child streams are derived by hashing a name into the key.
/// Every stochastic site (init, dropout, shuffling, sampling) splits its own
/// stream, so toggling one site never shifts the draws seen by another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  /// Independent child stream identified by `name`.
  Rng split(std::string_view name) const;
  /// Independent child stream identified by an index (e.g. trial or epoch id).
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  Rng(std::uint64_t key, int) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace relgnn
