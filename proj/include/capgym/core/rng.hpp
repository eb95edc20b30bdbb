#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capgym/core/error.hpp"
#include "capgym/core/hash.hpp"

namespace capgym {

// Labeled pseudo-random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the integer/real mappings below are
// implemented here rather than with <random> distributions, whose algorithms
// are implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream)
      : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {
    if (stream.empty()) throw Error("rng stream label must be nonempty");
  }

  std::uint64_t seed() const { return seed_; }
  const std::string& stream() const { return stream_; }

  // Child stream "<parent>/<label>"; independent of how many draws the parent made.
  Rng derive(std::string_view label) const {
    return Rng(seed_, stream_ + "/" + std::string(label));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<int>(lo + static_cast<std::int64_t>(v % span));
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  template <class T>
  const T& pick(std::span<const T> items) {
    return items[static_cast<std::size_t>(uniform_int(0, static_cast<int>(items.size()) - 1))];
  }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return pick(std::span<const T>(items));
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k && i < n; ++i) {
      const int j = uniform_int(i, n - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(std::min(k, n)));
    return all;
  }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::string_view stream) {
    return splitmix64(splitmix64(seed) ^ fnv1a64(stream));
  }

  std::uint64_t seed_;
  std::string stream_;
  std::mt19937_64 engine_;
};

inline Rng derive_rng(std::uint64_t seed, std::string_view stream) { return Rng(seed, stream); }

}  // namespace capgym
