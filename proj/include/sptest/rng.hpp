#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sptest {

/// Finalizer of SplitMix64; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a seed together with a path of integers (stream, replicate, ...)
/// into an independent 64-bit key. Different paths give unrelated keys.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based generator: the i-th output is mix64(key + i * gamma).
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions. Constructing one per (seed, stream, replicate) key makes
/// every replicate's draws independent of evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace sptest
