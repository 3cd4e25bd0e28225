#include "sptest/rng.hpp"

namespace sptest {

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t x : path) {
    h = mix64(h + 0x9e3779b97f4a7c15ULL + mix64(x ^ 0x13198a2e03707344ULL));
  }
  return h;
}

}  // namespace sptest
