#include <doctest.h>

#include <random>
#include <set>

#include "sptest/parallel.hpp"
#include "sptest/rng.hpp"

using namespace sptest;

TEST_CASE("counter generator is deterministic and keyed") {
  CounterRng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
  }
}

TEST_CASE("derived keys separate paths") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t r = 0; r < 50; ++r)
      for (std::uint64_t i = 0; i < 5; ++i) keys.insert(derive_key(7, {s, r, i}));
  CHECK(keys.size() == 4u * 50u * 5u);
  CHECK(derive_key(7, {1, 2}) != derive_key(7, {2, 1}));
  CHECK(derive_key(7, {1}) != derive_key(7, {1, 0}));
  CHECK(derive_key(7, {1, 2}) == derive_key(7, {1, 2}));
}

TEST_CASE("uniform output moments") {
  CounterRng rng(derive_key(1, {2}));
  std::uniform_real_distribution<double> unif;
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  int low_bit = 0;
  for (int i = 0; i < n; ++i) {
    const double u = unif(rng);
    sum += u;
    sq += u * u;
    low_bit += static_cast<int>(rng() & 1u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
  CHECK(std::abs(low_bit - n / 2.0) < 5.0 * std::sqrt(n / 4.0));
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
