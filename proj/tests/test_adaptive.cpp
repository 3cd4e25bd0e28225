#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sptest/adaptive.hpp"
#include "sptest/error.hpp"
#include "sptest/simgen.hpp"

using namespace sptest;

namespace {

TwoSampleProblem gaussian_problem(int n1, int n2, int d, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 gen(seed);
  Eigen::MatrixXd x = testutil::random_matrix(n1, d, gen);
  Eigen::MatrixXd y = testutil::random_matrix(n2, d, gen);
  y.col(0).array() += shift;
  return {Sample(x), Sample(y)};
}

// Double loop written out directly: fresh multipliers for every (b, l), the
// inner statistics standardized by hand and reduced with the sort oracle.
std::vector<double> double_loop_oracle(const TwoSampleProblem& prob, const AdaptiveReport& report,
                                       std::uint64_t seed, int L) {
  const auto kernel = KernelSpec::mean(prob.x.d());
  const auto s1 = compute_ustat(prob.x, kernel);
  const auto s2 = compute_ustat(prob.y, kernel);
  const Eigen::VectorXd se = (s1.vhat / s1.n + s2.vhat / s2.n).cwiseSqrt();
  const int B = report.B;
  const int q = s1.q();

  auto stat_row = [&](std::uint64_t b, std::uint64_t inner) {
    RowMatrix e1(1, s1.n), e2(1, s2.n);
    fill_multiplier_row(seed, 1, b, inner, {e1.data(), static_cast<std::size_t>(s1.n)});
    fill_multiplier_row(seed, 2, b, inner, {e2.data(), static_cast<std::size_t>(s2.n)});
    const RowMatrix u1 = bootstrap_centered_ustat(s1, e1);
    const RowMatrix u2 = bootstrap_centered_ustat(s2, e2);
    std::vector<double> row(static_cast<std::size_t>(q));
    for (int s = 0; s < q; ++s) row[s] = (u1(0, s) - u2(0, s)) / se[s];
    return row;
  };

  std::vector<double> out(static_cast<std::size_t>(B), INFINITY);
  for (int b = 0; b < B; ++b) {
    const auto outer = stat_row(b, 0);
    std::vector<std::vector<double>> inner;
    for (int l = 0; l < L; ++l) inner.push_back(stat_row(b, l + 1));
    for (const auto& r : report.per_p) {
      const double p = r.p.value();
      const double t = oracle::sp_norm(outer, report.s0, p);
      int exceed = 0;
      for (const auto& row : inner) exceed += oracle::sp_norm(row, report.s0, p) > t;
      out[b] = std::min(out[b], double(exceed) / (L + 1));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("low-cost replicates: hand case") {
  RowMatrix stats(3, 1);
  stats << 5, 1, 3;
  const auto ens = make_ensemble(stats, 1, {NormOrder::finite(1)});
  const std::vector<NormOrder> p{NormOrder::finite(1)};
  const Eigen::VectorXd r = lowcost_bootstrap_adaptive(ens, p);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == doctest::Approx(2.0 / 3.0));
  CHECK(r[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("low-cost replicates match the quadratic count with ties") {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> coarse(-4, 4);
  const auto orders = default_norm_orders();
  for (int trial = 0; trial < 40; ++trial) {
    const int B = 5 + trial * 3;
    RowMatrix stats(B, 6);
    for (int b = 0; b < B; ++b)
      for (int s = 0; s < 6; ++s) stats(b, s) = coarse(gen);
    // Duplicate rows force exact ties in every reduction.
    for (int b = 0; b + 1 < B; b += 4) stats.row(b + 1) = stats.row(b);
    const auto ens = make_ensemble(stats, 2, orders);
    std::vector<std::vector<double>> reduced;
    for (const auto& r : ens.reduced) reduced.emplace_back(r.begin(), r.end());
    const auto want = oracle::lowcost(reduced);
    const Eigen::VectorXd got = lowcost_bootstrap_adaptive(ens, orders);
    for (int b = 0; b < B; ++b) CHECK(got[b] == want[static_cast<std::size_t>(b)]);
  }
}

TEST_CASE("adaptive statistic and P-value") {
  CHECK(adaptive_statistic(std::vector<double>{0.3, 0.1, 0.2}) == 0.1);
  CHECK(adaptive_pvalue(0.2, std::vector<double>{0.1, 0.5, 0.3}) == doctest::Approx(0.5));
  CHECK(adaptive_pvalue(0.0, std::vector<double>{0.1, 0.5, 0.3}) == doctest::Approx(0.25));
  CHECK(adaptive_pvalue(1.0, std::vector<double>{0.1, 0.5, 0.3}) == 1.0);
  CHECK_THROWS_AS(adaptive_statistic(std::vector<double>{}), Error);
}

TEST_CASE("default s0") {
  CHECK(default_s0(1) == 1);
  CHECK(default_s0(2) == 1);
  CHECK(default_s0(75) == 9);
  CHECK(default_s0(200) == 14);
}

TEST_CASE("report structure") {
  const auto prob = gaussian_problem(30, 25, 8, 1);
  AdaptiveConfig cfg;
  cfg.B = 99;
  cfg.p_set = parse_norm_orders("inf,1,2,1");
  const auto r = run_adaptive_test(prob, KernelSpec::mean(8), cfg, 7, AdaptiveMethod::LowCost);
  CHECK(r.side == TestSide::TwoSample);
  CHECK(r.s0 == default_s0(8));
  REQUIRE(r.per_p.size() == 3);
  CHECK(r.per_p[0].p == NormOrder::finite(1));
  CHECK(r.per_p[2].p.is_infinite());
  double min_p = 1.0;
  for (const auto& t : r.per_p) {
    CHECK(t.p_value >= 0.0);
    CHECK(t.p_value <= 99.0 / 100.0);
    CHECK(t.reject == (t.statistic >= t.critical_value));
    min_p = std::min(min_p, t.p_value);
  }
  CHECK(r.statistic == min_p);
  CHECK(r.boot.size() == 99);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.multiplier_draws == 55u * 99u);
  CHECK(r.reject == (r.p_value <= cfg.alpha));
}

TEST_CASE("identical samples give a zero statistic and P-value 1") {
  const auto prob = gaussian_problem(20, 20, 5, 2);
  const TwoSampleProblem same{prob.x, prob.x};
  AdaptiveConfig cfg;
  cfg.B = 50;
  const auto r = run_adaptive_test(same, KernelSpec::mean(5), cfg, 3, AdaptiveMethod::LowCost);
  CHECK(r.stat_vector.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK_FALSE(r.reject);
}

TEST_CASE("one-sample test at the column means") {
  std::mt19937_64 gen(42);
  const Sample x(testutil::random_matrix(25, 4, gen));
  const Eigen::VectorXd u0 = x.data().colwise().mean().transpose();
  AdaptiveConfig cfg;
  cfg.B = 40;
  const auto r = run_adaptive_test(OneSampleProblem{x, u0}, KernelSpec::mean(4), cfg, 1, AdaptiveMethod::LowCost);
  CHECK(r.stat_vector.values.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.side == TestSide::OneSample);
  CHECK(r.multiplier_draws == 25u * 40u);
}

TEST_CASE("strong signal is detected") {
  const auto prob = gaussian_problem(40, 40, 10, 3, 3.0);
  AdaptiveConfig cfg;
  cfg.B = 200;
  const auto r = run_adaptive_test(prob, KernelSpec::mean(10), cfg, 4, AdaptiveMethod::LowCost);
  CHECK(r.reject);
  for (const auto& t : r.per_p) CHECK(t.reject);
}

TEST_CASE("double loop matches a direct evaluation") {
  const auto prob = gaussian_problem(12, 10, 6, 4);
  AdaptiveConfig cfg;
  cfg.B = 20;
  cfg.L = 15;
  cfg.p_set = parse_norm_orders("1,3,inf");
  cfg.s0 = 3;
  const auto r = double_loop_adaptive(prob, KernelSpec::mean(6), cfg, 99);
  const auto want = double_loop_oracle(prob, r, 99, cfg.L);
  for (int b = 0; b < cfg.B; ++b) CHECK(r.boot[b] == doctest::Approx(want[static_cast<std::size_t>(b)]).epsilon(1e-12));
  CHECK(r.multiplier_draws == 22u * (20u + 20u * 15u));
  CHECK(r.L == 15);

  cfg.threads = 3;
  const auto threaded = double_loop_adaptive(prob, KernelSpec::mean(6), cfg, 99);
  CHECK(threaded.boot == r.boot);
  CHECK(threaded.p_value == r.p_value);
}

TEST_CASE("double loop budget guard") {
  const auto prob = gaussian_problem(12, 10, 6, 5);
  AdaptiveConfig cfg;
  cfg.B = 50;
  cfg.L = 50;
  cfg.max_multiplier_draws = 1000;
  try {
    double_loop_adaptive(prob, KernelSpec::mean(6), cfg, 1);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
}

TEST_CASE("configuration validation") {
  AdaptiveConfig cfg;
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = AdaptiveConfig{};
  cfg.B = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = AdaptiveConfig{};
  cfg.p_set.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_adaptive_method("DoubleLoop") == AdaptiveMethod::DoubleLoop);
  CHECK_THROWS_AS(parse_adaptive_method("fast"), Error);
}

TEST_CASE("null P-values are close to uniform") {
  // Gaussian two-sample null; KS distance against U(0, 1) at the 1% level.
  const int R = 300;
  std::vector<double> adaptive, sum_type;
  AdaptiveConfig cfg;
  cfg.B = 199;
  for (int r = 0; r < R; ++r) {
    const auto prob = gaussian_problem(60, 60, 12, 1000 + r);
    const auto rep = run_adaptive_test(prob, KernelSpec::mean(12), cfg, 5000 + r, AdaptiveMethod::LowCost);
    adaptive.push_back(rep.p_value);
    sum_type.push_back(rep.per_p.front().p_value);
  }
  const double bound = 1.63 / std::sqrt(double(R));
  CHECK(testutil::ks_uniform(adaptive) < bound);
  CHECK(testutil::ks_uniform(sum_type) < bound);
}
