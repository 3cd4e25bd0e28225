#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sptest/bootstrap.hpp"
#include "sptest/norms.hpp"
#include "sptest/ustat.hpp"

namespace sptest {

enum class AdaptiveMethod { LowCost, DoubleLoop };

const char* to_string(AdaptiveMethod method) noexcept;
AdaptiveMethod parse_adaptive_method(std::string_view text);

/// min(q, max(1, round(sqrt(q)))).
int default_s0(int q);

struct AdaptiveConfig {
  std::vector<NormOrder> p_set = default_norm_orders();
  /// 0 selects default_s0(q).
  int s0 = 0;
  int B = 300;
  /// Inner replicates; used by the double loop only.
  int L = 300;
  double alpha = 0.05;
  bool normalize = true;
  int threads = 1;
  /// Upper bound on standard normal draws made by the double loop.
  std::uint64_t max_multiplier_draws = 4'000'000'000ULL;

  void validate() const;
};

struct OneSampleProblem {
  Sample x;
  Eigen::VectorXd u0;
};

struct TwoSampleProblem {
  Sample x;
  Sample y;
};

using TestProblem = std::variant<OneSampleProblem, TwoSampleProblem>;

/// Quantities shared by every (s0, p) choice for one data set: U-statistic
/// summaries, the observed statistic vector and the B x q bootstrap rows.
struct PreparedTest {
  TestSide side = TestSide::OneSample;
  std::vector<UStatSummary> summaries;
  StatVector stat_vector;
  RowMatrix boot_rows;
  std::uint64_t seed = 0;
  bool normalize = true;

  int q() const noexcept { return static_cast<int>(stat_vector.values.size()); }
  int total_n() const noexcept;
};

/// Sample gamma (1 or 2) draws its multipliers from stream gamma.
PreparedTest prepare_test(const TestProblem& problem, const KernelSpec& kernel, int B, bool normalize,
                          std::uint64_t seed);

struct AdaptiveReport {
  TestSide side = TestSide::OneSample;
  AdaptiveMethod method = AdaptiveMethod::LowCost;
  int s0 = 1;
  int B = 0;
  int L = 0;
  double alpha = 0.05;
  StatVector stat_vector;
  std::vector<IndividualTestResult> per_p;  // ascending p
  /// Minimum individual P-value.
  double statistic = 1.0;
  /// Bootstrap replicates of the minimum P-value.
  Eigen::VectorXd boot;
  double p_value = 1.0;
  bool reject = false;
  std::uint64_t multiplier_draws = 0;
};

double adaptive_statistic(std::span<const double> per_p_pvalues);

/// Rank-reuse replicates: output_b = min_p #{b1 != b : R_p[b1] > R_p[b]} / B.
Eigen::VectorXd lowcost_bootstrap_adaptive(const BootstrapEnsemble& ensemble,
                                           std::span<const NormOrder> p_set);

/// (#{b : boot_b <= stat} + 1) / (B + 1).
double adaptive_pvalue(double stat, std::span<const double> boot);

/// Individual tests for every p plus the combined test, using `s0`.
AdaptiveReport evaluate_adaptive(const PreparedTest& prepared, int s0, const AdaptiveConfig& cfg,
                                 AdaptiveMethod method);

AdaptiveReport run_adaptive_test(const TestProblem& problem, const KernelSpec& kernel,
                                 const AdaptiveConfig& cfg, std::uint64_t seed, AdaptiveMethod method);

AdaptiveReport double_loop_adaptive(const TestProblem& problem, const KernelSpec& kernel,
                                    const AdaptiveConfig& cfg, std::uint64_t seed);

}  // namespace sptest
