#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sptest/norms.hpp"
#include "sptest/ustat.hpp"

namespace sptest {

/// B x n standard normal multipliers. Row b is a pure function of
/// (seed, stream_id, b), so any subset of rows can be regenerated alone.
struct MultiplierMatrix {
  RowMatrix values;
  std::uint64_t seed = 0;
  int stream_id = 0;

  int replicates() const noexcept { return static_cast<int>(values.rows()); }
  int n() const noexcept { return static_cast<int>(values.cols()); }
};

/// Writes the standard normal multipliers of one replicate. `inner` is 0 for
/// an outer replicate and l + 1 for inner replicate l of the double loop.
void fill_multiplier_row(std::uint64_t seed, int stream_id, std::uint64_t replicate,
                         std::uint64_t inner, std::span<double> out);

MultiplierMatrix gen_multipliers(int n, int B, std::uint64_t seed, int stream_id);

/// Row b: (m/n) * sum_k (Q_k - uhat) * eps_k^b, the multiplier-bootstrap
/// U-statistic in its projection form. O(B n q).
RowMatrix bootstrap_centered_ustat(const UStatSummary& summary, const MultiplierMatrix& mult);
RowMatrix bootstrap_centered_ustat(const UStatSummary& summary, const RowMatrix& multipliers);

/// B x q bootstrap statistics plus their (s0, p)-norm reductions.
struct BootstrapEnsemble {
  RowMatrix stats;
  int s0 = 1;
  std::vector<NormOrder> orders;
  std::vector<Eigen::VectorXd> reduced;  // aligned with orders

  int replicates() const noexcept { return static_cast<int>(stats.rows()); }
  /// Throws Configuration when p was not reduced.
  const Eigen::VectorXd& reduced_for(NormOrder p) const;
};

/// Reduces every row of `stats` under each order with shared s0.
BootstrapEnsemble make_ensemble(RowMatrix stats, int s0, std::vector<NormOrder> orders);

/// Bootstrap statistic rows W^b before reduction.
RowMatrix bootstrap_stat_rows_one(const UStatSummary& summary, const MultiplierMatrix& mult,
                                  bool normalize);
/// Bootstrap statistic rows N^b before reduction.
RowMatrix bootstrap_stat_rows_two(const UStatSummary& first, const UStatSummary& second,
                                  const MultiplierMatrix& mult1, const MultiplierMatrix& mult2,
                                  bool normalize);

BootstrapEnsemble bootstrap_stats_one(const UStatSummary& summary, const MultiplierMatrix& mult,
                                      bool normalize, int s0, std::vector<NormOrder> orders);
BootstrapEnsemble bootstrap_stats_two(const UStatSummary& first, const UStatSummary& second,
                                      const MultiplierMatrix& mult1, const MultiplierMatrix& mult2,
                                      bool normalize, int s0, std::vector<NormOrder> orders);

/// Smallest t with #{b : boot_b <= t} / B > 1 - alpha.
double critical_value(std::span<const double> boot, double alpha);

/// #{b : boot_b > stat} / (B + 1).
double individual_pvalue(double stat, std::span<const double> boot);

struct IndividualTestResult {
  int s0 = 1;
  NormOrder p = NormOrder::infinity();
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  /// statistic >= critical value.
  bool reject = false;
  /// p_value <= alpha. Implied by `reject`; the converse can fail just
  /// below the critical value since the P-value divides by B + 1.
  bool reject_by_pvalue = false;

  bool rules_disagree() const noexcept { return reject != reject_by_pvalue; }
};

IndividualTestResult individual_test(const StatVector& stat_vector, const BootstrapEnsemble& ensemble,
                                     const SpNormConfig& cfg, double alpha);

}  // namespace sptest
