#include "sptest/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sptest/error.hpp"
#include "sptest/rng.hpp"

namespace sptest {

void fill_multiplier_row(std::uint64_t seed, int stream_id, std::uint64_t replicate,
                         std::uint64_t inner, std::span<double> out) {
  CounterRng rng(derive_key(seed, {static_cast<std::uint64_t>(stream_id), replicate, inner}));
  std::normal_distribution<double> normal;
  for (double& e : out) e = normal(rng);
}

MultiplierMatrix gen_multipliers(int n, int B, std::uint64_t seed, int stream_id) {
  if (n < 1 || B < 1) throw Error(ErrorKind::Configuration, "multipliers need n >= 1 and B >= 1");
  MultiplierMatrix out{RowMatrix(B, n), seed, stream_id};
  for (int b = 0; b < B; ++b) {
    fill_multiplier_row(seed, stream_id, static_cast<std::uint64_t>(b), 0,
                        {out.values.row(b).data(), static_cast<std::size_t>(n)});
  }
  return out;
}

RowMatrix bootstrap_centered_ustat(const UStatSummary& summary, const RowMatrix& multipliers) {
  if (multipliers.cols() != summary.n) {
    throw Error(ErrorKind::Configuration, "multiplier width " + std::to_string(multipliers.cols()) +
                                              " does not match sample size " + std::to_string(summary.n));
  }
  const Eigen::MatrixXd centered = summary.q_proj.rowwise() - summary.uhat.transpose();
  RowMatrix out(multipliers.rows(), summary.q());
  out.noalias() = (static_cast<double>(summary.m) / summary.n) * (multipliers * centered);
  return out;
}

RowMatrix bootstrap_centered_ustat(const UStatSummary& summary, const MultiplierMatrix& mult) {
  return bootstrap_centered_ustat(summary, mult.values);
}

const Eigen::VectorXd& BootstrapEnsemble::reduced_for(NormOrder p) const {
  for (std::size_t i = 0; i < orders.size(); ++i)
    if (orders[i] == p) return reduced[i];
  throw Error(ErrorKind::Configuration, "bootstrap ensemble has no reduction for p = " + p.to_string());
}

BootstrapEnsemble make_ensemble(RowMatrix stats, int s0, std::vector<NormOrder> orders) {
  if (!stats.allFinite()) throw Error(ErrorKind::Numeric, "bootstrap statistics are not finite");
  BootstrapEnsemble out;
  out.reduced = sp_norm_rows(stats, s0, orders);
  out.stats = std::move(stats);
  out.s0 = s0;
  out.orders = std::move(orders);
  return out;
}

RowMatrix bootstrap_stat_rows_one(const UStatSummary& summary, const MultiplierMatrix& mult,
                                  bool normalize) {
  RowMatrix stats = bootstrap_centered_ustat(summary, mult);
  if (normalize) stats = stats * standard_errors(summary).cwiseInverse().asDiagonal();
  return stats;
}

RowMatrix bootstrap_stat_rows_two(const UStatSummary& first, const UStatSummary& second,
                                  const MultiplierMatrix& mult1, const MultiplierMatrix& mult2,
                                  bool normalize) {
  if (first.q() != second.q()) throw Error(ErrorKind::Configuration, "samples have different parameter dimensions");
  if (mult1.replicates() != mult2.replicates()) {
    throw Error(ErrorKind::Configuration, "multiplier sets have different replicate counts");
  }
  RowMatrix stats = bootstrap_centered_ustat(first, mult1) - bootstrap_centered_ustat(second, mult2);
  if (normalize) stats = stats * standard_errors(first, second).cwiseInverse().asDiagonal();
  return stats;
}

BootstrapEnsemble bootstrap_stats_one(const UStatSummary& summary, const MultiplierMatrix& mult,
                                      bool normalize, int s0, std::vector<NormOrder> orders) {
  return make_ensemble(bootstrap_stat_rows_one(summary, mult, normalize), s0, std::move(orders));
}

BootstrapEnsemble bootstrap_stats_two(const UStatSummary& first, const UStatSummary& second,
                                      const MultiplierMatrix& mult1, const MultiplierMatrix& mult2,
                                      bool normalize, int s0, std::vector<NormOrder> orders) {
  return make_ensemble(bootstrap_stat_rows_two(first, second, mult1, mult2, normalize), s0,
                       std::move(orders));
}

double critical_value(std::span<const double> boot, double alpha) {
  if (boot.empty()) throw Error(ErrorKind::Configuration, "critical value needs B >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Configuration, "alpha must lie in (0, 1)");
  std::vector<double> sorted(boot.begin(), boot.end());
  std::sort(sorted.begin(), sorted.end());
  const auto B = sorted.size();
  const double level = 1.0 - alpha;
  auto exceeds = [&](std::size_t count) { return static_cast<double>(count) / static_cast<double>(B) > level; };

  // Smallest count k with k / B > 1 - alpha; the order statistic sorted[k-1]
  // is then the infimum. The floor estimate is corrected for rounding.
  std::size_t k = static_cast<std::size_t>(std::floor(static_cast<double>(B) * level)) + 1;
  k = std::clamp<std::size_t>(k, 1, B);
  while (k > 1 && exceeds(k - 1)) --k;
  while (k < B && !exceeds(k)) ++k;
  return sorted[k - 1];
}

double individual_pvalue(double stat, std::span<const double> boot) {
  if (boot.empty()) throw Error(ErrorKind::Configuration, "P-value needs B >= 1");
  const auto exceed = std::count_if(boot.begin(), boot.end(), [stat](double v) { return v > stat; });
  return static_cast<double>(exceed) / static_cast<double>(boot.size() + 1);
}

IndividualTestResult individual_test(const StatVector& stat_vector, const BootstrapEnsemble& ensemble,
                                     const SpNormConfig& cfg, double alpha) {
  if (cfg.s0 != ensemble.s0) {
    throw Error(ErrorKind::Configuration, "s0 = " + std::to_string(cfg.s0) +
                                              " does not match the ensemble's s0 = " + std::to_string(ensemble.s0));
  }
  if (stat_vector.values.size() != ensemble.stats.cols()) {
    throw Error(ErrorKind::Configuration, "statistic and ensemble dimensions differ");
  }
  const Eigen::VectorXd& reduced = ensemble.reduced_for(cfg.p);
  const std::span<const double> boot(reduced.data(), static_cast<std::size_t>(reduced.size()));

  IndividualTestResult out;
  out.s0 = cfg.s0;
  out.p = cfg.p;
  out.statistic = sp_norm({stat_vector.values.data(), static_cast<std::size_t>(stat_vector.values.size())}, cfg);
  out.critical_value = critical_value(boot, alpha);
  out.p_value = individual_pvalue(out.statistic, boot);
  out.reject = out.statistic >= out.critical_value;
  out.reject_by_pvalue = out.p_value <= alpha;
  return out;
}

}  // namespace sptest
