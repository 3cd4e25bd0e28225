#include "sptest/adaptive.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "sptest/error.hpp"
#include "sptest/parallel.hpp"

namespace sptest {

const char* to_string(AdaptiveMethod method) noexcept {
  return method == AdaptiveMethod::LowCost ? "lowcost" : "doubleloop";
}

AdaptiveMethod parse_adaptive_method(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "lowcost") return AdaptiveMethod::LowCost;
  if (lower == "doubleloop") return AdaptiveMethod::DoubleLoop;
  throw Error(ErrorKind::Configuration, "unknown adaptive method '" + lower + "'");
}

int default_s0(int q) {
  const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q))));
  return std::min(q, std::max(1, root));
}

void AdaptiveConfig::validate() const {
  if (p_set.empty()) throw Error(ErrorKind::Configuration, "the set of norm orders is empty");
  if (s0 < 0) throw Error(ErrorKind::Configuration, "s0 must be positive");
  if (B < 2) throw Error(ErrorKind::Configuration, "B must be at least 2");
  if (L < 1) throw Error(ErrorKind::Configuration, "L must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Configuration, "alpha must lie in (0, 1)");
}

int PreparedTest::total_n() const noexcept {
  int n = 0;
  for (const auto& s : summaries) n += s.n;
  return n;
}

PreparedTest prepare_test(const TestProblem& problem, const KernelSpec& kernel, int B, bool normalize,
                          std::uint64_t seed) {
  PreparedTest out;
  out.seed = seed;
  out.normalize = normalize;
  if (const auto* one = std::get_if<OneSampleProblem>(&problem)) {
    out.side = TestSide::OneSample;
    out.summaries.push_back(compute_ustat(one->x, kernel));
    const auto& s = out.summaries.front();
    out.stat_vector = standardize_one_sample(s, one->u0, normalize);
    out.boot_rows = bootstrap_stat_rows_one(s, gen_multipliers(s.n, B, seed, 1), normalize);
  } else {
    const auto& two = std::get<TwoSampleProblem>(problem);
    if (two.x.d() != two.y.d()) {
      throw Error(ErrorKind::Configuration, "samples have different dimensions " + std::to_string(two.x.d()) +
                                                " and " + std::to_string(two.y.d()));
    }
    out.side = TestSide::TwoSample;
    out.summaries.push_back(compute_ustat(two.x, kernel));
    out.summaries.push_back(compute_ustat(two.y, kernel));
    const auto& s1 = out.summaries[0];
    const auto& s2 = out.summaries[1];
    out.stat_vector = standardize_two_sample(s1, s2, normalize);
    out.boot_rows = bootstrap_stat_rows_two(s1, s2, gen_multipliers(s1.n, B, seed, 1),
                                            gen_multipliers(s2.n, B, seed, 2), normalize);
  }
  return out;
}

double adaptive_statistic(std::span<const double> per_p_pvalues) {
  if (per_p_pvalues.empty()) throw Error(ErrorKind::Configuration, "the set of norm orders is empty");
  return *std::min_element(per_p_pvalues.begin(), per_p_pvalues.end());
}

Eigen::VectorXd lowcost_bootstrap_adaptive(const BootstrapEnsemble& ensemble,
                                           std::span<const NormOrder> p_set) {
  if (p_set.empty()) throw Error(ErrorKind::Configuration, "the set of norm orders is empty");
  const int B = ensemble.replicates();
  if (B < 2) throw Error(ErrorKind::Configuration, "low-cost bootstrap needs B >= 2");

  Eigen::VectorXd out = Eigen::VectorXd::Constant(B, std::numeric_limits<double>::infinity());
  std::vector<double> sorted(static_cast<std::size_t>(B));
  for (const NormOrder p : p_set) {
    const Eigen::VectorXd& reduced = ensemble.reduced_for(p);
    std::copy(reduced.begin(), reduced.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    for (int b = 0; b < B; ++b) {
      // Entries after upper_bound are exactly those strictly greater; b itself never is.
      const auto not_greater = std::upper_bound(sorted.begin(), sorted.end(), reduced[b]) - sorted.begin();
      const double rank_p = static_cast<double>(B - not_greater) / B;
      out[b] = std::min(out[b], rank_p);
    }
  }
  return out;
}

double adaptive_pvalue(double stat, std::span<const double> boot) {
  if (boot.empty()) throw Error(ErrorKind::Configuration, "adaptive P-value needs B >= 1");
  const auto hits = std::count_if(boot.begin(), boot.end(), [stat](double v) { return v <= stat; });
  return static_cast<double>(hits + 1) / static_cast<double>(boot.size() + 1);
}

namespace {

MultiplierMatrix inner_multipliers(int n, int L, std::uint64_t seed, int stream, int outer) {
  MultiplierMatrix out{RowMatrix(L, n), seed, stream};
  for (int l = 0; l < L; ++l) {
    fill_multiplier_row(seed, stream, static_cast<std::uint64_t>(outer), static_cast<std::uint64_t>(l) + 1,
                        {out.values.row(l).data(), static_cast<std::size_t>(n)});
  }
  return out;
}

// Inner bootstrap statistics for outer replicate b: fresh multipliers per
// (b, l), same data summaries.
RowMatrix inner_rows(const PreparedTest& prepared, int b, int L) {
  const auto& s1 = prepared.summaries[0];
  const auto m1 = inner_multipliers(s1.n, L, prepared.seed, 1, b);
  if (prepared.side == TestSide::OneSample) return bootstrap_stat_rows_one(s1, m1, prepared.normalize);
  const auto& s2 = prepared.summaries[1];
  const auto m2 = inner_multipliers(s2.n, L, prepared.seed, 2, b);
  return bootstrap_stat_rows_two(s1, s2, m1, m2, prepared.normalize);
}

Eigen::VectorXd double_loop_replicates(const PreparedTest& prepared, const BootstrapEnsemble& outer,
                                       const AdaptiveConfig& cfg) {
  const int B = outer.replicates();
  const int L = cfg.L;
  const double draws = static_cast<double>(prepared.total_n()) * B * (static_cast<double>(L) + 1.0);
  if (draws > static_cast<double>(cfg.max_multiplier_draws)) {
    throw Error(ErrorKind::Budget, "double loop needs " + std::to_string(static_cast<long double>(draws)) +
                                       " multiplier draws, limit is " + std::to_string(cfg.max_multiplier_draws));
  }
  Eigen::VectorXd out(B);
  parallel_for(static_cast<std::size_t>(B), cfg.threads, [&](std::size_t idx) {
    const int b = static_cast<int>(idx);
    const auto inner = make_ensemble(inner_rows(prepared, b, L), outer.s0, outer.orders);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < outer.orders.size(); ++i) {
      const double threshold = outer.reduced[i][b];
      const auto& r = inner.reduced[i];
      const auto exceed = std::count_if(r.begin(), r.end(), [threshold](double v) { return v > threshold; });
      best = std::min(best, static_cast<double>(exceed) / (L + 1));
    }
    out[b] = best;
  });
  return out;
}

}  // namespace

AdaptiveReport evaluate_adaptive(const PreparedTest& prepared, int s0, const AdaptiveConfig& cfg,
                                 AdaptiveMethod method) {
  cfg.validate();
  if (s0 < 1) throw Error(ErrorKind::Configuration, "s0 must be a positive integer");
  if (prepared.boot_rows.rows() < 2) throw Error(ErrorKind::Configuration, "B must be at least 2");
  const auto orders = unique_orders(cfg.p_set);

  const auto ensemble = make_ensemble(prepared.boot_rows, s0, orders);

  AdaptiveReport out;
  out.side = prepared.side;
  out.method = method;
  out.s0 = s0;
  out.B = ensemble.replicates();
  out.L = method == AdaptiveMethod::DoubleLoop ? cfg.L : 0;
  out.alpha = cfg.alpha;
  out.stat_vector = prepared.stat_vector;

  std::vector<double> pvalues;
  for (const NormOrder p : orders) {
    out.per_p.push_back(individual_test(prepared.stat_vector, ensemble, {s0, p}, cfg.alpha));
    pvalues.push_back(out.per_p.back().p_value);
  }
  out.statistic = adaptive_statistic(pvalues);

  const auto per_replicate = static_cast<std::uint64_t>(prepared.total_n());
  out.multiplier_draws = per_replicate * static_cast<std::uint64_t>(out.B);
  if (method == AdaptiveMethod::LowCost) {
    out.boot = lowcost_bootstrap_adaptive(ensemble, orders);
  } else {
    out.boot = double_loop_replicates(prepared, ensemble, cfg);
    out.multiplier_draws += per_replicate * static_cast<std::uint64_t>(out.B) * static_cast<std::uint64_t>(cfg.L);
  }
  out.p_value = adaptive_pvalue(out.statistic, {out.boot.data(), static_cast<std::size_t>(out.boot.size())});
  out.reject = out.p_value <= cfg.alpha;
  return out;
}

AdaptiveReport run_adaptive_test(const TestProblem& problem, const KernelSpec& kernel,
                                 const AdaptiveConfig& cfg, std::uint64_t seed, AdaptiveMethod method) {
  cfg.validate();
  const auto prepared = prepare_test(problem, kernel, cfg.B, cfg.normalize, seed);
  const int s0 = cfg.s0 > 0 ? cfg.s0 : default_s0(prepared.q());
  return evaluate_adaptive(prepared, s0, cfg, method);
}

AdaptiveReport double_loop_adaptive(const TestProblem& problem, const KernelSpec& kernel,
                                    const AdaptiveConfig& cfg, std::uint64_t seed) {
  return run_adaptive_test(problem, kernel, cfg, seed, AdaptiveMethod::DoubleLoop);
}

}  // namespace sptest
