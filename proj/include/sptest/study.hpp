#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sptest/adaptive.hpp"
#include "sptest/simgen.hpp"
#include "sptest/ustat.hpp"

namespace sptest {

/// One Monte Carlo size or power study.
struct StudyConfig {
  ModelSpec model;
  bool null_hypothesis = true;
  int n1 = 100;
  /// Ignored by the one-sample model 5.
  int n2 = 100;
  int replications = 100;
  int B = 300;
  int L = 300;
  /// Empty selects default_s0(q).
  std::vector<int> s0_list;
  std::vector<NormOrder> p_set = default_norm_orders();
  double alpha = 0.05;
  KernelFamily kernel = KernelFamily::Mean;
  bool normalize = true;
  AdaptiveMethod method = AdaptiveMethod::LowCost;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Also tally Hotelling's T^2 when it applies (two-sample mean, d < n1 + n2 - 2).
  bool include_t2 = true;
  /// Bound on total multiplier draws across all replications.
  std::uint64_t max_multiplier_draws = 20'000'000'000ULL;

  bool one_sample() const noexcept { return model.model_id == 5; }
  void validate() const;
};

/// Kernel implied by the study: the mean kernel for models 1-4, or the
/// covariance / Kendall kernel on pairs (Z, X_j) for model 5.
KernelSpec study_kernel(const StudyConfig& cfg);

/// Human-readable description of the kernel's index map.
std::string describe_index_map(const StudyConfig& cfg);

struct RejectionRate {
  int rejections = 0;
  int replications = 0;

  double rate() const noexcept;
  /// sqrt(r (1 - r) / R).
  double standard_error() const noexcept;
};

struct StudyCell {
  NormOrder p = NormOrder::infinity();
  RejectionRate rate;
};

struct StudyRow {
  int s0 = 1;
  std::vector<StudyCell> per_p;  // ascending p
  RejectionRate adaptive;
};

struct StudyResult {
  StudyConfig config;
  int q = 0;
  std::vector<StudyRow> rows;
  std::optional<RejectionRate> t2;
  double wall_ms = 0.0;
};

/// Replication r draws data from derive_key(seed, {r, 1}) and multipliers
/// from derive_key(seed, {r, 2}); one bootstrap ensemble per replication is
/// shared by every (s0, p) cell.
StudyResult run_study(const StudyConfig& cfg);

/// Aligned percentage table, one line per s0.
std::string format_study_table(const StudyResult& result);

}  // namespace sptest
