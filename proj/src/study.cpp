#include "sptest/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sptest/error.hpp"
#include "sptest/hotelling.hpp"
#include "sptest/parallel.hpp"
#include "sptest/rng.hpp"

namespace sptest {

namespace {

struct ReplicateOutcome {
  std::vector<std::vector<char>> cell_reject;  // [row][p]
  std::vector<char> adaptive_reject;           // [row]
  char t2_reject = 0;
};

bool t2_applies(const StudyConfig& cfg) {
  return cfg.include_t2 && !cfg.one_sample() && cfg.kernel == KernelFamily::Mean &&
         cfg.model.d < cfg.n1 + cfg.n2 - 2;
}

}  // namespace

void StudyConfig::validate() const {
  model.validate();
  if (replications < 1) throw Error(ErrorKind::Configuration, "replications must be at least 1");
  if (n1 < 2 || (!one_sample() && n2 < 2)) throw Error(ErrorKind::Configuration, "sample sizes must be at least 2");
  for (int s0 : s0_list)
    if (s0 < 1) throw Error(ErrorKind::Configuration, "s0 values must be positive");
  if (!null_hypothesis && !model.shift) {
    throw Error(ErrorKind::Configuration, "a power study needs a shift specification");
  }
  if (one_sample() && kernel != KernelFamily::Covariance && kernel != KernelFamily::KendallTau) {
    throw Error(ErrorKind::Configuration, "model 5 supports the cov and tau kernels");
  }
  if (kernel == KernelFamily::Custom) throw Error(ErrorKind::Configuration, "studies use built-in kernels");
  AdaptiveConfig adaptive;
  adaptive.p_set = p_set;
  adaptive.B = B;
  adaptive.L = L;
  adaptive.alpha = alpha;
  adaptive.validate();

  const double per_rep = static_cast<double>(one_sample() ? n1 : n1 + n2) * B *
                         (method == AdaptiveMethod::DoubleLoop ? L + 1.0 : 1.0);
  if (per_rep * replications > static_cast<double>(max_multiplier_draws)) {
    throw Error(ErrorKind::Budget, "study needs about " + std::to_string(static_cast<long double>(per_rep * replications)) +
                                       " multiplier draws, limit is " + std::to_string(max_multiplier_draws));
  }
}

KernelSpec study_kernel(const StudyConfig& cfg) {
  const int d = cfg.model.d;
  if (cfg.one_sample()) {
    auto pairs = anchor_pairs(0, d + 1);
    return cfg.kernel == KernelFamily::Covariance ? KernelSpec::covariance(std::move(pairs))
                                                  : KernelSpec::kendall_tau(std::move(pairs));
  }
  switch (cfg.kernel) {
    case KernelFamily::Covariance: return KernelSpec::covariance(upper_triangle_pairs(d, true));
    case KernelFamily::KendallTau: return KernelSpec::kendall_tau(upper_triangle_pairs(d, false));
    default: return KernelSpec::mean(d);
  }
}

std::string describe_index_map(const StudyConfig& cfg) {
  if (cfg.one_sample()) return "anchor:0";
  switch (cfg.kernel) {
    case KernelFamily::Covariance: return "upper";
    case KernelFamily::KendallTau: return "offdiag";
    default: return "identity";
  }
}

double RejectionRate::rate() const noexcept {
  return replications > 0 ? static_cast<double>(rejections) / replications : 0.0;
}

double RejectionRate::standard_error() const noexcept {
  if (replications <= 0) return 0.0;
  const double r = rate();
  return std::sqrt(r * (1.0 - r) / replications);
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const KernelSpec kernel = study_kernel(cfg);
  const int q = kernel.output_dim();
  const std::vector<int> s0_list = cfg.s0_list.empty() ? std::vector<int>{default_s0(q)} : cfg.s0_list;
  const auto orders = unique_orders(cfg.p_set);

  AdaptiveConfig adaptive;
  adaptive.p_set = orders;
  adaptive.B = cfg.B;
  adaptive.L = cfg.L;
  adaptive.alpha = cfg.alpha;
  adaptive.normalize = cfg.normalize;
  adaptive.threads = 1;
  adaptive.max_multiplier_draws = cfg.max_multiplier_draws;

  const bool with_t2 = t2_applies(cfg);
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replications));

  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t r) {
    const std::uint64_t data_seed = derive_key(cfg.seed, {r, 1});
    const std::uint64_t boot_seed = derive_key(cfg.seed, {r, 2});

    TestProblem problem;
    std::optional<TwoSampleData> two;
    if (cfg.one_sample()) {
      problem = OneSampleProblem{Sample(gen_model5(cfg.model, cfg.n1, cfg.null_hypothesis, data_seed)),
                                 Eigen::VectorXd::Zero(q)};
    } else {
      two = gen_two_sample(cfg.model, cfg.n1, cfg.n2, cfg.null_hypothesis, data_seed);
      problem = TwoSampleProblem{Sample(two->x), Sample(two->y)};
    }

    const auto prepared = prepare_test(problem, kernel, cfg.B, cfg.normalize, boot_seed);
    ReplicateOutcome& out = outcomes[r];
    for (int s0 : s0_list) {
      const auto report = evaluate_adaptive(prepared, s0, adaptive, cfg.method);
      std::vector<char> cells;
      for (const auto& rec : report.per_p) cells.push_back(rec.reject ? 1 : 0);
      out.cell_reject.push_back(std::move(cells));
      out.adaptive_reject.push_back(report.reject ? 1 : 0);
    }
    if (with_t2) {
      const auto& tp = std::get<TwoSampleProblem>(problem);
      out.t2_reject = hotelling_test(tp.x, tp.y).p_value <= cfg.alpha ? 1 : 0;
    }
  });

  StudyResult result;
  result.config = cfg;
  result.config.s0_list = s0_list;
  result.config.p_set = orders;
  result.q = q;
  for (std::size_t row = 0; row < s0_list.size(); ++row) {
    StudyRow sr;
    sr.s0 = s0_list[row];
    sr.adaptive.replications = cfg.replications;
    for (const NormOrder p : orders) sr.per_p.push_back({p, {0, cfg.replications}});
    for (const auto& o : outcomes) {
      for (std::size_t i = 0; i < orders.size(); ++i) sr.per_p[i].rate.rejections += o.cell_reject[row][i];
      sr.adaptive.rejections += o.adaptive_reject[row];
    }
    result.rows.push_back(std::move(sr));
  }
  if (with_t2) {
    RejectionRate t2{0, cfg.replications};
    for (const auto& o : outcomes) t2.rejections += o.t2_reject;
    result.t2 = t2;
  }
  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string format_study_table(const StudyResult& result) {
  std::ostringstream os;
  char buf[64];
  os << "   d    s0";
  const auto& first = result.rows.front();
  for (const auto& cell : first.per_p) {
    std::snprintf(buf, sizeof buf, " %8s", ("p=" + cell.p.to_string()).c_str());
    os << buf;
  }
  os << "     T_ad";
  if (result.t2) os << "      T^2";
  os << '\n';
  bool first_row = true;
  for (const auto& row : result.rows) {
    if (first_row) {
      std::snprintf(buf, sizeof buf, "%4d", result.config.model.d);
    } else {
      std::snprintf(buf, sizeof buf, "%4s", "");
    }
    os << buf;
    std::snprintf(buf, sizeof buf, "  %4d", row.s0);
    os << buf;
    for (const auto& cell : row.per_p) {
      std::snprintf(buf, sizeof buf, " %8.2f", 100.0 * cell.rate.rate());
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %8.2f", 100.0 * row.adaptive.rate());
    os << buf;
    if (result.t2) {
      if (first_row) {
        std::snprintf(buf, sizeof buf, " %8.2f", 100.0 * result.t2->rate());
      } else {
        std::snprintf(buf, sizeof buf, " %8s", "");
      }
      os << buf;
    }
    os << '\n';
    first_row = false;
  }
  return os.str();
}

}  // namespace sptest
