#include "cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/csv.hpp"
#include "cli/report.hpp"
#include "sptest/adaptive.hpp"
#include "sptest/hotelling.hpp"
#include "sptest/study.hpp"

namespace sptest::cli {

namespace {

struct TestOptions {
  std::string x;
  std::string y;
  std::string null_path;
  std::string kernel = "mean";
  std::string pairs;
  int anchor = 0;
  int s0 = 0;
  std::string p = "1,2,3,4,5,inf";
  int B = 300;
  int L = 300;
  double alpha = 0.05;
  std::string method = "lowcost";
  std::uint64_t seed = 1;
  int threads = 1;
  bool no_normalize = false;
  bool timing = false;
  std::uint64_t max_draws = 4'000'000'000ULL;
  std::string out;
};

struct SimulateOptions {
  std::string config;
  int model = 1;
  int d = 75;
  int n1 = 100;
  int n2 = 100;
  int reps = 100;
  int B = 300;
  int L = 300;
  std::string s0;
  std::string p = "1,2,3,4,5,inf";
  double alpha = 0.05;
  std::string kernel = "mean";
  std::string hypothesis = "null";
  int s = 5;
  double u1 = 0.0;
  double u2 = 0.0;
  std::string signal;
  int stiefel_rank = 0;
  double nu = 5.0;
  std::string method = "lowcost";
  std::uint64_t seed = 1;
  int threads = 1;
  bool no_normalize = false;
  bool no_t2 = false;
  bool timing = false;
  std::uint64_t max_draws = 20'000'000'000ULL;
  std::string out;
  std::string table;
};

struct T2Options {
  std::string x;
  std::string y;
  std::string out;
};

KernelFamily kernel_family(const std::string& name) {
  if (name == "cov") return KernelFamily::Covariance;
  if (name == "tau") return KernelFamily::KendallTau;
  return KernelFamily::Mean;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Configuration, "cannot parse integer list '" + text + "'");
    }
  }
  return out;
}

KernelSpec data_kernel(const TestOptions& opt, int d, std::string& index_map) {
  const KernelFamily family = kernel_family(opt.kernel);
  if (family == KernelFamily::Mean) {
    if (!opt.pairs.empty()) throw Error(ErrorKind::Configuration, "--pairs applies to the cov and tau kernels");
    index_map = "identity";
    return KernelSpec::mean(d);
  }
  index_map = opt.pairs.empty() ? (family == KernelFamily::Covariance ? "upper" : "offdiag") : opt.pairs;
  std::vector<CoordinatePair> pairs;
  if (index_map == "upper") {
    pairs = upper_triangle_pairs(d, true);
  } else if (index_map == "offdiag") {
    pairs = upper_triangle_pairs(d, false);
  } else {
    if (opt.anchor < 0 || opt.anchor >= d) throw Error(ErrorKind::Configuration, "--anchor out of range");
    pairs = anchor_pairs(opt.anchor, d);
    index_map = "anchor:" + std::to_string(opt.anchor);
  }
  return family == KernelFamily::Covariance ? KernelSpec::covariance(std::move(pairs))
                                            : KernelSpec::kendall_tau(std::move(pairs));
}

int cmd_test(const TestOptions& opt, std::ostream& out) {
  const auto started = std::chrono::steady_clock::now();
  const Sample x(read_csv_matrix(opt.x));
  std::string index_map;
  const KernelSpec kernel = data_kernel(opt, x.d(), index_map);

  TestProblem problem;
  std::optional<Sample> y;
  if (!opt.y.empty()) {
    if (!opt.null_path.empty()) throw Error(ErrorKind::Configuration, "--null applies to one-sample tests only");
    y = Sample(read_csv_matrix(opt.y));
    if (y->d() != x.d()) {
      throw Error(ErrorKind::InvalidInput, "x has " + std::to_string(x.d()) + " columns but y has " +
                                               std::to_string(y->d()));
    }
    problem = TwoSampleProblem{x, *y};
  } else {
    Eigen::VectorXd u0 = opt.null_path.empty() ? Eigen::VectorXd::Zero(kernel.output_dim())
                                               : read_csv_vector(opt.null_path);
    if (u0.size() != kernel.output_dim()) {
      throw Error(ErrorKind::InvalidInput, "null vector has length " + std::to_string(u0.size()) +
                                               ", expected " + std::to_string(kernel.output_dim()));
    }
    problem = OneSampleProblem{x, std::move(u0)};
  }

  AdaptiveConfig cfg;
  cfg.p_set = parse_norm_orders(opt.p);
  cfg.s0 = opt.s0;
  cfg.B = opt.B;
  cfg.L = opt.L;
  cfg.alpha = opt.alpha;
  cfg.normalize = !opt.no_normalize;
  cfg.threads = opt.threads;
  cfg.max_multiplier_draws = opt.max_draws;
  const AdaptiveMethod method = parse_adaptive_method(opt.method);

  const auto report = run_adaptive_test(problem, kernel, cfg, opt.seed, method);

  Json p_set = Json::array();
  for (const auto& p : unique_orders(cfg.p_set)) p_set.push_back(p.to_string());
  const Json config{{"x", opt.x},
                    {"y", y ? Json(opt.y) : Json(nullptr)},
                    {"null", opt.null_path.empty() ? Json("zeros") : Json(opt.null_path)},
                    {"side", y ? "two-sample" : "one-sample"},
                    {"kernel", opt.kernel},
                    {"index_map", index_map},
                    {"n1", x.n()},
                    {"n2", y ? Json(y->n()) : Json(nullptr)},
                    {"d", x.d()},
                    {"q", kernel.output_dim()},
                    {"s0", report.s0},
                    {"s0_source", opt.s0 > 0 ? "user" : "default"},
                    {"p_set", std::move(p_set)},
                    {"B", cfg.B},
                    {"L", method == AdaptiveMethod::DoubleLoop ? Json(cfg.L) : Json(nullptr)},
                    {"alpha", cfg.alpha},
                    {"method", opt.method},
                    {"normalize", cfg.normalize}};

  std::optional<double> runtime;
  if (opt.timing) {
    runtime = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  }
  write_text(opt.out, dump(test_report_json(report, config, opt.seed, runtime)), out);
  return 0;
}

StudyConfig simulate_config(const SimulateOptions& opt, const CLI::App& cmd) {
  StudyConfig cfg;
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + opt.config + "'");
    try {
      const Json j = Json::parse(in);
      cfg = study_config_from_json(j.contains("config") && j.at("config").is_object() ? j.at("config") : j);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::InvalidInput, opt.config + ": " + e.what());
    }
  }
  const bool from_file = !opt.config.empty();
  auto given = [&](const char* name) { return !from_file || cmd.count(name) > 0; };

  if (given("--model")) cfg.model.model_id = opt.model;
  if (given("--d")) cfg.model.d = opt.d;
  if (given("--n1")) cfg.n1 = opt.n1;
  if (given("--n2")) cfg.n2 = opt.n2;
  if (given("--reps")) cfg.replications = opt.reps;
  if (given("--B")) cfg.B = opt.B;
  if (given("--L")) cfg.L = opt.L;
  if (given("--s0")) cfg.s0_list = opt.s0.empty() ? std::vector<int>{} : parse_int_list(opt.s0);
  if (given("--p")) cfg.p_set = parse_norm_orders(opt.p);
  if (given("--alpha")) cfg.alpha = opt.alpha;
  if (given("--kernel")) cfg.kernel = kernel_family(opt.kernel);
  if (given("--stiefel-rank")) cfg.model.stiefel_rank = opt.stiefel_rank;
  if (given("--nu")) cfg.model.nu = opt.nu;
  if (given("--method")) cfg.method = parse_adaptive_method(opt.method);
  if (given("--seed")) cfg.seed = opt.seed;
  if (given("--no-normalize")) cfg.normalize = !opt.no_normalize;
  if (given("--no-t2")) cfg.include_t2 = !opt.no_t2;
  if (given("--max-draws")) cfg.max_multiplier_draws = opt.max_draws;
  if (given("--hypothesis")) cfg.null_hypothesis = opt.hypothesis == "null";
  cfg.threads = opt.threads;

  const bool shift_flags = cmd.count("--s") + cmd.count("--u1") + cmd.count("--u2") + cmd.count("--signal") > 0;
  if (!cfg.null_hypothesis && (shift_flags || !cfg.model.shift)) {
    ShiftSpec shift = cfg.model.shift.value_or(ShiftSpec{opt.s, opt.u1, opt.u2});
    if (cmd.count("--s")) shift.s = opt.s;
    if (cmd.count("--u1")) shift.u1 = opt.u1;
    if (cmd.count("--u2")) {
      shift.u2 = opt.u2;
    } else if (opt.signal == "sparse") {
      shift.u2 = 4.0 * std::sqrt(std::log(static_cast<double>(cfg.model.d)) / cfg.n1);
    } else if (opt.signal == "dense") {
      shift.u2 = 3.0 / std::sqrt(static_cast<double>(cfg.n1));
    } else if (!cfg.model.shift) {
      throw Error(ErrorKind::Configuration, "an alternative needs --u2 or --signal sparse|dense");
    }
    cfg.model.shift = shift;
  }
  if (cfg.null_hypothesis) cfg.model.shift.reset();
  if (cfg.one_sample() && cfg.kernel == KernelFamily::Mean && !given("--kernel")) {
    throw Error(ErrorKind::Configuration, "model 5 needs --kernel cov or --kernel tau");
  }
  return cfg;
}

int cmd_simulate(const SimulateOptions& opt, const CLI::App& cmd, std::ostream& out) {
  const StudyConfig cfg = simulate_config(opt, cmd);
  const StudyResult result = run_study(cfg);
  write_text(opt.out, dump(study_result_json(result, opt.timing)), out);
  const std::string table = format_study_table(result);
  if (!opt.table.empty()) {
    write_text(opt.table, table, out);
  } else if (!opt.out.empty()) {
    out << table;
  }
  return 0;
}

int cmd_t2(const T2Options& opt, std::ostream& out) {
  const Sample x(read_csv_matrix(opt.x));
  const Sample y(read_csv_matrix(opt.y));
  HotellingResult r;
  try {
    r = hotelling_test(x, y);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotApplicable) throw;
    throw Error(ErrorKind::NotApplicable, std::string(e.what()) + " (reported as '-')");
  }
  const Json report{{"test", "hotelling_t2"}, {"x", opt.x},        {"y", opt.y},
                    {"n1", x.n()},            {"n2", y.n()},       {"d", x.d()},
                    {"statistic", r.statistic}, {"p_value", r.p_value},
                    {"df1", r.df1},           {"df2", r.df2}};
  write_text(opt.out, dump(report), out);
  return 0;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Configuration:
    case ErrorKind::Budget:
    case ErrorKind::Io:
      return 1;
    default:
      return 2;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"High-dimensional (s0, p)-norm tests with multiplier bootstrap calibration", "sptest"};
  app.require_subcommand(1);

  TestOptions topt;
  auto* test = app.add_subcommand("test", "Test one- or two-sample U-statistic parameters from CSV data");
  test->add_option("--x", topt.x, "CSV of the first sample")->required();
  test->add_option("--y", topt.y, "CSV of the second sample (two-sample test)");
  test->add_option("--null", topt.null_path, "CSV with the one-sample null vector u0 (default zeros)");
  test->add_option("--kernel", topt.kernel, "mean, cov or tau")->check(CLI::IsMember({"mean", "cov", "tau"}));
  test->add_option("--pairs", topt.pairs, "Entries tested by cov/tau: upper, offdiag or anchor")
      ->check(CLI::IsMember({"upper", "offdiag", "anchor"}));
  test->add_option("--anchor", topt.anchor, "Anchor column for --pairs anchor (zero-based)");
  test->add_option("--s0", topt.s0, "Number of largest coordinates kept (default round(sqrt(q)))");
  test->add_option("--p", topt.p, "Norm orders, e.g. 1,2,3,4,5,inf");
  test->add_option("--B", topt.B, "Bootstrap replicates");
  test->add_option("--L", topt.L, "Inner replicates for the double loop");
  test->add_option("--alpha", topt.alpha, "Significance level");
  test->add_option("--method", topt.method, "lowcost or doubleloop")->check(CLI::IsMember({"lowcost", "doubleloop"}));
  test->add_option("--seed", topt.seed, "Random seed");
  test->add_option("--threads", topt.threads, "Worker threads");
  test->add_flag("--no-normalize", topt.no_normalize, "Use unstudentized differences");
  test->add_flag("--timing", topt.timing, "Record runtime_ms in the report");
  test->add_option("--max-draws", topt.max_draws, "Limit on multiplier draws for the double loop");
  test->add_option("--out", topt.out, "Report path (default stdout)");

  SimulateOptions sopt;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo size or power study");
  sim->add_option("--config", sopt.config, "JSON study configuration (same schema as the report's config)");
  sim->add_option("--model", sopt.model, "Model 1-5")->check(CLI::Range(1, 5));
  sim->add_option("--d", sopt.d, "Dimension");
  sim->add_option("--n1", sopt.n1, "First sample size");
  sim->add_option("--n2", sopt.n2, "Second sample size");
  sim->add_option("--reps", sopt.reps, "Replications");
  sim->add_option("--B", sopt.B, "Bootstrap replicates");
  sim->add_option("--L", sopt.L, "Inner replicates for the double loop");
  sim->add_option("--s0", sopt.s0, "Comma separated s0 values (default round(sqrt(q)))");
  sim->add_option("--p", sopt.p, "Norm orders, e.g. 1,2,3,4,5,inf");
  sim->add_option("--alpha", sopt.alpha, "Significance level");
  sim->add_option("--kernel", sopt.kernel, "mean, cov or tau")->check(CLI::IsMember({"mean", "cov", "tau"}));
  sim->add_option("--hypothesis", sopt.hypothesis, "null or alternative")
      ->check(CLI::IsMember({"null", "alternative"}));
  sim->add_option("--s", sopt.s, "Number of shifted coordinates");
  sim->add_option("--u1", sopt.u1, "Lower bound of shift magnitudes");
  sim->add_option("--u2", sopt.u2, "Upper bound of shift magnitudes");
  sim->add_option("--signal", sopt.signal, "sparse: u2 = 4 sqrt(log d / n1); dense: u2 = 3 / sqrt(n1)")
      ->check(CLI::IsMember({"sparse", "dense"}));
  sim->add_option("--stiefel-rank", sopt.stiefel_rank, "Model 3 perturbation rank (default d / 5)");
  sim->add_option("--nu", sopt.nu, "Degrees of freedom for models 4 and 5");
  sim->add_option("--method", sopt.method, "lowcost or doubleloop")->check(CLI::IsMember({"lowcost", "doubleloop"}));
  sim->add_option("--seed", sopt.seed, "Random seed");
  sim->add_option("--threads", sopt.threads, "Worker threads");
  sim->add_flag("--no-normalize", sopt.no_normalize, "Use unstudentized differences");
  sim->add_flag("--no-t2", sopt.no_t2, "Skip Hotelling's T^2");
  sim->add_flag("--timing", sopt.timing, "Record runtime_ms in the report");
  sim->add_option("--max-draws", sopt.max_draws, "Limit on total multiplier draws");
  sim->add_option("--out", sopt.out, "Report path (default stdout)");
  sim->add_option("--table", sopt.table, "Plain-text table path");

  T2Options hopt;
  auto* t2 = app.add_subcommand("t2", "Hotelling's T^2 two-sample baseline");
  t2->add_option("--x", hopt.x, "CSV of the first sample")->required();
  t2->add_option("--y", hopt.y, "CSV of the second sample")->required();
  t2->add_option("--out", hopt.out, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*test) return cmd_test(topt, out);
    if (*sim) return cmd_simulate(sopt, *sim, out);
    return cmd_t2(hopt, out);
  } catch (const Error& e) {
    err << "sptest: " << e.what();
    if (e.kind() == ErrorKind::DegenerateVariance) err << " (--no-normalize)";
    err << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "sptest: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace sptest::cli
