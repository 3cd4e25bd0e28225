#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/csv.hpp"
#include "cli/report.hpp"
#include "helpers.hpp"
#include "sptest/error.hpp"
#include "sptest/study.hpp"

namespace fs = std::filesystem;
using namespace sptest;
using sptest::cli::Json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "sptest");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("sptest_cli_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string csv(const Eigen::MatrixXd& m, bool header) {
  std::ostringstream s;
  s.precision(17);
  if (header) {
    for (int j = 0; j < m.cols(); ++j) s << (j ? "," : "") << "v" << j;
    s << "\n";
  }
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) s << (j ? "," : "") << m(i, j);
    s << "\n";
  }
  return s.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("CSV parsing") {
  const auto m = cli::parse_csv_matrix("a,b\n1,2\n\n3,4.5\n", "t");
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 4.5);
  CHECK(cli::parse_csv_matrix("1,2\n3,4\n", "t").rows() == 2);
  CHECK_THROWS_AS(cli::parse_csv_matrix("1,2\n3\n", "t"), Error);
  CHECK_THROWS_AS(cli::parse_csv_matrix("1,nan\n", "t"), Error);
  CHECK_THROWS_AS(cli::parse_csv_matrix("1,x\n", "t"), Error);
  CHECK_THROWS_AS(cli::read_csv_matrix("/nonexistent/file.csv"), Error);
}

TEST_CASE("test command: reports, determinism and degenerate inputs") {
  TempDir dir;
  std::mt19937_64 gen(61);
  const auto x = dir.file("x.csv", csv(testutil::random_matrix(25, 5, gen), true));
  const auto y = dir.file("y.csv", csv(testutil::random_matrix(20, 5, gen), false));

  const auto a = run({"test", "--x", x, "--y", y, "--B", "80", "--seed", "3"});
  REQUIRE(a.code == 0);
  const auto report = Json::parse(a.out);
  CHECK_NOTHROW(cli::validate_test_report(report));
  CHECK(report["config"]["side"] == "two-sample");
  CHECK(report["per_p"].size() == 6);
  CHECK(report["per_p"][5]["p"] == "inf");
  CHECK(report["runtime_ms"].is_null());

  const auto b = run({"test", "--x", x, "--y", y, "--B", "80", "--seed", "3", "--threads", "3"});
  CHECK(a.out == b.out);

  const auto out_path = dir.path("r.json");
  CHECK(run({"test", "--x", x, "--y", y, "--B", "80", "--seed", "3", "--out", out_path}).code == 0);
  CHECK(slurp(out_path) == a.out);

  const auto same = Json::parse(run({"test", "--x", x, "--y", x, "--B", "50"}).out);
  for (const auto& v : same["stat_vector"]) CHECK(v.get<double>() == 0.0);
  CHECK(same["adaptive"]["p_value"] == 1.0);
  CHECK(same["adaptive"]["reject"] == false);

  const auto timed = Json::parse(run({"test", "--x", x, "--B", "20", "--timing"}).out);
  CHECK(timed["runtime_ms"].is_number());
}

TEST_CASE("test command: one-sample null vector and kernels") {
  TempDir dir;
  std::mt19937_64 gen(62);
  const Eigen::MatrixXd data = testutil::random_matrix(30, 3, gen);
  const auto x = dir.file("x.csv", csv(data, true));
  const auto u0 = dir.file("u0.csv", csv(data.colwise().mean(), false));
  const auto r = Json::parse(run({"test", "--x", x, "--null", u0, "--B", "30"}).out);
  for (const auto& v : r["stat_vector"]) CHECK(std::abs(v.get<double>()) < 1e-12);
  CHECK(r["config"]["side"] == "one-sample");

  const auto tau = Json::parse(run({"test", "--x", x, "--kernel", "tau", "--B", "30"}).out);
  CHECK(tau["config"]["q"] == 3);
  CHECK(tau["config"]["index_map"] == "offdiag");
  const auto cov = Json::parse(run({"test", "--x", x, "--kernel", "cov", "--pairs", "anchor", "--anchor", "2", "--B", "30"}).out);
  CHECK(cov["config"]["q"] == 2);

  const auto dl = Json::parse(run({"test", "--x", x, "--method", "doubleloop", "--B", "20", "--L", "10"}).out);
  CHECK(dl["adaptive"]["method"] == "doubleloop");
  CHECK(dl["adaptive"]["multiplier_draws"] == 30 * (20 + 20 * 10));
}

TEST_CASE("exit codes") {
  TempDir dir;
  std::mt19937_64 gen(63);
  const auto x = dir.file("x.csv", csv(testutil::random_matrix(10, 3, gen), false));
  const auto y4 = dir.file("y4.csv", csv(testutil::random_matrix(10, 4, gen), false));
  Eigen::MatrixXd constant = testutil::random_matrix(10, 3, gen);
  constant.col(1).setConstant(2.0);
  const auto c = dir.file("c.csv", csv(constant, false));
  const auto nan = dir.file("nan.csv", "1,2\nnan,3\n");

  CHECK(run({}).code == 1);
  CHECK(run({"test"}).code == 1);
  CHECK(run({"test", "--x", x, "--kernel", "bogus"}).code == 1);
  CHECK(run({"test", "--x", dir.path("missing.csv")}).code == 1);
  CHECK(run({"test", "--x", nan}).code == 1);
  CHECK(run({"test", "--x", x, "--y", y4}).code == 1);
  CHECK(run({"test", "--x", x, "--p", "0.5"}).code == 1);

  const auto degenerate = run({"test", "--x", c, "--B", "20"});
  CHECK(degenerate.code == 2);
  CHECK(degenerate.err.find("no-normalize") != std::string::npos);
  CHECK(run({"test", "--x", c, "--B", "20", "--no-normalize"}).code == 0);

  CHECK(run({"test", "--x", x, "--method", "doubleloop", "--B", "100", "--L", "100", "--max-draws", "10"}).code == 1);

  const auto wide = dir.file("w.csv", csv(testutil::random_matrix(4, 9, gen), false));
  const auto t2 = run({"t2", "--x", wide, "--y", wide});
  CHECK(t2.code == 2);
  CHECK(t2.err.find("'-'") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("t2 command") {
  TempDir dir;
  const auto x = dir.file("x.csv", "0\n2\n");
  const auto y = dir.file("y.csv", "1\n3\n");
  const auto r = run({"t2", "--x", x, "--y", y});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["statistic"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("simulate command") {
  TempDir dir;
  const auto out = dir.path("s.json");
  const auto table = dir.path("s.txt");
  const auto r = run({"simulate", "--model", "2", "--d", "8", "--n1", "20", "--n2", "20", "--reps", "1", "--B", "30",
                      "--out", out, "--table", table});
  REQUIRE(r.code == 0);
  const auto report = Json::parse(slurp(out));
  CHECK_NOTHROW(cli::validate_study_report(report));
  CHECK(slurp(table).find("T_ad") != std::string::npos);

  // The config echo round-trips.
  const auto cfg = cli::study_config_from_json(report["config"]);
  CHECK(cli::study_config_json(cfg) == report["config"]);
  const auto again = dir.path("again.json");
  CHECK(run({"simulate", "--config", out, "--out", again}).code == 0);
  CHECK(slurp(again) == slurp(out));

  const auto alt = Json::parse(run({"simulate", "--d", "8", "--reps", "2", "--B", "30", "--hypothesis", "alternative",
                                    "--signal", "dense", "--s", "8"})
                                   .out);
  CHECK(alt["config"]["shift"]["u2"].get<double>() == doctest::Approx(0.3));
  CHECK(run({"simulate", "--hypothesis", "alternative", "--reps", "1"}).code == 1);
  CHECK(run({"simulate", "--model", "5", "--reps", "1"}).code == 1);
  CHECK(run({"simulate", "--reps", "100", "--B", "2000", "--L", "2000", "--method", "doubleloop"}).code == 1);
}
