#include <doctest.h>

#include "sptest/error.hpp"
#include "sptest/study.hpp"

using namespace sptest;

namespace {

StudyConfig small_config() {
  StudyConfig cfg;
  cfg.model.d = 12;
  cfg.n1 = 30;
  cfg.n2 = 25;
  cfg.replications = 12;
  cfg.B = 60;
  cfg.s0_list = {2, 12};
  return cfg;
}

}  // namespace

TEST_CASE("rejection rates") {
  const RejectionRate r{25, 100};
  CHECK(r.rate() == 0.25);
  CHECK(r.standard_error() == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
}

TEST_CASE("study layout and rates") {
  const auto result = run_study(small_config());
  CHECK(result.q == 12);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.rows[1].s0 == 12);
  for (const auto& row : result.rows) {
    CHECK(row.per_p.size() == 6);
    for (const auto& cell : row.per_p) {
      CHECK(cell.rate.replications == 12);
      CHECK(cell.rate.rate() >= 0.0);
      CHECK(cell.rate.rate() <= 1.0);
    }
  }
  REQUIRE(result.t2.has_value());
  CHECK(result.t2->replications == 12);
  const std::string table = format_study_table(result);
  CHECK(table.find("T_ad") != std::string::npos);
  CHECK(table.find("p=inf") != std::string::npos);
}

TEST_CASE("studies do not depend on the thread count") {
  auto cfg = small_config();
  const auto one = run_study(cfg);
  cfg.threads = 4;
  const auto four = run_study(cfg);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].adaptive.rejections == four.rows[i].adaptive.rejections);
    for (std::size_t k = 0; k < one.rows[i].per_p.size(); ++k)
      CHECK(one.rows[i].per_p[k].rate.rejections == four.rows[i].per_p[k].rate.rejections);
  }
}

TEST_CASE("kernels and index maps") {
  StudyConfig cfg;
  cfg.model.model_id = 5;
  cfg.model.d = 6;
  cfg.kernel = KernelFamily::KendallTau;
  const auto k = study_kernel(cfg);
  CHECK(k.output_dim() == 6);
  CHECK(k.pairs().front() == CoordinatePair{0, 1});
  CHECK(cfg.one_sample());

  cfg.model.model_id = 1;
  cfg.kernel = KernelFamily::Covariance;
  CHECK(study_kernel(cfg).output_dim() == 21);
  cfg.kernel = KernelFamily::KendallTau;
  CHECK(study_kernel(cfg).output_dim() == 15);
}

TEST_CASE("configuration guards") {
  auto cfg = small_config();
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.method = AdaptiveMethod::DoubleLoop;
  cfg.L = 1000;
  cfg.B = 1000;
  cfg.replications = 1000;
  try {
    cfg.validate();
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Budget);
  }
  cfg = small_config();
  cfg.null_hypothesis = false;
  CHECK_THROWS_AS(run_study(cfg), Error);
}

TEST_CASE("model 5 study runs one-sample tests") {
  StudyConfig cfg;
  cfg.model.model_id = 5;
  cfg.model.d = 8;
  cfg.kernel = KernelFamily::Covariance;
  cfg.n1 = 40;
  cfg.replications = 3;
  cfg.B = 40;
  const auto result = run_study(cfg);
  CHECK(result.q == 8);
  CHECK_FALSE(result.t2.has_value());
}
