#include "cli/report.hpp"

#include <string>

#include "sptest/error.hpp"

namespace sptest::cli {

namespace {

Json orders_json(const std::vector<NormOrder>& orders) {
  Json arr = Json::array();
  for (const auto& p : orders) arr.push_back(p.to_string());
  return arr;
}

Json rate_json(const RejectionRate& r) {
  return Json{{"rejections", r.rejections}, {"rate", r.rate()}, {"se", r.standard_error()}};
}

KernelFamily kernel_from_string(const std::string& s) {
  if (s == "mean") return KernelFamily::Mean;
  if (s == "cov") return KernelFamily::Covariance;
  if (s == "tau") return KernelFamily::KendallTau;
  throw Error(ErrorKind::Configuration, "unknown kernel '" + s + "'");
}

void require(const Json& j, const char* key, Json::value_t type, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::InvalidInput, where + ": missing field '" + key + "'");
  }
  const auto& v = j.at(key);
  const bool ok = type == Json::value_t::number_float ? v.is_number()
                  : type == Json::value_t::number_unsigned ? v.is_number_integer()
                                                            : v.type() == type;
  if (!ok) throw Error(ErrorKind::InvalidInput, where + ": field '" + key + "' has the wrong type");
}

void require_rate(const Json& j, const std::string& where) {
  require(j, "rejections", Json::value_t::number_unsigned, where);
  require(j, "rate", Json::value_t::number_float, where);
  require(j, "se", Json::value_t::number_float, where);
}

}  // namespace

Json test_report_json(const AdaptiveReport& report, const Json& config, std::uint64_t seed,
                      std::optional<double> runtime_ms) {
  Json per_p = Json::array();
  for (const auto& r : report.per_p) {
    per_p.push_back(Json{{"p", r.p.to_string()},
                         {"s0", r.s0},
                         {"statistic", r.statistic},
                         {"critical_value", r.critical_value},
                         {"p_value", r.p_value},
                         {"reject", r.reject},
                         {"reject_by_p_value", r.reject_by_pvalue},
                         {"rules_disagree", r.rules_disagree()}});
  }
  Json stat_vector = Json::array();
  for (double v : report.stat_vector.values) stat_vector.push_back(v);

  Json out;
  out["config"] = config;
  out["per_p"] = std::move(per_p);
  out["adaptive"] = Json{{"statistic", report.statistic},
                         {"p_value", report.p_value},
                         {"reject", report.reject},
                         {"method", to_string(report.method)},
                         {"multiplier_draws", report.multiplier_draws}};
  out["stat_vector"] = std::move(stat_vector);
  out["seed"] = seed;
  out["runtime_ms"] = runtime_ms ? Json(*runtime_ms) : Json(nullptr);
  return out;
}

Json study_config_json(const StudyConfig& cfg) {
  Json model{{"id", cfg.model.model_id}, {"d", cfg.model.d}};
  if (cfg.model.model_id == 3) model["stiefel_rank"] = cfg.model.effective_stiefel_rank();
  if (cfg.model.model_id >= 4) model["nu"] = cfg.model.nu;
  Json shift = nullptr;
  if (cfg.model.shift) shift = Json{{"s", cfg.model.shift->s}, {"u1", cfg.model.shift->u1}, {"u2", cfg.model.shift->u2}};

  Json s0 = Json::array();
  for (int v : cfg.s0_list) s0.push_back(v);

  return Json{{"model", std::move(model)},
              {"hypothesis", cfg.null_hypothesis ? "null" : "alternative"},
              {"shift", std::move(shift)},
              {"n1", cfg.n1},
              {"n2", cfg.one_sample() ? Json(nullptr) : Json(cfg.n2)},
              {"replications", cfg.replications},
              {"B", cfg.B},
              {"L", cfg.L},
              {"s0", std::move(s0)},
              {"p_set", orders_json(unique_orders(cfg.p_set))},
              {"alpha", cfg.alpha},
              {"kernel", to_string(cfg.kernel)},
              {"index_map", describe_index_map(cfg)},
              {"normalize", cfg.normalize},
              {"method", to_string(cfg.method)},
              {"seed", cfg.seed},
              {"include_t2", cfg.include_t2},
              {"multipliers", "one ensemble per replication shared by all (s0, p)"}};
}

StudyConfig study_config_from_json(const Json& j) {
  StudyConfig cfg;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.model.model_id = m.value("id", cfg.model.model_id);
    cfg.model.d = m.value("d", cfg.model.d);
    cfg.model.stiefel_rank = m.value("stiefel_rank", cfg.model.stiefel_rank);
    cfg.model.nu = m.value("nu", cfg.model.nu);
  }
  cfg.null_hypothesis = j.value("hypothesis", std::string("null")) == "null";
  if (j.contains("shift") && !j.at("shift").is_null()) {
    const auto& s = j.at("shift");
    cfg.model.shift = ShiftSpec{s.at("s").get<int>(), s.at("u1").get<double>(), s.at("u2").get<double>()};
  }
  cfg.n1 = j.value("n1", cfg.n1);
  if (j.contains("n2") && !j.at("n2").is_null()) cfg.n2 = j.at("n2").get<int>();
  cfg.replications = j.value("replications", cfg.replications);
  cfg.B = j.value("B", cfg.B);
  cfg.L = j.value("L", cfg.L);
  if (j.contains("s0")) cfg.s0_list = j.at("s0").get<std::vector<int>>();
  if (j.contains("p_set")) {
    cfg.p_set.clear();
    for (const auto& p : j.at("p_set")) {
      cfg.p_set.push_back(p.is_string() ? NormOrder::parse(p.get<std::string>()) : NormOrder::finite(p.get<double>()));
    }
  }
  cfg.alpha = j.value("alpha", cfg.alpha);
  if (j.contains("kernel")) cfg.kernel = kernel_from_string(j.at("kernel").get<std::string>());
  cfg.normalize = j.value("normalize", cfg.normalize);
  if (j.contains("method")) cfg.method = parse_adaptive_method(j.at("method").get<std::string>());
  cfg.seed = j.value("seed", cfg.seed);
  cfg.include_t2 = j.value("include_t2", cfg.include_t2);
  return cfg;
}

Json study_result_json(const StudyResult& result, bool with_timing) {
  Json rows = Json::array();
  for (const auto& row : result.rows) {
    Json cells = Json::array();
    for (const auto& cell : row.per_p) {
      const Json rate = rate_json(cell.rate);
      Json c{{"p", cell.p.to_string()}};
      c.update(rate);
      cells.push_back(std::move(c));
    }
    rows.push_back(Json{{"s0", row.s0}, {"per_p", std::move(cells)}, {"adaptive", rate_json(row.adaptive)}});
  }
  Json out;
  out["config"] = study_config_json(result.config);
  out["q"] = result.q;
  out["rows"] = std::move(rows);
  out["t2"] = result.t2 ? rate_json(*result.t2) : Json(nullptr);
  out["runtime_ms"] = with_timing ? Json(result.wall_ms) : Json(nullptr);
  return out;
}

void validate_test_report(const Json& j) {
  const std::string where = "test report";
  require(j, "config", Json::value_t::object, where);
  require(j, "per_p", Json::value_t::array, where);
  require(j, "adaptive", Json::value_t::object, where);
  require(j, "stat_vector", Json::value_t::array, where);
  require(j, "seed", Json::value_t::number_unsigned, where);
  if (!j.contains("runtime_ms") || !(j.at("runtime_ms").is_null() || j.at("runtime_ms").is_number())) {
    throw Error(ErrorKind::InvalidInput, where + ": field 'runtime_ms' must be null or a number");
  }
  for (const auto& r : j.at("per_p")) {
    require(r, "p", Json::value_t::string, where + ".per_p");
    require(r, "s0", Json::value_t::number_unsigned, where + ".per_p");
    require(r, "statistic", Json::value_t::number_float, where + ".per_p");
    require(r, "critical_value", Json::value_t::number_float, where + ".per_p");
    require(r, "p_value", Json::value_t::number_float, where + ".per_p");
    require(r, "reject", Json::value_t::boolean, where + ".per_p");
  }
  const auto& a = j.at("adaptive");
  require(a, "statistic", Json::value_t::number_float, where + ".adaptive");
  require(a, "p_value", Json::value_t::number_float, where + ".adaptive");
  require(a, "reject", Json::value_t::boolean, where + ".adaptive");
  require(a, "method", Json::value_t::string, where + ".adaptive");
}

void validate_study_report(const Json& j) {
  const std::string where = "study report";
  require(j, "config", Json::value_t::object, where);
  require(j, "q", Json::value_t::number_unsigned, where);
  require(j, "rows", Json::value_t::array, where);
  for (const auto& row : j.at("rows")) {
    require(row, "s0", Json::value_t::number_unsigned, where + ".rows");
    require(row, "per_p", Json::value_t::array, where + ".rows");
    require(row, "adaptive", Json::value_t::object, where + ".rows");
    require_rate(row.at("adaptive"), where + ".rows.adaptive");
    for (const auto& c : row.at("per_p")) {
      require(c, "p", Json::value_t::string, where + ".rows.per_p");
      require_rate(c, where + ".rows.per_p");
    }
  }
  if (!j.contains("t2")) throw Error(ErrorKind::InvalidInput, where + ": missing field 't2'");
  if (!j.contains("runtime_ms")) throw Error(ErrorKind::InvalidInput, where + ": missing field 'runtime_ms'");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace sptest::cli
