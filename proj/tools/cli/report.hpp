#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sptest/adaptive.hpp"
#include "sptest/study.hpp"

namespace sptest::cli {

using Json = nlohmann::ordered_json;

/// Test report: {config, per_p, adaptive, stat_vector, seed, runtime_ms}.
/// runtime_ms is null unless a time is supplied, so reports are byte-stable.
Json test_report_json(const AdaptiveReport& report, const Json& config, std::uint64_t seed,
                      std::optional<double> runtime_ms);

Json study_config_json(const StudyConfig& cfg);
/// Inverse of study_config_json; missing keys keep their defaults.
StudyConfig study_config_from_json(const Json& j);

Json study_result_json(const StudyResult& result, bool with_timing);

/// Throws InvalidInput naming the first missing or mistyped field.
void validate_test_report(const Json& j);
void validate_study_report(const Json& j);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace sptest::cli
