#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sptest::cli {

/// Numeric CSV: rows are observations, columns variables. A first row with
/// any non-numeric field is taken as a header and skipped. Blank lines are
/// ignored; NaN, infinities and ragged rows are errors.
Eigen::MatrixXd parse_csv_matrix(std::string_view text, const std::string& source);

/// Throws Io when the file cannot be read.
Eigen::MatrixXd read_csv_matrix(const std::string& path);

/// A single CSV row or column read as a vector.
Eigen::VectorXd read_csv_vector(const std::string& path);

}  // namespace sptest::cli
