#include "cli/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "sptest/error.hpp"

namespace sptest::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

bool parse_number(std::string_view field, double& value) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

Eigen::MatrixXd parse_csv_matrix(std::string_view text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool first_content = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size() && numeric; ++j) numeric = parse_number(fields[j], values[j]);
    if (first_content) {
      first_content = false;
      if (!numeric) continue;  // header
    }
    const auto where = source + ":" + std::to_string(line_no);
    if (!numeric) throw Error(ErrorKind::InvalidInput, where + ": non-numeric field");
    for (double v : values)
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, where + ": missing or non-finite value");
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorKind::InvalidInput, where + ": expected " + std::to_string(rows.front().size()) +
                                               " fields, found " + std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorKind::InvalidInput, source + ": no data rows");

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_matrix(buf.str(), path);
}

Eigen::VectorXd read_csv_vector(const std::string& path) {
  const Eigen::MatrixXd m = read_csv_matrix(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw Error(ErrorKind::InvalidInput, path + ": expected a single row or column");
  }
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace sptest::cli
