#include "sptest/norms.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "sptest/error.hpp"

namespace sptest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Small integer exponents are common; repeated multiplication beats pow.
inline double power(double x, double p, int int_p) {
  if (int_p > 0) {
    double r = x;
    for (int i = 1; i < int_p; ++i) r *= x;
    return r;
  }
  return std::pow(x, p);
}

inline int small_integer_exponent(double p) {
  if (p <= 8.0 && p == std::floor(p)) return static_cast<int>(p);
  return 0;
}

// Norm of a set of nonnegative magnitudes, in max-factored form.
double norm_of_magnitudes(std::span<const double> mags, NormOrder order) {
  if (mags.empty()) return 0.0;
  const double top = *std::max_element(mags.begin(), mags.end());
  if (order.is_infinite() || top == 0.0) return top;
  const double p = order.value();
  if (p == 1.0) {
    double sum = 0.0;
    for (double a : mags) sum += a;
    return sum;
  }
  const int int_p = small_integer_exponent(p);
  double sum = 0.0;
  for (double a : mags) sum += power(a / top, p, int_p);
  return top * (p == 2.0 ? std::sqrt(sum) : std::pow(sum, 1.0 / p));
}

// Fills scratch with |v| and moves the k largest to the front.
std::span<const double> largest_magnitudes(std::span<const double> v, int s0,
                                           std::vector<double>& scratch) {
  scratch.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorKind::InvalidInput, "sp_norm: non-finite coordinate " + std::to_string(i));
    }
    scratch[i] = std::abs(v[i]);
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(s0), v.size());
  if (k < scratch.size()) {
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                     scratch.end(), std::greater<>());
  }
  return {scratch.data(), k};
}

}  // namespace

NormOrder NormOrder::finite(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::Configuration, "norm order must be a real >= 1 or inf");
  }
  return NormOrder(p);
}

NormOrder NormOrder::infinity() noexcept { return NormOrder(kInf); }

NormOrder NormOrder::parse(std::string_view text) {
  text = trim(text);
  if (iequals(text, "inf") || iequals(text, "infinity")) return infinity();
  double p = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Configuration, "cannot parse norm order '" + std::string(text) + "'");
  }
  return finite(p);
}

bool NormOrder::is_infinite() const noexcept { return std::isinf(value_); }

std::string NormOrder::to_string() const {
  if (is_infinite()) return "inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value_);
  return std::string(buf, ptr);
}

std::vector<NormOrder> parse_norm_orders(std::string_view list) {
  std::vector<NormOrder> out;
  while (true) {
    const auto comma = list.find(',');
    out.push_back(NormOrder::parse(list.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<NormOrder> unique_orders(std::vector<NormOrder> orders) {
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  return orders;
}

std::vector<NormOrder> default_norm_orders() {
  return {NormOrder::finite(1), NormOrder::finite(2), NormOrder::finite(3),
          NormOrder::finite(4), NormOrder::finite(5), NormOrder::infinity()};
}

void SpNormConfig::validate() const {
  if (s0 < 1) throw Error(ErrorKind::Configuration, "s0 must be a positive integer");
}

double sp_norm(std::span<const double> v, const SpNormConfig& cfg) {
  cfg.validate();
  std::vector<double> scratch;
  return norm_of_magnitudes(largest_magnitudes(v, cfg.s0, scratch), cfg.p);
}

Eigen::VectorXd sp_norm_batch(const RowMatrix& rows, const SpNormConfig& cfg) {
  const NormOrder orders[] = {cfg.p};
  return sp_norm_rows(rows, cfg.s0, orders).front();
}

std::vector<Eigen::VectorXd> sp_norm_rows(const RowMatrix& rows, int s0,
                                          std::span<const NormOrder> orders) {
  SpNormConfig{s0, NormOrder::infinity()}.validate();
  const auto B = rows.rows();
  std::vector<Eigen::VectorXd> out(orders.size(), Eigen::VectorXd(B));
  std::vector<double> scratch;
  for (Eigen::Index b = 0; b < B; ++b) {
    const std::span<const double> row(rows.row(b).data(), static_cast<std::size_t>(rows.cols()));
    const auto top = largest_magnitudes(row, s0, scratch);
    for (std::size_t i = 0; i < orders.size(); ++i) out[i][b] = norm_of_magnitudes(top, orders[i]);
  }
  return out;
}

}  // namespace sptest
