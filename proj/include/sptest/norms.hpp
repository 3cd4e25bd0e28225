#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sptest {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exponent of an Lp-type norm: a real p >= 1 or infinity.
class NormOrder {
 public:
  static NormOrder finite(double p);
  static NormOrder infinity() noexcept;
  /// Accepts a decimal number >= 1 or "inf" (case-insensitive).
  static NormOrder parse(std::string_view text);

  bool is_infinite() const noexcept;
  /// +infinity for the max-norm.
  double value() const noexcept { return value_; }
  /// "inf" or the shortest round-trip decimal of p.
  std::string to_string() const;

  auto operator<=>(const NormOrder&) const = default;

 private:
  explicit NormOrder(double value) noexcept : value_(value) {}
  double value_;
};

/// Parses a comma separated list such as "1,2,3,4,5,inf".
std::vector<NormOrder> parse_norm_orders(std::string_view list);

/// Sorted copy with duplicates removed.
std::vector<NormOrder> unique_orders(std::vector<NormOrder> orders);

/// {1, 2, 3, 4, 5, inf}.
std::vector<NormOrder> default_norm_orders();

struct SpNormConfig {
  int s0 = 1;
  NormOrder p = NormOrder::infinity();

  /// Throws Configuration when s0 < 1.
  void validate() const;
};

/// Lp norm of the min(s0, q) largest magnitudes of v.
double sp_norm(std::span<const double> v, const SpNormConfig& cfg);

/// Row-wise sp_norm of a B x q matrix.
Eigen::VectorXd sp_norm_batch(const RowMatrix& rows, const SpNormConfig& cfg);

/// Row-wise sp_norm for several exponents sharing one s0. The largest
/// magnitudes are selected once per row; result[i][b] is the norm of row b
/// with exponent orders[i].
std::vector<Eigen::VectorXd> sp_norm_rows(const RowMatrix& rows, int s0,
                                          std::span<const NormOrder> orders);

}  // namespace sptest
