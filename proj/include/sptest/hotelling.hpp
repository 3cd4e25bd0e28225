#pragma once

#include "sptest/ustat.hpp"

namespace sptest {

struct HotellingResult {
  double statistic = 0.0;
  /// Upper tail of the exact F reference under Gaussian data.
  double p_value = 1.0;
  int df1 = 0;
  int df2 = 0;
};

/// Two-sample Hotelling T^2 with pooled covariance. Requires
/// d < n1 + n2 - 2 and an invertible pooled covariance; throws
/// NotApplicable otherwise.
double hotelling_t2(const Sample& x, const Sample& y);

/// Statistic plus the F(d, n1 + n2 - d - 1) reference P-value.
HotellingResult hotelling_test(const Sample& x, const Sample& y);

}  // namespace sptest
