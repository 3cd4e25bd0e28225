#include "sptest/hotelling.hpp"

#include <algorithm>
#include <string>

#include <boost/math/distributions/fisher_f.hpp>

#include "sptest/error.hpp"

namespace sptest {

double hotelling_t2(const Sample& x, const Sample& y) {
  if (x.d() != y.d()) throw Error(ErrorKind::Configuration, "samples have different dimensions");
  const int n1 = x.n();
  const int n2 = y.n();
  const int d = x.d();
  if (n1 < 1 || n2 < 1 || d >= n1 + n2 - 2) {
    throw Error(ErrorKind::NotApplicable, "Hotelling T^2 requires d < n1 + n2 - 2 (d = " +
                                              std::to_string(d) + ", n1 + n2 = " + std::to_string(n1 + n2) + ")");
  }
  const Eigen::RowVectorXd xbar = x.data().colwise().mean();
  const Eigen::RowVectorXd ybar = y.data().colwise().mean();
  const Eigen::MatrixXd xc = x.data().rowwise() - xbar;
  const Eigen::MatrixXd yc = y.data().rowwise() - ybar;
  const Eigen::MatrixXd pooled =
      (xc.transpose() * xc + yc.transpose() * yc) / static_cast<double>(n1 + n2 - 2);

  const Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  const Eigen::VectorXd diff = (xbar - ybar).transpose();
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotApplicable, "pooled covariance is singular");
  }
  const Eigen::VectorXd solved = llt.solve(diff);
  // LLT succeeds on nearly singular input; check conditioning through the factor.
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
    throw Error(ErrorKind::NotApplicable, "pooled covariance is singular");
  }
  return (static_cast<double>(n1) * n2 / (n1 + n2)) * diff.dot(solved);
}

HotellingResult hotelling_test(const Sample& x, const Sample& y) {
  HotellingResult out;
  out.statistic = hotelling_t2(x, y);
  const int n = x.n() + y.n();
  const int d = x.d();
  out.df1 = d;
  out.df2 = n - d - 1;
  const double f = std::max(out.statistic, 0.0) * (n - d - 1) / (static_cast<double>(d) * (n - 2));
  const boost::math::fisher_f dist(out.df1, out.df2);
  out.p_value = boost::math::cdf(boost::math::complement(dist, f));
  return out;
}

}  // namespace sptest
