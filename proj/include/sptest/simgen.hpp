#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace sptest {

/// Sparse shift: exactly s coordinates drawn uniformly without replacement,
/// each U(u1, u2).
struct ShiftSpec {
  int s = 0;
  double u1 = 0.0;
  double u2 = 0.0;
};

/// Simulation designs.
///  1: Gaussian, block-diagonal covariance (blocks of 5, off-diagonal 0.5,
///     diagonal U(1, 2)).
///  2: Gaussian, banded covariance rho^|i-j|.
///  3: Gaussian, correlation from a tridiagonal matrix plus a Haar rank-k
///     perturbation, rescaled by a U(1, 2) diagonal.
///  4: multivariate t(nu) with the model 1 scale matrix.
///  5: (Z, X) in R^{d+1}: t(nu) with Z marginally associated with X through
///     the shift vector.
struct ModelSpec {
  int model_id = 1;
  int d = 10;
  int block_size = 5;
  double block_corr = 0.5;
  double band_rho = 0.4;
  /// Stiefel rank for model 3; 0 selects floor(d / 5) (at least 1).
  int stiefel_rank = 0;
  double nu = 5.0;
  /// Present under the alternative.
  std::optional<ShiftSpec> shift;

  int effective_stiefel_rank() const noexcept;
  /// Throws Configuration on invalid combinations.
  void validate() const;
};

/// d x d covariance (models 1-4) or the model 1 scale matrix for model 5.
Eigen::MatrixXd build_covariance(const ModelSpec& spec, std::uint64_t seed);

/// Haar-distributed d x k matrix with orthonormal columns.
Eigen::MatrixXd sample_stiefel(int d, int k, std::uint64_t seed);

/// n rows of mu + A z with A the lower Cholesky factor of sigma.
Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, int n,
                           std::uint64_t seed);

/// n rows of mu + Z / sqrt(W / nu) with Z ~ N(0, sigma), W ~ chi^2(nu).
Eigen::MatrixXd sample_mvt(double nu, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, int n,
                           std::uint64_t seed);

Eigen::VectorXd gen_alternative_shift(int d, int s, double u1, double u2, std::uint64_t seed);

/// Model 5 scale matrix, already shifted by delta * I under the alternative.
struct Model5Scale {
  Eigen::MatrixXd scale;
  /// 0 under the null, |lambda_min| + 0.5 under the alternative.
  double delta = 0.0;
};

/// [1, v^T; v, C] with C the correlation matrix of sigma_star. With
/// `shift_diagonal` the result is moved by (|lambda_min| + 0.5) * I.
Model5Scale model5_scale(const Eigen::MatrixXd& sigma_star, const Eigen::VectorXd& v, bool shift_diagonal);

/// n rows of (Z, X^T) for model 5.
Eigen::MatrixXd gen_model5(const ModelSpec& spec, int n, bool null_hypothesis, std::uint64_t seed);

/// Two samples for models 1-4: group 1 has mean 0, group 2 mean V under the
/// alternative and 0 under the null.
struct TwoSampleData {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  Eigen::VectorXd shift;
};

TwoSampleData gen_two_sample(const ModelSpec& spec, int n1, int n2, bool null_hypothesis,
                             std::uint64_t seed);

}  // namespace sptest
