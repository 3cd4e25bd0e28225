#include "sptest/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sptest/error.hpp"
#include "sptest/rng.hpp"

namespace sptest {

namespace {

// Sub-stream tags for one generator call.
enum : std::uint64_t {
  kTagDiagonal = 1,
  kTagStiefel = 2,
  kTagShift = 3,
  kTagFirst = 4,
  kTagSecond = 5,
  kTagCovariance = 6,
  kTagGaussian = 7,
  kTagChiSquare = 8,
};

Eigen::MatrixXd standard_normal(int rows, int cols, std::uint64_t key) {
  CounterRng rng(key);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = normal(rng);
  return z;
}

Eigen::VectorXd uniform_vector(int size, double lo, double hi, std::uint64_t key) {
  CounterRng rng(key);
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = unif(rng);
  return v;
}

Eigen::MatrixXd lower_cholesky(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw Error(ErrorKind::Configuration, "covariance must be square");
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "covariance matrix failed Cholesky factorization");
  }
  return llt.matrixL();
}

Eigen::MatrixXd block_covariance(const ModelSpec& spec, std::uint64_t seed) {
  const int d = spec.d;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  // Trailing coordinates past the last full block form a smaller block.
  for (int start = 0; start < d; start += spec.block_size) {
    const int end = std::min(d, start + spec.block_size);
    for (int i = start; i < end; ++i)
      for (int j = start; j < end; ++j)
        if (i != j) sigma(i, j) = spec.block_corr;
  }
  sigma.diagonal() = uniform_vector(d, 1.0, 2.0, derive_key(seed, {kTagDiagonal}));
  return sigma;
}

Eigen::MatrixXd banded_covariance(const ModelSpec& spec) {
  const int d = spec.d;
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sigma(i, j) = std::pow(spec.band_rho, std::abs(i - j));
  return sigma;
}

Eigen::MatrixXd low_rank_covariance(const ModelSpec& spec, std::uint64_t seed) {
  const int d = spec.d;
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) f(i, i + 1) = f(i + 1, i) = 0.5;
  const Eigen::MatrixXd u = sample_stiefel(d, spec.effective_stiefel_rank(), derive_key(seed, {kTagStiefel}));
  const Eigen::MatrixXd g = f + u * u.transpose();
  const Eigen::VectorXd inv_sd = g.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd r = inv_sd.asDiagonal() * g * inv_sd.asDiagonal();
  r.diagonal().setOnes();
  const Eigen::VectorXd sd = uniform_vector(d, 1.0, 2.0, derive_key(seed, {kTagDiagonal})).cwiseSqrt();
  return sd.asDiagonal() * r * sd.asDiagonal();
}

}  // namespace

int ModelSpec::effective_stiefel_rank() const noexcept {
  return stiefel_rank > 0 ? stiefel_rank : std::max(1, d / 5);
}

void ModelSpec::validate() const {
  if (model_id < 1 || model_id > 5) throw Error(ErrorKind::Configuration, "model must be 1-5");
  if (d < 1) throw Error(ErrorKind::Configuration, "dimension must be positive");
  if (block_size < 1) throw Error(ErrorKind::Configuration, "block size must be positive");
  if (model_id == 3 && effective_stiefel_rank() > d) {
    throw Error(ErrorKind::Configuration, "Stiefel rank exceeds dimension");
  }
  if ((model_id == 4 || model_id == 5) && !(nu > 2.0)) {
    throw Error(ErrorKind::Configuration, "degrees of freedom must exceed 2");
  }
  if (shift) {
    if (shift->s < 0 || shift->s > d) throw Error(ErrorKind::Configuration, "shift support must lie in [0, d]");
    if (!(shift->u1 <= shift->u2)) throw Error(ErrorKind::Configuration, "shift needs u1 <= u2");
  }
}

Eigen::MatrixXd build_covariance(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Eigen::MatrixXd sigma;
  switch (spec.model_id) {
    case 2: sigma = banded_covariance(spec); break;
    case 3: sigma = low_rank_covariance(spec, seed); break;
    default: sigma = block_covariance(spec, seed); break;
  }
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  lower_cholesky(sigma);
  return sigma;
}

Eigen::MatrixXd sample_stiefel(int d, int k, std::uint64_t seed) {
  if (k < 1 || k > d) throw Error(ErrorKind::Configuration, "Stiefel sampling needs 1 <= k <= d");
  const Eigen::MatrixXd g = standard_normal(d, k, seed);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  // Fixing sign(diag R) > 0 makes the factorization unique and the law Haar.
  const auto& r = qr.matrixQR();
  for (int j = 0; j < k; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, int n,
                           std::uint64_t seed) {
  if (mu.size() != sigma.rows()) throw Error(ErrorKind::Configuration, "mean and covariance sizes differ");
  if (n < 0) throw Error(ErrorKind::Configuration, "sample size must be nonnegative");
  const Eigen::MatrixXd lower = lower_cholesky(sigma);
  Eigen::MatrixXd x = standard_normal(n, static_cast<int>(mu.size()), seed) * lower.transpose();
  x.rowwise() += mu.transpose();
  return x;
}

Eigen::MatrixXd sample_mvt(double nu, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, int n,
                           std::uint64_t seed) {
  if (!(nu > 0.0)) throw Error(ErrorKind::Configuration, "degrees of freedom must be positive");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(mu.size());
  Eigen::MatrixXd x = sample_mvn(zero, sigma, n, derive_key(seed, {kTagGaussian}));
  CounterRng rng(derive_key(seed, {kTagChiSquare}));
  std::chi_squared_distribution<double> chi2(nu);
  for (int i = 0; i < n; ++i) x.row(i) /= std::sqrt(chi2(rng) / nu);
  x.rowwise() += mu.transpose();
  return x;
}

Eigen::VectorXd gen_alternative_shift(int d, int s, double u1, double u2, std::uint64_t seed) {
  if (s < 0 || s > d) throw Error(ErrorKind::Configuration, "shift support must lie in [0, d]");
  if (!(u1 <= u2)) throw Error(ErrorKind::Configuration, "shift needs u1 <= u2");
  CounterRng rng(seed);
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  for (int i = 0; i < s; ++i) {
    std::uniform_int_distribution<int> pick(i, d - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  std::uniform_real_distribution<double> unif(u1, u2);
  for (int i = 0; i < s; ++i) v[idx[static_cast<std::size_t>(i)]] = u1 == u2 ? u1 : unif(rng);
  return v;
}

Model5Scale model5_scale(const Eigen::MatrixXd& sigma_star, const Eigen::VectorXd& v, bool shift_diagonal) {
  const auto d = sigma_star.rows();
  if (v.size() != d) throw Error(ErrorKind::Configuration, "shift length must match the dimension");
  const Eigen::VectorXd inv_sd = sigma_star.diagonal().cwiseSqrt().cwiseInverse();
  Model5Scale out;
  out.scale.resize(d + 1, d + 1);
  out.scale(0, 0) = 1.0;
  out.scale.block(1, 0, d, 1) = v;
  out.scale.block(0, 1, 1, d) = v.transpose();
  out.scale.block(1, 1, d, d) = inv_sd.asDiagonal() * sigma_star * inv_sd.asDiagonal();
  if (shift_diagonal) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.scale, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "eigenvalue solver failed");
    out.delta = std::abs(eig.eigenvalues().minCoeff()) + 0.5;
    out.scale.diagonal().array() += out.delta;
  }
  return out;
}

Eigen::MatrixXd gen_model5(const ModelSpec& spec, int n, bool null_hypothesis, std::uint64_t seed) {
  spec.validate();
  if (spec.model_id != 5) throw Error(ErrorKind::Configuration, "gen_model5 needs model 5");
  ModelSpec block = spec;
  block.model_id = 1;
  const Eigen::MatrixXd sigma_star = build_covariance(block, derive_key(seed, {kTagCovariance}));
  Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.d);
  if (!null_hypothesis) {
    if (!spec.shift) throw Error(ErrorKind::Configuration, "alternative needs a shift specification");
    v = gen_alternative_shift(spec.d, spec.shift->s, spec.shift->u1, spec.shift->u2,
                              derive_key(seed, {kTagShift}));
  }
  const auto scale = model5_scale(sigma_star, v, !null_hypothesis);
  return sample_mvt(spec.nu, Eigen::VectorXd::Zero(spec.d + 1), scale.scale, n, derive_key(seed, {kTagFirst}));
}

TwoSampleData gen_two_sample(const ModelSpec& spec, int n1, int n2, bool null_hypothesis,
                             std::uint64_t seed) {
  spec.validate();
  if (spec.model_id == 5) throw Error(ErrorKind::Configuration, "model 5 is a one-sample design");
  const Eigen::MatrixXd sigma = build_covariance(spec, derive_key(seed, {kTagCovariance}));
  TwoSampleData out;
  out.shift = Eigen::VectorXd::Zero(spec.d);
  if (!null_hypothesis) {
    if (!spec.shift) throw Error(ErrorKind::Configuration, "alternative needs a shift specification");
    out.shift = gen_alternative_shift(spec.d, spec.shift->s, spec.shift->u1, spec.shift->u2,
                                      derive_key(seed, {kTagShift}));
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.d);
  if (spec.model_id == 4) {
    out.x = sample_mvt(spec.nu, zero, sigma, n1, derive_key(seed, {kTagFirst}));
    out.y = sample_mvt(spec.nu, out.shift, sigma, n2, derive_key(seed, {kTagSecond}));
  } else {
    out.x = sample_mvn(zero, sigma, n1, derive_key(seed, {kTagFirst}));
    out.y = sample_mvn(out.shift, sigma, n2, derive_key(seed, {kTagSecond}));
  }
  return out;
}

}  // namespace sptest
