#include "sptest/ustat.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <string>

#include "sptest/error.hpp"

namespace sptest {

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline double sign_of(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

void eval_pairs_from_difference(const KernelSpec& kernel, const double* diff, double* out) {
  const auto& pairs = kernel.pairs();
  const std::size_t q = pairs.size();
  if (kernel.family() == KernelFamily::Covariance) {
    for (std::size_t s = 0; s < q; ++s) out[s] = 0.5 * diff[pairs[s].first] * diff[pairs[s].second];
  } else {
    for (std::size_t s = 0; s < q; ++s)
      out[s] = sign_of(diff[pairs[s].first] * diff[pairs[s].second]);
  }
}

void eval_into(const KernelSpec& kernel, std::span<const std::span<const double>> obs,
               std::span<double> out, std::vector<double>& diff) {
  switch (kernel.family()) {
    case KernelFamily::Mean: {
      const auto& coords = kernel.coordinates();
      for (std::size_t s = 0; s < coords.size(); ++s) out[s] = obs[0][static_cast<std::size_t>(coords[s])];
      return;
    }
    case KernelFamily::Covariance:
    case KernelFamily::KendallTau: {
      diff.resize(obs[0].size());
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = obs[0][j] - obs[1][j];
      eval_pairs_from_difference(kernel, diff.data(), out.data());
      return;
    }
    case KernelFamily::Custom:
      kernel.custom_kernel()(obs, out);
      return;
  }
}

void warn_high_order(int m) {
  static std::once_flag flag;
  std::call_once(flag, [m] {
    std::cerr << "warning: kernel order " << m
              << " enumerates every subset; cost grows as n^" << m << '\n';
  });
}

}  // namespace

Sample::Sample(Eigen::MatrixXd data) : data_(std::move(data)) {
  if (!data_.allFinite()) throw Error(ErrorKind::InvalidInput, "sample contains non-finite values");
}

const char* to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::Mean: return "mean";
    case KernelFamily::Covariance: return "cov";
    case KernelFamily::KendallTau: return "tau";
    case KernelFamily::Custom: return "custom";
  }
  return "unknown";
}

std::vector<CoordinatePair> upper_triangle_pairs(int d, bool include_diagonal) {
  std::vector<CoordinatePair> out;
  for (int j = 0; j < d; ++j)
    for (int l = include_diagonal ? j : j + 1; l < d; ++l) out.push_back({j, l});
  return out;
}

std::vector<CoordinatePair> anchor_pairs(int anchor, int d) {
  std::vector<CoordinatePair> out;
  for (int j = 0; j < d; ++j)
    if (j != anchor) out.push_back({anchor, j});
  return out;
}

KernelSpec KernelSpec::mean(int d) {
  std::vector<int> coords(static_cast<std::size_t>(std::max(d, 0)));
  std::iota(coords.begin(), coords.end(), 0);
  return mean(std::move(coords));
}

KernelSpec KernelSpec::mean(std::vector<int> coordinates) {
  if (coordinates.empty()) throw Error(ErrorKind::Configuration, "kernel needs at least one output");
  for (int c : coordinates)
    if (c < 0) throw Error(ErrorKind::Configuration, "negative coordinate in index map");
  KernelSpec k;
  k.family_ = KernelFamily::Mean;
  k.order_ = 1;
  k.output_dim_ = static_cast<int>(coordinates.size());
  k.coordinates_ = std::move(coordinates);
  return k;
}

namespace {

void validate_pairs(const std::vector<CoordinatePair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::Configuration, "kernel needs at least one output");
  for (const auto& p : pairs)
    if (p.first < 0 || p.second < 0)
      throw Error(ErrorKind::Configuration, "negative coordinate in index map");
}

}  // namespace

KernelSpec KernelSpec::covariance(std::vector<CoordinatePair> pairs) {
  validate_pairs(pairs);
  KernelSpec k;
  k.family_ = KernelFamily::Covariance;
  k.order_ = 2;
  k.output_dim_ = static_cast<int>(pairs.size());
  k.pairs_ = std::move(pairs);
  return k;
}

KernelSpec KernelSpec::kendall_tau(std::vector<CoordinatePair> pairs) {
  KernelSpec k = covariance(std::move(pairs));
  k.family_ = KernelFamily::KendallTau;
  return k;
}

KernelSpec KernelSpec::custom(int order, int output_dim, CustomKernel kernel) {
  if (order < 1 || output_dim < 1 || !kernel) {
    throw Error(ErrorKind::Configuration, "custom kernel needs order >= 1, q >= 1 and an evaluator");
  }
  KernelSpec k;
  k.family_ = KernelFamily::Custom;
  k.order_ = order;
  k.output_dim_ = output_dim;
  k.custom_ = std::move(kernel);
  return k;
}

int KernelSpec::required_width() const noexcept {
  int width = 0;
  for (int c : coordinates_) width = std::max(width, c + 1);
  for (const auto& p : pairs_) width = std::max({width, p.first + 1, p.second + 1});
  return width;
}

void KernelSpec::check_width(int d) const {
  if (required_width() > d) {
    throw Error(ErrorKind::Configuration,
                "kernel index map addresses coordinate " + std::to_string(required_width() - 1) +
                    " but observations have dimension " + std::to_string(d));
  }
}

Eigen::VectorXd eval_kernel(const KernelSpec& kernel, std::span<const std::span<const double>> obs) {
  if (static_cast<int>(obs.size()) != kernel.order()) {
    throw Error(ErrorKind::Configuration, "kernel of order " + std::to_string(kernel.order()) +
                                              " given " + std::to_string(obs.size()) + " observations");
  }
  for (const auto& row : obs) {
    if (row.size() != obs[0].size()) throw Error(ErrorKind::Configuration, "observation widths differ");
  }
  kernel.check_width(static_cast<int>(obs[0].size()));
  Eigen::VectorXd out(kernel.output_dim());
  std::vector<double> diff;
  eval_into(kernel, obs, {out.data(), static_cast<std::size_t>(out.size())}, diff);
  return out;
}

UStatSummary compute_ustat(const Sample& sample, const KernelSpec& kernel) {
  const int n = sample.n();
  const int m = kernel.order();
  const int q = kernel.output_dim();
  if (n < m) {
    throw Error(ErrorKind::InsufficientSample, "kernel of order " + std::to_string(m) + " needs n >= " +
                                                   std::to_string(m) + ", got n = " + std::to_string(n));
  }
  kernel.check_width(sample.d());
  if (m > 3) warn_high_order(m);

  const RowMatrixXd x = sample.data();
  const std::size_t d = static_cast<std::size_t>(sample.d());
  auto row = [&](int k) { return std::span<const double>(x.row(k).data(), d); };

  RowMatrixXd proj_sum = RowMatrixXd::Zero(n, q);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd phi(q);
  std::span<double> phi_span(phi.data(), static_cast<std::size_t>(q));
  std::vector<double> diff(d);

  if (kernel.family() == KernelFamily::Covariance || kernel.family() == KernelFamily::KendallTau) {
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        for (std::size_t j = 0; j < d; ++j) diff[j] = x(i, static_cast<Eigen::Index>(j)) - x(k, static_cast<Eigen::Index>(j));
        eval_pairs_from_difference(kernel, diff.data(), phi.data());
        proj_sum.row(i) += phi.transpose();
        proj_sum.row(k) += phi.transpose();
        total += phi;
      }
    }
  } else {
    // Generic enumeration of increasing index tuples.
    std::vector<int> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::span<const double>> rows(static_cast<std::size_t>(m));
    while (true) {
      for (int t = 0; t < m; ++t) rows[static_cast<std::size_t>(t)] = row(idx[static_cast<std::size_t>(t)]);
      eval_into(kernel, rows, phi_span, diff);
      for (int t = 0; t < m; ++t) proj_sum.row(idx[static_cast<std::size_t>(t)]) += phi.transpose();
      total += phi;

      int t = m - 1;
      while (t >= 0 && idx[static_cast<std::size_t>(t)] == n - m + t) --t;
      if (t < 0) break;
      ++idx[static_cast<std::size_t>(t)];
      for (int u = t + 1; u < m; ++u) idx[static_cast<std::size_t>(u)] = idx[static_cast<std::size_t>(u - 1)] + 1;
    }
  }

  UStatSummary out;
  out.n = n;
  out.m = m;
  out.uhat = total / binomial(n, m);
  out.q_proj = proj_sum / binomial(n - 1, m - 1);
  const Eigen::MatrixXd centered = out.q_proj.rowwise() - out.uhat.transpose();
  out.vhat = (static_cast<double>(m) * m / n) * centered.colwise().squaredNorm().transpose();
  return out;
}

namespace {

Eigen::VectorXd checked_sqrt(const Eigen::VectorXd& var) {
  std::vector<int> bad;
  for (Eigen::Index s = 0; s < var.size(); ++s)
    if (!(var[s] > kVarianceFloor)) bad.push_back(static_cast<int>(s));
  if (!bad.empty()) throw DegenerateVarianceError(std::move(bad));
  return var.cwiseSqrt();
}

}  // namespace

Eigen::VectorXd standard_errors(const UStatSummary& summary) {
  return checked_sqrt(summary.vhat / summary.n);
}

Eigen::VectorXd standard_errors(const UStatSummary& first, const UStatSummary& second) {
  if (first.q() != second.q()) {
    throw Error(ErrorKind::Configuration, "samples have different parameter dimensions " +
                                              std::to_string(first.q()) + " and " + std::to_string(second.q()));
  }
  return checked_sqrt(first.vhat / first.n + second.vhat / second.n);
}

StatVector standardize_one_sample(const UStatSummary& summary, const Eigen::VectorXd& u0,
                                  bool normalize) {
  if (u0.size() != summary.q()) {
    throw Error(ErrorKind::Configuration, "null value has length " + std::to_string(u0.size()) +
                                              ", expected " + std::to_string(summary.q()));
  }
  StatVector out{summary.uhat - u0, normalize, TestSide::OneSample};
  if (normalize) out.values = out.values.cwiseQuotient(standard_errors(summary));
  return out;
}

StatVector standardize_two_sample(const UStatSummary& first, const UStatSummary& second,
                                  bool normalize) {
  if (first.q() != second.q()) {
    throw Error(ErrorKind::Configuration, "samples have different parameter dimensions " +
                                              std::to_string(first.q()) + " and " + std::to_string(second.q()));
  }
  StatVector out{first.uhat - second.uhat, normalize, TestSide::TwoSample};
  if (normalize) out.values = out.values.cwiseQuotient(standard_errors(first, second));
  return out;
}

}  // namespace sptest
