#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sptest {

/// n x d observations, one row per subject. Entries are finite.
class Sample {
 public:
  Sample() = default;
  /// Throws InvalidInput on non-finite entries.
  explicit Sample(Eigen::MatrixXd data);

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  int n() const noexcept { return static_cast<int>(data_.rows()); }
  int d() const noexcept { return static_cast<int>(data_.cols()); }

 private:
  Eigen::MatrixXd data_;
};

enum class KernelFamily { Mean, Covariance, KendallTau, Custom };

const char* to_string(KernelFamily family) noexcept;

/// Zero-based coordinate pair (j, l) selecting a matrix entry.
struct CoordinatePair {
  int first = 0;
  int second = 0;
  bool operator==(const CoordinatePair&) const = default;
};

/// Pairs (j, l) with j <= l (or j < l without the diagonal), row-major.
std::vector<CoordinatePair> upper_triangle_pairs(int d, bool include_diagonal);

/// Pairs (anchor, j) for every j != anchor: the marginal association of one
/// variable with each of the others.
std::vector<CoordinatePair> anchor_pairs(int anchor, int d);

/// Evaluates a kernel on m observation rows, writing q outputs. Must be
/// symmetric in its arguments; no symmetrization is applied.
using CustomKernel =
    std::function<void(std::span<const std::span<const double>> obs, std::span<double> out)>;

/// A symmetric kernel of order m mapping m observations to a q-vector.
class KernelSpec {
 public:
  /// Phi_s(x) = x_s for all d coordinates.
  static KernelSpec mean(int d);
  static KernelSpec mean(std::vector<int> coordinates);
  /// Phi_s(x, y) = (x_j - y_j)(x_l - y_l) / 2, unbiased for sigma_jl.
  static KernelSpec covariance(std::vector<CoordinatePair> pairs);
  /// Phi_s(x, y) = sign((x_j - y_j)(x_l - y_l)).
  static KernelSpec kendall_tau(std::vector<CoordinatePair> pairs);
  static KernelSpec custom(int order, int output_dim, CustomKernel kernel);

  KernelFamily family() const noexcept { return family_; }
  int order() const noexcept { return order_; }
  int output_dim() const noexcept { return output_dim_; }
  const std::vector<int>& coordinates() const noexcept { return coordinates_; }
  const std::vector<CoordinatePair>& pairs() const noexcept { return pairs_; }

  /// Smallest observation width the index map can address.
  int required_width() const noexcept;

  /// Throws Configuration when observations of width d cannot be addressed.
  void check_width(int d) const;

  const CustomKernel& custom_kernel() const noexcept { return custom_; }

 private:
  KernelSpec() = default;

  KernelFamily family_ = KernelFamily::Mean;
  int order_ = 1;
  int output_dim_ = 0;
  std::vector<int> coordinates_;
  std::vector<CoordinatePair> pairs_;
  CustomKernel custom_;
};

/// Kernel evaluated at one tuple of m observations.
Eigen::VectorXd eval_kernel(const KernelSpec& kernel, std::span<const std::span<const double>> obs);

/// U-statistic vector, Hoeffding projections and jackknife variances of a
/// single sample.
struct UStatSummary {
  Eigen::VectorXd uhat;    // q
  Eigen::MatrixXd q_proj;  // n x q; row k averages the kernel over subsets containing k
  Eigen::VectorXd vhat;    // q; variance estimate of sqrt(n) * uhat
  int n = 0;
  int m = 0;

  int q() const noexcept { return static_cast<int>(uhat.size()); }
};

/// Exhaustive U-statistic over all C(n, m) subsets. O(C(n, m) * q).
UStatSummary compute_ustat(const Sample& sample, const KernelSpec& kernel);

enum class TestSide { OneSample, TwoSample };

struct StatVector {
  Eigen::VectorXd values;
  bool normalized = true;
  TestSide side = TestSide::OneSample;
};

/// Lower bound on the variance of each centered coordinate (v/n) below
/// which normalized statistics are refused.
inline constexpr double kVarianceFloor = 1e-12;

/// Standard errors sqrt(vhat/n); throws DegenerateVarianceError when any
/// vhat/n is at or below kVarianceFloor.
Eigen::VectorXd standard_errors(const UStatSummary& summary);
Eigen::VectorXd standard_errors(const UStatSummary& first, const UStatSummary& second);

StatVector standardize_one_sample(const UStatSummary& summary, const Eigen::VectorXd& u0,
                                  bool normalize);
StatVector standardize_two_sample(const UStatSummary& first, const UStatSummary& second,
                                  bool normalize);

}  // namespace sptest
