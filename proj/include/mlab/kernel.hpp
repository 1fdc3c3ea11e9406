#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlab/points.hpp"

namespace mlab {

enum class KernelKind { gaussian, laplacian, fourier_spectrum, gram_table };

const char* kernel_kind_name(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

/// A positive-definite kernel on fixed-length coordinate tuples.
///
///   gaussian          exp(-||z - z'||^2 / (2 b^2)) on R^input_dim
///   laplacian         exp(-||z - z'|| / b) on R^input_dim
///   fourier_spectrum  sum_i L_i psi_i(t) psi_i(t') on the circle, one angle
///                     coordinate t, with the real Fourier basis
///                     psi_1 = 1, psi_2j = sqrt2 cos(j t), psi_2j+1 = sqrt2 sin(j t)
///   gram_table        explicit symmetric PSD table; a point is [index]
///
/// Copies are cheap: spectrum and table are shared.
class KernelSpec {
 public:
  /// Placeholder; every factory below yields a usable kernel.
  KernelSpec() = default;
  static KernelSpec gaussian(double bandwidth, std::size_t input_dim);
  static KernelSpec laplacian(double bandwidth, std::size_t input_dim);
  static KernelSpec fourier_spectrum(std::vector<double> spectrum);
  static KernelSpec gram_table(Eigen::MatrixXd table);

  KernelKind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<double>& spectrum() const;
  const Eigen::MatrixXd& table() const;

  /// sup_z k(z,z). Exact for all kinds except fourier_spectrum, where it is the
  /// bound L_1 + 2 sum_j max(L_2j, L_2j+1).
  double sup_diagonal() const { return sup_diagonal_; }
  bool normalized() const;
  /// Constant B with sup|f| <= B ||f||_k, i.e. sqrt(sup_z k(z,z)).
  double sup_norm_constant() const;

  void check_point(std::span<const double> z) const;
  double operator()(std::span<const double> z, std::span<const double> zp) const;

  /// out[j] = k(query, points[first + j]).
  void row(std::span<const double> query, const PointSet& points, std::size_t first,
           std::span<double> out) const;

  Eigen::MatrixXd gram(const PointSet& points) const;
  Eigen::MatrixXd cross(const PointSet& a, const PointSet& b) const;

  /// Basis value psi_i(t) of the fourier_spectrum kernel, i >= 1.
  static double fourier_basis(std::size_t i, double angle);

 private:
  void check_points(const PointSet& points) const;
  Eigen::MatrixXd fourier_features(const PointSet& points) const;

  KernelKind kind_ = KernelKind::gaussian;
  double bandwidth_ = 1.0;
  std::size_t input_dim_ = 0;
  double sup_diagonal_ = 1.0;
  std::shared_ptr<const std::vector<double>> spectrum_;
  std::shared_ptr<const Eigen::MatrixXd> table_;
};

/// Weighted point set. Probability measures have nonnegative weights summing
/// to one; signed measures are only accepted by operations that say so.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  static DiscreteMeasure probability(PointSet points, std::vector<double> weights);
  static DiscreteMeasure uniform(PointSet points);
  static DiscreteMeasure dirac(std::span<const double> point);
  static DiscreteMeasure signed_measure(PointSet points, std::vector<double> weights);

  const PointSet& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_probability() const { return is_probability_; }
  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return points_.dim(); }
  double total_mass() const;

  /// Difference a - b as a signed measure on the concatenated supports.
  static DiscreteMeasure difference(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  DiscreteMeasure(PointSet points, std::vector<double> weights, bool is_probability);

  PointSet points_;
  std::vector<double> weights_;
  bool is_probability_ = false;
};

/// f = sum_j c_j k(., z_j).
class RkhsExpansion {
 public:
  RkhsExpansion() = default;
  RkhsExpansion(KernelSpec kernel, PointSet centers, std::vector<double> coefficients);
  static RkhsExpansion zero(KernelSpec kernel, std::size_t dim);

  const KernelSpec& kernel() const { return kernel_; }
  const PointSet& centers() const { return centers_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  std::size_t size() const { return coefficients_.size(); }

  double operator()(std::span<const double> z) const;
  std::vector<double> evaluate(const PointSet& points) const;
  /// c^T K c, not clamped.
  double norm_sq_raw() const;

  RkhsExpansion scaled(double factor) const;

 private:
  KernelSpec kernel_;
  PointSet centers_;
  std::vector<double> coefficients_;
};

double eval_kernel(const KernelSpec& k, std::span<const double> z, std::span<const double> zp);
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const PointSet& points);
double rkhs_norm(const RkhsExpansion& f);
/// <f, g>_k for expansions over the same kernel.
double rkhs_inner(const RkhsExpansion& f, const RkhsExpansion& g);

/// Integral int int k d(a-b) d(a-b); signed measures allowed. Negative round-off
/// of magnitude <= 1e-10 is clamped to zero, larger negatives raise ConsistencyError.
double mmd_sq(const KernelSpec& k, const DiscreteMeasure& a, const DiscreteMeasure& b);
double mmd(const KernelSpec& k, const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Clamp a quantity that is nonnegative in exact arithmetic.
double clamp_roundoff(double value, const char* what);

}  // namespace mlab
