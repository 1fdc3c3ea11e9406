#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mlab/kernel.hpp"

namespace mlab {

/// Empirical Mercer eigensystem of the integral operator K_nu for a discrete
/// probability measure nu = sum_j w_j delta_{z_j}.
///
/// Only components with Lambda_i >= kRankTolerance * Lambda_1 are retained.
/// psi() is (components x support), L^2(nu)-orthonormal.
class SpectralBasis {
 public:
  SpectralBasis(KernelSpec kernel, DiscreteMeasure nu, std::vector<double> eigenvalues, Eigen::MatrixXd psi,
                std::size_t dropped);

  const KernelSpec& kernel() const { return kernel_; }
  const DiscreteMeasure& base_measure() const { return nu_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& psi() const { return psi_; }
  std::size_t rank() const { return eigenvalues_.size(); }
  /// Number of eigenvalues removed by truncation.
  std::size_t dropped() const { return dropped_; }

 private:
  KernelSpec kernel_;
  DiscreteMeasure nu_;
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd psi_;
  std::size_t dropped_ = 0;
};

SpectralBasis mercer_decompose(const KernelSpec& k, const DiscreteMeasure& nu);

/// psi_i(z) = (1/Lambda_i) sum_j w_j k(z, z_j) psi_i(z_j) for the first `count`
/// components (all retained components when count is omitted).
std::vector<double> nystrom_extend(const SpectralBasis& b, std::span<const double> z);
std::vector<double> nystrom_extend(const SpectralBasis& b, std::span<const double> z, std::size_t count);

/// Extension for every point of `points` at once: (rank x points.size()).
Eigen::MatrixXd nystrom_extend_all(const SpectralBasis& b, const PointSet& points);

/// Largest i (1-based) with n * Lambda_i >= 1, or 0.
std::size_t effective_index(std::span<const double> eigenvalues, double n);

/// sum_{i > start} Lambda_i, with `start` counted 1-based like effective_index.
double tail_sum(std::span<const double> eigenvalues, std::size_t start);

/// c_i = int psi_i d rho for every retained component.
Eigen::VectorXd project_measure(const SpectralBasis& b, const DiscreteMeasure& rho);

/// sum_i (1/Lambda_i) <g, psi_i>^2_{L^2(nu)} for an expansion, using g evaluated on the support.
double mercer_norm_sq(const SpectralBasis& b, const RkhsExpansion& g);

}  // namespace mlab
