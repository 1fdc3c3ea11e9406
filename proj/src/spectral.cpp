#include "mlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlab/constants.hpp"
#include "mlab/errors.hpp"

namespace mlab {

SpectralBasis::SpectralBasis(KernelSpec kernel, DiscreteMeasure nu, std::vector<double> eigenvalues,
                             Eigen::MatrixXd psi, std::size_t dropped)
    : kernel_(std::move(kernel)),
      nu_(std::move(nu)),
      eigenvalues_(std::move(eigenvalues)),
      psi_(std::move(psi)),
      dropped_(dropped) {
  if (static_cast<std::size_t>(psi_.rows()) != eigenvalues_.size() ||
      static_cast<std::size_t>(psi_.cols()) != nu_.size()) {
    throw InvalidArgument("spectral basis shape does not match eigenvalues and support");
  }
  for (std::size_t i = 1; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_[i] > eigenvalues_[i - 1]) throw InvalidArgument("eigenvalues must be descending");
  }
}

SpectralBasis mercer_decompose(const KernelSpec& k, const DiscreteMeasure& nu) {
  if (!nu.is_probability()) throw InvalidArgument("mercer_decompose needs a probability measure");
  const auto m = static_cast<Eigen::Index>(nu.size());
  Eigen::VectorXd sqrt_w(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double w = nu.weights()[static_cast<std::size_t>(j)];
    if (!(w > 0.0)) throw InvalidArgument("mercer_decompose needs strictly positive weights");
    sqrt_w(j) = std::sqrt(w);
  }
  const Eigen::MatrixXd g = k.gram(nu.points());
  if (!g.allFinite()) throw InvalidArgument("Gram matrix has non-finite entries");

  Eigen::MatrixXd a = sqrt_w.asDiagonal() * g * sqrt_w.asDiagonal();
  a = (a + a.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) throw ConvergenceError("eigensolver failed in mercer_decompose");

  // Eigen returns ascending order.
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double top = std::max(vals(m - 1), 0.0);
  std::vector<double> kept;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    double v = vals(i);
    if (v < 0.0) {
      if (v < -kNegativeClamp) {
        throw ConsistencyError("kernel operator has eigenvalue " + std::to_string(v) + " below round-off");
      }
      v = 0.0;
    }
    if (top > 0.0 && v >= kRankTolerance * top) {
      kept.push_back(v);
      cols.push_back(i);
    }
  }
  Eigen::MatrixXd psi(static_cast<Eigen::Index>(kept.size()), m);
  for (std::size_t r = 0; r < cols.size(); ++r) {
    psi.row(static_cast<Eigen::Index>(r)) = eig.eigenvectors().col(cols[r]).cwiseQuotient(sqrt_w).transpose();
  }
  const std::size_t dropped = static_cast<std::size_t>(m) - kept.size();
  return SpectralBasis(k, nu, std::move(kept), std::move(psi), dropped);
}

Eigen::MatrixXd nystrom_extend_all(const SpectralBasis& b, const PointSet& points) {
  const DiscreteMeasure& nu = b.base_measure();
  const Eigen::MatrixXd kx = b.kernel().cross(nu.points(), points);  // support x points
  const Eigen::Map<const Eigen::VectorXd> w(nu.weights().data(), static_cast<Eigen::Index>(nu.size()));
  Eigen::MatrixXd out = b.psi() * w.asDiagonal() * kx;
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) /= b.eigenvalues()[static_cast<std::size_t>(i)];
  return out;
}

std::vector<double> nystrom_extend(const SpectralBasis& b, std::span<const double> z, std::size_t count) {
  if (count > b.rank()) {
    throw InvalidArgument("component " + std::to_string(count) + " is below the truncation threshold (rank " +
                          std::to_string(b.rank()) + ")");
  }
  PointSet ps(z.size());
  ps.push_back(z);
  const Eigen::MatrixXd all = nystrom_extend_all(b, ps);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = all(static_cast<Eigen::Index>(i), 0);
  return out;
}

std::vector<double> nystrom_extend(const SpectralBasis& b, std::span<const double> z) {
  return nystrom_extend(b, z, b.rank());
}

std::size_t effective_index(std::span<const double> eigenvalues, double n) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (n * eigenvalues[i] >= 1.0) idx = i + 1;
  }
  return idx;
}

double tail_sum(std::span<const double> eigenvalues, std::size_t start) {
  double s = 0.0;
  // Small values last-to-first for a slightly more accurate sum.
  for (std::size_t i = eigenvalues.size(); i > start; --i) s += eigenvalues[i - 1];
  return s;
}

Eigen::VectorXd project_measure(const SpectralBasis& b, const DiscreteMeasure& rho) {
  const Eigen::MatrixXd ext = nystrom_extend_all(b, rho.points());
  const Eigen::Map<const Eigen::VectorXd> w(rho.weights().data(), static_cast<Eigen::Index>(rho.size()));
  return ext * w;
}

double mercer_norm_sq(const SpectralBasis& b, const RkhsExpansion& g) {
  const DiscreteMeasure& nu = b.base_measure();
  const std::vector<double> vals = g.evaluate(nu.points());
  Eigen::VectorXd gw(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t j = 0; j < vals.size(); ++j) gw(static_cast<Eigen::Index>(j)) = vals[j] * nu.weights()[j];
  const Eigen::VectorXd inner = b.psi() * gw;
  double s = 0.0;
  for (Eigen::Index i = 0; i < inner.size(); ++i) s += inner(i) * inner(i) / b.eigenvalues()[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace mlab
