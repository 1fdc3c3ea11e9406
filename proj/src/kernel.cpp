#include "mlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mlab/constants.hpp"
#include "mlab/errors.hpp"
#include "mlab/simd/kernel_rows.hpp"

namespace mlab {

const char* kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian:
      return "gaussian";
    case KernelKind::laplacian:
      return "laplacian";
    case KernelKind::fourier_spectrum:
      return "fourier_spectrum";
    case KernelKind::gram_table:
      return "gram_table";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "laplacian") return KernelKind::laplacian;
  if (name == "fourier_spectrum") return KernelKind::fourier_spectrum;
  if (name == "gram_table") return KernelKind::gram_table;
  throw InvalidArgument("unknown kernel kind '" + name + "'");
}

double clamp_roundoff(double value, const char* what) {
  if (value >= 0.0) return value;
  if (value >= -kNegativeClamp) return 0.0;
  throw ConsistencyError(std::string(what) + " is negative beyond round-off: " + std::to_string(value));
}

// ---------------------------------------------------------------------------
// KernelSpec

KernelSpec KernelSpec::gaussian(double bandwidth, std::size_t input_dim) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InvalidArgument("gaussian bandwidth must be positive");
  if (input_dim == 0) throw InvalidArgument("kernel input dimension must be positive");
  KernelSpec k;
  k.kind_ = KernelKind::gaussian;
  k.bandwidth_ = bandwidth;
  k.input_dim_ = input_dim;
  k.sup_diagonal_ = 1.0;
  return k;
}

KernelSpec KernelSpec::laplacian(double bandwidth, std::size_t input_dim) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InvalidArgument("laplacian bandwidth must be positive");
  if (input_dim == 0) throw InvalidArgument("kernel input dimension must be positive");
  KernelSpec k;
  k.kind_ = KernelKind::laplacian;
  k.bandwidth_ = bandwidth;
  k.input_dim_ = input_dim;
  k.sup_diagonal_ = 1.0;
  return k;
}

KernelSpec KernelSpec::fourier_spectrum(std::vector<double> spectrum) {
  if (spectrum.empty()) throw InvalidArgument("fourier_spectrum needs at least one eigenvalue");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (!(spectrum[i] >= 0.0) || !std::isfinite(spectrum[i])) {
      throw InvalidArgument("fourier_spectrum eigenvalues must be finite and nonnegative");
    }
    if (i > 0 && spectrum[i] > spectrum[i - 1]) {
      throw InvalidArgument("fourier_spectrum eigenvalues must be nonincreasing");
    }
  }
  KernelSpec k;
  k.kind_ = KernelKind::fourier_spectrum;
  k.input_dim_ = 1;
  double sup = spectrum[0];
  for (std::size_t i = 1; i < spectrum.size(); i += 2) {
    const double cos_term = spectrum[i];
    const double sin_term = i + 1 < spectrum.size() ? spectrum[i + 1] : 0.0;
    sup += 2.0 * std::max(cos_term, sin_term);
  }
  k.sup_diagonal_ = sup;
  k.spectrum_ = std::make_shared<const std::vector<double>>(std::move(spectrum));
  return k;
}

KernelSpec KernelSpec::gram_table(Eigen::MatrixXd table) {
  if (table.rows() == 0 || table.rows() != table.cols()) throw InvalidArgument("gram_table must be square and nonempty");
  if (!table.allFinite()) throw InvalidArgument("gram_table has non-finite entries");
  const double scale = std::max(1.0, table.cwiseAbs().maxCoeff());
  if ((table - table.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("gram_table must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(table, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-8 * std::max(top, 0.0) - 1e-14) {
    throw InvalidArgument("gram_table is not positive semi-definite");
  }
  KernelSpec k;
  k.kind_ = KernelKind::gram_table;
  k.input_dim_ = 1;
  k.sup_diagonal_ = table.diagonal().maxCoeff();
  k.table_ = std::make_shared<const Eigen::MatrixXd>(std::move(table));
  return k;
}

const std::vector<double>& KernelSpec::spectrum() const {
  static const std::vector<double> empty;
  return spectrum_ ? *spectrum_ : empty;
}

const Eigen::MatrixXd& KernelSpec::table() const {
  static const Eigen::MatrixXd empty;
  return table_ ? *table_ : empty;
}

bool KernelSpec::normalized() const { return sup_diagonal_ <= 1.0 + 1e-12; }

double KernelSpec::sup_norm_constant() const { return std::sqrt(sup_diagonal_); }

double KernelSpec::fourier_basis(std::size_t i, double angle) {
  if (i == 0) throw InvalidArgument("fourier basis index starts at 1");
  if (i == 1) return 1.0;
  const double freq = static_cast<double>(i / 2);
  return (i % 2 == 0) ? std::sqrt(2.0) * std::cos(freq * angle) : std::sqrt(2.0) * std::sin(freq * angle);
}

void KernelSpec::check_point(std::span<const double> z) const {
  if (z.size() != input_dim_) {
    throw DomainError(std::string(kernel_kind_name(kind_)) + " kernel expects points of dimension " +
                      std::to_string(input_dim_) + ", got " + std::to_string(z.size()));
  }
  for (double v : z) {
    if (!std::isfinite(v)) throw DomainError("kernel argument has non-finite coordinate");
  }
  if (kind_ == KernelKind::gram_table) {
    const double idx = z[0];
    if (idx != std::floor(idx) || idx < 0 || idx >= static_cast<double>(table_->rows())) {
      throw DomainError("gram_table index " + std::to_string(idx) + " out of range");
    }
  }
}

void KernelSpec::check_points(const PointSet& points) const {
  if (points.dim() != input_dim_) {
    throw DomainError(std::string(kernel_kind_name(kind_)) + " kernel expects points of dimension " +
                      std::to_string(input_dim_) + ", got " + std::to_string(points.dim()));
  }
  Point p(points.dim());
  for (std::size_t j = 0; j < points.size(); ++j) {
    points.copy_point(j, p);
    check_point(p);
  }
}

double KernelSpec::operator()(std::span<const double> z, std::span<const double> zp) const {
  check_point(z);
  check_point(zp);
  switch (kind_) {
    case KernelKind::gaussian:
    case KernelKind::laplacian: {
      double d2 = 0.0;
      for (std::size_t d = 0; d < z.size(); ++d) {
        const double diff = zp[d] - z[d];  // same operand order as the row kernels
        d2 += diff * diff;
      }
      return kind_ == KernelKind::gaussian ? std::exp(-(1.0 / (2.0 * bandwidth_ * bandwidth_)) * d2)
                                           : std::exp(-(1.0 / bandwidth_) * std::sqrt(d2));
    }
    case KernelKind::fourier_spectrum: {
      const auto& spec = *spectrum_;
      double sum = spec[0];
      for (std::size_t i = 2; i <= spec.size(); ++i) {
        sum += spec[i - 1] * fourier_basis(i, z[0]) * fourier_basis(i, zp[0]);
      }
      return sum;
    }
    case KernelKind::gram_table:
      return (*table_)(static_cast<Eigen::Index>(z[0]), static_cast<Eigen::Index>(zp[0]));
  }
  return 0.0;
}

void KernelSpec::row(std::span<const double> query, const PointSet& points, std::size_t first,
                     std::span<double> out) const {
  check_point(query);
  if (points.dim() != input_dim_) throw DomainError("point set dimension does not match kernel");
  switch (kind_) {
    case KernelKind::gaussian:
      simd::gaussian_row(query, points, first, 1.0 / (2.0 * bandwidth_ * bandwidth_), out);
      return;
    case KernelKind::laplacian:
      simd::laplacian_row(query, points, first, 1.0 / bandwidth_, out);
      return;
    case KernelKind::fourier_spectrum:
    case KernelKind::gram_table: {
      Point p(input_dim_);
      for (std::size_t j = 0; j < out.size(); ++j) {
        points.copy_point(first + j, p);
        out[j] = (*this)(query, p);
      }
      return;
    }
  }
}

Eigen::MatrixXd KernelSpec::fourier_features(const PointSet& points) const {
  const auto& spec = *spectrum_;
  Eigen::MatrixXd phi(spec.size(), points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double t = points.coord(j, 0);
    for (std::size_t i = 1; i <= spec.size(); ++i) phi(i - 1, j) = std::sqrt(spec[i - 1]) * fourier_basis(i, t);
  }
  return phi;
}

Eigen::MatrixXd KernelSpec::gram(const PointSet& points) const {
  check_points(points);
  const auto m = static_cast<Eigen::Index>(points.size());
  if (kind_ == KernelKind::fourier_spectrum) {
    const Eigen::MatrixXd phi = fourier_features(points);
    Eigen::MatrixXd g = phi.transpose() * phi;
    return (g + g.transpose()) * 0.5;
  }
  Eigen::MatrixXd g(m, m);
  std::vector<double> buf(points.size());
  Point q(points.dim());
  for (Eigen::Index i = 0; i < m; ++i) {
    points.copy_point(static_cast<std::size_t>(i), q);
    std::span<double> out(buf.data(), static_cast<std::size_t>(m - i));
    row(q, points, static_cast<std::size_t>(i), out);
    for (Eigen::Index j = i; j < m; ++j) {
      g(i, j) = out[static_cast<std::size_t>(j - i)];
      g(j, i) = g(i, j);
    }
  }
  return g;
}

Eigen::MatrixXd KernelSpec::cross(const PointSet& a, const PointSet& b) const {
  check_points(a);
  check_points(b);
  if (kind_ == KernelKind::fourier_spectrum) return fourier_features(a).transpose() * fourier_features(b);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  std::vector<double> buf(b.size());
  Point q(a.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a.copy_point(i, q);
    row(q, b, 0, buf);
    for (std::size_t j = 0; j < b.size(); ++j) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
  }
  return g;
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(PointSet points, std::vector<double> weights, bool is_probability)
    : points_(std::move(points)), weights_(std::move(weights)), is_probability_(is_probability) {
  if (points_.size() != weights_.size()) throw InvalidArgument("measure has mismatched points and weights");
  for (double w : weights_) {
    if (!std::isfinite(w)) throw InvalidArgument("measure weight is not finite");
  }
  if (is_probability_) {
    if (weights_.empty()) throw InvalidArgument("probability measure needs at least one point");
    for (double w : weights_) {
      if (w < 0.0) throw InvalidArgument("probability measure has a negative weight");
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > kProbabilityTolerance * std::max<double>(1.0, static_cast<double>(weights_.size()))) {
      throw InvalidArgument("probability weights sum to " + std::to_string(total));
    }
  }
}

DiscreteMeasure DiscreteMeasure::probability(PointSet points, std::vector<double> weights) {
  return DiscreteMeasure(std::move(points), std::move(weights), true);
}

DiscreteMeasure DiscreteMeasure::uniform(PointSet points) {
  const std::size_t m = points.size();
  if (m == 0) throw InvalidArgument("uniform measure over an empty point set");
  return DiscreteMeasure(std::move(points), std::vector<double>(m, 1.0 / static_cast<double>(m)), true);
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> point) {
  PointSet ps(point.size());
  ps.push_back(point);
  return DiscreteMeasure(std::move(ps), {1.0}, true);
}

DiscreteMeasure DiscreteMeasure::signed_measure(PointSet points, std::vector<double> weights) {
  return DiscreteMeasure(std::move(points), std::move(weights), false);
}

double DiscreteMeasure::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

DiscreteMeasure DiscreteMeasure::difference(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  PointSet pts = a.points();
  pts.append(b.points());
  std::vector<double> w = a.weights();
  for (double x : b.weights()) w.push_back(-x);
  return signed_measure(std::move(pts), std::move(w));
}

// ---------------------------------------------------------------------------
// RkhsExpansion

RkhsExpansion::RkhsExpansion(KernelSpec kernel, PointSet centers, std::vector<double> coefficients)
    : kernel_(std::move(kernel)), centers_(std::move(centers)), coefficients_(std::move(coefficients)) {
  if (centers_.size() != coefficients_.size()) throw InvalidArgument("expansion has mismatched centers and coefficients");
  if (!centers_.empty() && centers_.dim() != kernel_.input_dim()) throw DomainError("expansion centers do not match kernel dimension");
}

RkhsExpansion RkhsExpansion::zero(KernelSpec kernel, std::size_t dim) {
  return RkhsExpansion(std::move(kernel), PointSet(dim), {});
}

double RkhsExpansion::operator()(std::span<const double> z) const {
  if (coefficients_.empty()) {
    kernel_.check_point(z);
    return 0.0;
  }
  std::vector<double> row(centers_.size());
  kernel_.row(z, centers_, 0, row);
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += coefficients_[j] * row[j];
  return s;
}

std::vector<double> RkhsExpansion::evaluate(const PointSet& points) const {
  if (coefficients_.empty()) return std::vector<double>(points.size(), 0.0);
  const Eigen::MatrixXd kx = kernel_.cross(points, centers_);
  const Eigen::Map<const Eigen::VectorXd> c(coefficients_.data(), static_cast<Eigen::Index>(coefficients_.size()));
  const Eigen::VectorXd v = kx * c;
  return {v.data(), v.data() + v.size()};
}

double RkhsExpansion::norm_sq_raw() const {
  if (coefficients_.empty()) return 0.0;
  const Eigen::Map<const Eigen::VectorXd> c(coefficients_.data(), static_cast<Eigen::Index>(coefficients_.size()));
  return c.dot(kernel_.gram(centers_) * c);
}

RkhsExpansion RkhsExpansion::scaled(double factor) const {
  std::vector<double> c = coefficients_;
  for (double& x : c) x *= factor;
  return RkhsExpansion(kernel_, centers_, std::move(c));
}

// ---------------------------------------------------------------------------
// Free functions

double eval_kernel(const KernelSpec& k, std::span<const double> z, std::span<const double> zp) { return k(z, zp); }

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const PointSet& points) {
  if (points.empty()) throw InvalidArgument("gram_matrix of an empty point set");
  return k.gram(points);
}

double rkhs_norm(const RkhsExpansion& f) { return std::sqrt(std::max(f.norm_sq_raw(), 0.0)); }

double rkhs_inner(const RkhsExpansion& f, const RkhsExpansion& g) {
  if (f.size() == 0 || g.size() == 0) return 0.0;
  const Eigen::MatrixXd kx = f.kernel().cross(f.centers(), g.centers());
  const Eigen::Map<const Eigen::VectorXd> a(f.coefficients().data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::Map<const Eigen::VectorXd> b(g.coefficients().data(), static_cast<Eigen::Index>(g.size()));
  return a.dot(kx * b);
}

double mmd_sq(const KernelSpec& k, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const DiscreteMeasure diff = DiscreteMeasure::difference(a, b);
  if (diff.size() == 0) return 0.0;
  const Eigen::MatrixXd g = k.gram(diff.points());
  const Eigen::Map<const Eigen::VectorXd> w(diff.weights().data(), static_cast<Eigen::Index>(diff.size()));
  return clamp_roundoff(w.dot(g * w), "MMD^2");
}

double mmd(const KernelSpec& k, const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::sqrt(mmd_sq(k, a, b));
}

}  // namespace mlab
