#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mlab/errors.hpp"
#include "mlab/kernel.hpp"
#include "test_support.hpp"

using namespace mlab;

namespace {

std::vector<KernelSpec> sample_kernels(std::size_t dim) {
  return {KernelSpec::gaussian(0.7, dim), KernelSpec::laplacian(1.3, dim)};
}

double min_eig(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(g, Eigen::EigenvaluesOnly);
  return e.eigenvalues().minCoeff();
}

double max_eig(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e(g, Eigen::EigenvaluesOnly);
  return e.eigenvalues().maxCoeff();
}

std::vector<double> inverse_square_spectrum(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 1.0 / ((i + 1.0) * (i + 1.0));
  return s;
}

}  // namespace

TEST(Kernel, LaplacianAtEqualPointsIsOne) {
  const auto k = KernelSpec::laplacian(1.0, 3);
  const Point s{0.2, -0.5, 0.1};
  EXPECT_DOUBLE_EQ(eval_kernel(k, s, s), 1.0);
}

TEST(Kernel, GaussianIdentity) {
  const auto k = KernelSpec::gaussian(1.0, 2);
  const Point z{1.5, -2.0};
  EXPECT_DOUBLE_EQ(eval_kernel(k, z, z), 1.0);
}

TEST(Kernel, GramTableLookup) {
  Eigen::MatrixXd t(3, 3);
  t << 2.0, 0.5, 0.25, 0.5, 1.0, 0.1, 0.25, 0.1, 1.5;
  const auto k = KernelSpec::gram_table(t);
  EXPECT_DOUBLE_EQ(eval_kernel(k, Point{0.0}, Point{2.0}), 0.25);
  EXPECT_DOUBLE_EQ(k.sup_diagonal(), 2.0);
  EXPECT_THROW(eval_kernel(k, Point{3.0}, Point{0.0}), DomainError);
  EXPECT_THROW(eval_kernel(k, Point{0.5}, Point{0.0}), DomainError);
}

TEST(Kernel, GramTableRejectsNonPsd) {
  Eigen::MatrixXd t(2, 2);
  t << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(KernelSpec::gram_table(t), InvalidArgument);
}

TEST(Kernel, DomainMismatchIsAnError) {
  const auto k = KernelSpec::gaussian(1.0, 2);
  EXPECT_THROW(eval_kernel(k, Point{1.0}, Point{1.0, 2.0}), DomainError);
  const PointSet wrong(3, {{0.0, 0.0, 0.0}});
  EXPECT_THROW(gram_matrix(k, wrong), DomainError);
}

TEST(Kernel, Symmetry) {
  Rng rng(1, 0);
  for (const auto& k : sample_kernels(3)) {
    const PointSet ps = fixtures::random_points(20, 3, rng);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = 0; j < ps.size(); ++j) EXPECT_EQ(k(ps.point(i), ps.point(j)), k(ps.point(j), ps.point(i)));
    }
  }
}

TEST(Kernel, GramSinglePoint) {
  const auto k = KernelSpec::gaussian(0.3, 2);
  const PointSet ps(2, {{0.4, 0.4}});
  const Eigen::MatrixXd g = gram_matrix(k, ps);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_DOUBLE_EQ(g(0, 0), 1.0);
}

TEST(Kernel, GramDuplicatePointsRankOne) {
  const auto k = KernelSpec::laplacian(1.0, 2);
  const PointSet ps(2, {{0.4, 0.1}, {0.4, 0.1}});
  const Eigen::MatrixXd g = gram_matrix(k, ps);
  EXPECT_DOUBLE_EQ(g(0, 1), g(0, 0));
  EXPECT_DOUBLE_EQ(g(1, 1), g(0, 0));
  EXPECT_NEAR(min_eig(g), 0.0, 1e-14);
}

TEST(Kernel, GramMatchesPointwiseEvaluation) {
  Rng rng(2, 0);
  for (const auto& k : sample_kernels(4)) {
    const PointSet ps = fixtures::random_points(13, 4, rng);
    const Eigen::MatrixXd g = gram_matrix(k, ps);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t j = 0; j < ps.size(); ++j) {
        EXPECT_NEAR(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), k(ps.point(i), ps.point(j)), 1e-15);
      }
    }
  }
}

TEST(Kernel, LaplacianOnCircleIsPsd) {
  Rng rng(3, 0);
  const auto k = KernelSpec::laplacian(1.0, 2);
  PointSet ps(2);
  for (int j = 0; j < 5; ++j) {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    ps.push_back(Point{std::cos(t), std::sin(t)});
  }
  const Eigen::MatrixXd g = gram_matrix(k, ps);
  EXPECT_GE(min_eig(g), -1e-8 * max_eig(g));
}

TEST(Kernel, GramPsdOnRandomSetsForEveryKind) {
  Rng rng(4, 0);
  const auto fourier = KernelSpec::fourier_spectrum(inverse_square_spectrum(21));
  Eigen::MatrixXd b(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) b(i, j) = rng.normal();
  }
  const auto table = KernelSpec::gram_table(b * b.transpose());
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng.uniform_index(15);
    for (const auto& k : sample_kernels(3)) {
      const Eigen::MatrixXd g = gram_matrix(k, fixtures::random_points(m, 3, rng, 2.0));
      EXPECT_GE(min_eig(g), -1e-8 * max_eig(g));
    }
    PointSet angles(1);
    for (std::size_t j = 0; j < m; ++j) angles.push_back(Point{2.0 * std::numbers::pi * rng.uniform()});
    const Eigen::MatrixXd gf = gram_matrix(fourier, angles);
    EXPECT_GE(min_eig(gf), -1e-8 * max_eig(gf));
    PointSet idx(1);
    for (std::size_t j = 0; j < m; ++j) idx.push_back(Point{static_cast<double>(rng.uniform_index(6))});
    const Eigen::MatrixXd gt = gram_matrix(table, idx);
    EXPECT_GE(min_eig(gt), -1e-8 * std::max(max_eig(gt), 1e-300));
  }
}

TEST(Kernel, NormalizedFlag) {
  EXPECT_TRUE(KernelSpec::gaussian(1.0, 1).normalized());
  EXPECT_TRUE(KernelSpec::laplacian(1.0, 1).normalized());
  // 1 + 2 * sum_j max(L_2j, L_2j+1) for L_i = i^-2 is about 1.82.
  const auto f = KernelSpec::fourier_spectrum(inverse_square_spectrum(255));
  EXPECT_FALSE(f.normalized());
  EXPECT_GT(f.sup_diagonal(), 1.8);
  Rng rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const Point t{2.0 * std::numbers::pi * rng.uniform()};
    EXPECT_LE(f(t, t), f.sup_diagonal() + 1e-12);
  }
  const auto flat = KernelSpec::fourier_spectrum({0.5, 0.25, 0.25});
  EXPECT_TRUE(flat.normalized());
  for (int i = 0; i < 50; ++i) {
    const Point t{2.0 * std::numbers::pi * rng.uniform()};
    EXPECT_LE(flat(t, t), 1.0 + 1e-12);
  }
}

TEST(Kernel, FourierReconstructsMercerSum) {
  const auto spec = inverse_square_spectrum(9);
  const auto k = KernelSpec::fourier_spectrum(spec);
  Rng rng(6, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = 2.0 * std::numbers::pi * rng.uniform();
    const double u = 2.0 * std::numbers::pi * rng.uniform();
    double sum = 0.0;
    for (std::size_t i = 1; i <= spec.size(); ++i) sum += spec[i - 1] * KernelSpec::fourier_basis(i, t) * KernelSpec::fourier_basis(i, u);
    EXPECT_NEAR(k(Point{t}, Point{u}), sum, 1e-13);
    // Feature-based Gram agrees with pointwise evaluation.
    const PointSet ps(1, {{t}, {u}});
    EXPECT_NEAR(gram_matrix(k, ps)(0, 1), sum, 1e-13);
  }
}

TEST(Kernel, FourierBasisIsBounded) {
  for (std::size_t i = 1; i < 40; ++i) {
    for (double t = 0.0; t < 6.3; t += 0.01) EXPECT_LE(std::abs(KernelSpec::fourier_basis(i, t)), std::sqrt(2.0) + 1e-15);
  }
}

TEST(Rkhs, ZeroExpansionHasZeroNorm) {
  const auto k = KernelSpec::gaussian(1.0, 2);
  const PointSet c(2, {{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_EQ(rkhs_norm(RkhsExpansion(k, c, {0.0, 0.0})), 0.0);
  EXPECT_EQ(rkhs_norm(RkhsExpansion::zero(k, 2)), 0.0);
}

TEST(Rkhs, SingleCenterNormIsOne) {
  const auto k = KernelSpec::laplacian(0.5, 2);
  const PointSet c(2, {{0.3, -0.2}});
  EXPECT_DOUBLE_EQ(rkhs_norm(RkhsExpansion(k, c, {1.0})), 1.0);
}

TEST(Rkhs, DifferenceOfSectionsByHand) {
  const auto k = KernelSpec::gaussian(1.0, 1);
  const PointSet c(1, {{0.0}, {0.8}});
  const double k12 = std::exp(-0.64 / 2.0);
  EXPECT_NEAR(rkhs_norm(RkhsExpansion(k, c, {1.0, -1.0})), std::sqrt(2.0 - 2.0 * k12), 1e-15);
}

TEST(Rkhs, EvaluationConsistencyAndReproducingProperty) {
  Rng rng(7, 0);
  for (const auto& k : sample_kernels(2)) {
    const PointSet c = fixtures::random_points(9, 2, rng);
    std::vector<double> coef(9);
    for (auto& x : coef) x = rng.normal();
    const RkhsExpansion f(k, c, coef);
    const Eigen::VectorXd kc = gram_matrix(k, c) * Eigen::Map<const Eigen::VectorXd>(coef.data(), 9);
    const auto at_centers = f.evaluate(c);
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_NEAR(at_centers[j], kc(static_cast<Eigen::Index>(j)), 1e-12);
      EXPECT_NEAR(f(c.point(j)), kc(static_cast<Eigen::Index>(j)), 1e-12);
    }
    // <f, k(z, .)> = f(z)
    for (int t = 0; t < 10; ++t) {
      const PointSet z = fixtures::random_points(1, 2, rng);
      const RkhsExpansion section(k, z, {1.0});
      EXPECT_NEAR(rkhs_inner(f, section), f(z.point(0)), 1e-10);
    }
    EXPECT_GE(f.norm_sq_raw(), -1e-12);
  }
}

TEST(Mmd, IdenticalMeasuresGiveZero) {
  Rng rng(8, 0);
  const auto k = KernelSpec::gaussian(1.0, 2);
  const auto rho = DiscreteMeasure::probability(fixtures::random_points(5, 2, rng), fixtures::random_simplex(5, rng));
  EXPECT_EQ(mmd(k, rho, rho), 0.0);
}

TEST(Mmd, TwoDiracsClosedForm) {
  const auto k = KernelSpec::laplacian(1.0, 2);
  const Point x{0.0, 0.0}, y{0.3, 0.4};
  const double expect = std::sqrt(k(x, x) + k(y, y) - 2.0 * k(x, y));
  EXPECT_NEAR(mmd(k, DiscreteMeasure::dirac(x), DiscreteMeasure::dirac(y)), expect, 1e-15);
}

TEST(Mmd, MatchesBruteForceDoubleSum) {
  Rng rng(9, 0);
  const auto k = KernelSpec::gaussian(0.6, 2);
  const PointSet pa = fixtures::random_points(4, 2, rng), pb = fixtures::random_points(3, 2, rng);
  const auto a = DiscreteMeasure::uniform(pa);
  const auto b = DiscreteMeasure::probability(pb, {0.2, 0.5, 0.3});
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) s += a.weights()[i] * a.weights()[j] * k(pa.point(i), pa.point(j));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) s += b.weights()[i] * b.weights()[j] * k(pb.point(i), pb.point(j));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) s -= 2.0 * a.weights()[i] * b.weights()[j] * k(pa.point(i), pb.point(j));
  }
  EXPECT_NEAR(mmd(k, a, b), std::sqrt(s), 1e-13);
  EXPECT_NEAR(mmd(k, a, b), mmd(k, b, a), 1e-15);
}

TEST(Mmd, SignedMeasuresAccepted) {
  const auto k = KernelSpec::gaussian(1.0, 1);
  const PointSet p(1, {{0.0}, {1.0}});
  const auto g = DiscreteMeasure::signed_measure(p, {0.5, -0.25});
  EXPECT_FALSE(g.is_probability());
  EXPECT_GE(mmd_sq(k, g, DiscreteMeasure::dirac(Point{0.5})), 0.0);
}

TEST(Mmd, MetricPropertiesOnFixedGrid) {
  Rng rng(10, 0);
  const auto k = KernelSpec::laplacian(0.8, 2);
  const PointSet grid = fixtures::random_points(6, 2, rng);
  for (int t = 0; t < 100; ++t) {
    const auto a = DiscreteMeasure::probability(grid, fixtures::random_simplex(6, rng));
    const auto b = DiscreteMeasure::probability(grid, fixtures::random_simplex(6, rng));
    const auto c = DiscreteMeasure::probability(grid, fixtures::random_simplex(6, rng));
    const double ab = mmd(k, a, b), bc = mmd(k, b, c), ac = mmd(k, a, c);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, mmd(k, b, a), 1e-12);
    EXPECT_LE(ac, ab + bc + 1e-9);
  }
}

TEST(Mmd, RoundoffClampAndConsistencyError) {
  EXPECT_EQ(clamp_roundoff(-5e-11, "x"), 0.0);
  EXPECT_EQ(clamp_roundoff(0.25, "x"), 0.25);
  EXPECT_THROW(clamp_roundoff(-1e-6, "x"), ConsistencyError);
}

TEST(Measure, ProbabilityValidation) {
  const PointSet p(1, {{0.0}, {1.0}});
  EXPECT_THROW(DiscreteMeasure::probability(p, {0.7, 0.7}), InvalidArgument);
  EXPECT_THROW(DiscreteMeasure::probability(p, {1.5, -0.5}), InvalidArgument);
  EXPECT_NO_THROW(DiscreteMeasure::probability(p, {0.25, 0.75}));
  EXPECT_THROW(DiscreteMeasure::probability(p, {1.0}), InvalidArgument);
}
