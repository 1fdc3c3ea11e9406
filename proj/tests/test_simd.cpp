#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/simd/kernel_rows.hpp"
#include "test_support.hpp"

using namespace mlab;
using mlab::simd::Isa;

namespace {

std::int64_t ulp_distance(double a, double b) {
  if (a == b) return 0;
  std::int64_t ia, ib;
  std::memcpy(&ia, &a, sizeof a);
  std::memcpy(&ib, &b, sizeof b);
  if (ia < 0) ia = INT64_MIN - ia;
  if (ib < 0) ib = INT64_MIN - ib;
  return ia > ib ? ia - ib : ib - ia;
}

bool have_avx2() { return simd::detected_isa() == Isa::avx2; }

}  // namespace

TEST(Simd, ScalarPathAlwaysAvailable) {
  EXPECT_STREQ(simd::isa_name(Isa::scalar), "scalar");
  const Isa a = simd::active_isa();
  EXPECT_TRUE(a == Isa::scalar || a == Isa::avx2);
}

TEST(Simd, SquaredDistanceBitwiseEqual) {
  if (!have_avx2()) GTEST_SKIP() << "no AVX2 on this machine/build";
  Rng rng(11, 0);
  for (std::size_t dim : {1u, 2u, 3u, 5u, 17u, 20u}) {
    for (std::size_t count : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 65u}) {
      const PointSet ps = fixtures::random_points(count + 3, dim, rng, 3.0);
      const Point q = ps.point(0);
      std::vector<double> a(count), b(count);
      simd::sq_distance_row(q, ps, 3, a, Isa::scalar);
      simd::sq_distance_row(q, ps, 3, b, Isa::avx2);
      for (std::size_t j = 0; j < count; ++j) ASSERT_EQ(a[j], b[j]) << "dim " << dim << " count " << count;
    }
  }
}

TEST(Simd, GaussianAndLaplacianRowsWithinFourUlp) {
  if (!have_avx2()) GTEST_SKIP() << "no AVX2 on this machine/build";
  Rng rng(12, 0);
  for (std::size_t dim : {1u, 2u, 4u, 9u}) {
    for (double scale : {1e-3, 0.5, 1.0, 7.0, 300.0}) {
      const PointSet ps = fixtures::random_points(37, dim, rng, 2.0);
      const Point q = ps.point(5);
      std::vector<double> a(37), b(37);
      simd::gaussian_row(q, ps, 0, scale, a, Isa::scalar);
      simd::gaussian_row(q, ps, 0, scale, b, Isa::avx2);
      for (std::size_t j = 0; j < 37; ++j) EXPECT_LE(ulp_distance(a[j], b[j]), 4) << a[j] << " vs " << b[j];
      simd::laplacian_row(q, ps, 0, scale, a, Isa::scalar);
      simd::laplacian_row(q, ps, 0, scale, b, Isa::avx2);
      for (std::size_t j = 0; j < 37; ++j) EXPECT_LE(ulp_distance(a[j], b[j]), 4) << a[j] << " vs " << b[j];
    }
  }
}

TEST(Simd, ExpAcrossRangeIncludingSubnormals) {
  if (!have_avx2()) GTEST_SKIP() << "no AVX2 on this machine/build";
  std::vector<double> x;
  for (double v = 0.0; v >= -745.0; v -= 0.37) x.push_back(v);
  x.push_back(-708.3964185322641);  // near the normal/subnormal boundary
  x.push_back(-744.4400719213812);
  x.push_back(-1e-300);
  x.push_back(-800.0);
  std::vector<double> ref = x;
  simd::exp_nonpositive(ref, Isa::scalar);
  std::vector<double> got = x;
  simd::exp_nonpositive(got, Isa::avx2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ref[i] < 2.2250738585072014e-308) {
      // Subnormal results carry fewer significant bits; compare absolutely.
      EXPECT_NEAR(ref[i], got[i], 4.9406564584124654e-324 * 4) << "x = " << x[i];
    } else {
      EXPECT_LE(ulp_distance(ref[i], got[i]), 4) << "x = " << x[i];
    }
  }
}

TEST(Simd, RowRangeValidation) {
  const PointSet ps(2, {{0.0, 0.0}, {1.0, 1.0}});
  std::vector<double> out(3);
  const Point q{0.0, 0.0};
  EXPECT_THROW(simd::sq_distance_row(q, ps, 0, out), mlab::DomainError);
  const Point bad{0.0};
  std::vector<double> two(2);
  EXPECT_THROW(simd::sq_distance_row(bad, ps, 0, two), mlab::DomainError);
}

TEST(Simd, ScalarOverrideMatchesReference) {
  // Whatever ISA is active, the public entry point agrees with the explicit scalar call
  // to within the exp tolerance.
  Rng rng(13, 0);
  const PointSet ps = fixtures::random_points(50, 3, rng);
  const Point q = ps.point(0);
  std::vector<double> a(50), b(50);
  simd::gaussian_row(q, ps, 0, 0.7, a);
  simd::gaussian_row(q, ps, 0, 0.7, b, Isa::scalar);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_LE(ulp_distance(a[j], b[j]), 4);
}
