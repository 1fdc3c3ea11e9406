#include <gtest/gtest.h>

#include <cmath>

#include "mlab/adversary.hpp"
#include "mlab/errors.hpp"
#include "test_support.hpp"

using namespace mlab;

namespace {

void expect_pair_invariants(const AdversarialPair& p) {
  EXPECT_LE(static_cast<double>(p.n) * p.g_l2_sq, 1.0 + 1e-6);
  EXPECT_LE(rkhs_norm(p.g), 1.0 + 1e-6);
  EXPECT_GE(p.j_star_m2, (2.0 / 3.0 - 1e-6) * p.response_value);
  EXPECT_LE(p.tv_bound, 0.5 + 1e-6);
  EXPECT_NEAR(p.tv_bound, indistinguishability_certificate(p), 1e-15);
  EXPECT_EQ(p.m1.dynamics_ptr(), p.m2.dynamics_ptr());
  EXPECT_EQ(optimal_value_and_policy(p.m1).value, 0.0);
  for (std::size_t h = 1; h <= p.m2.horizon(); ++h) {
    if (h == p.h_star) continue;
    for (double v : p.m2.reward_tables()[h - 1]) EXPECT_EQ(v, 0.0);
  }
}

}  // namespace

TEST(Adversary, InvariantsOnRandomInstances) {
  Rng rng(100, 0);
  const auto k = KernelSpec::gaussian(0.5, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const MdpSpec m = fixtures::random_mdp(3, 2, 2, rng, &k);
    const auto nu = m.pair_measure(fixtures::random_simplex(6, rng, 0.01));
    for (std::size_t n : {1u, 16u, 256u}) expect_pair_invariants(hard_instance_pair(m, k, nu, n));
  }
}

TEST(Adversary, SingleStateSingleAction) {
  const auto k = KernelSpec::gaussian(1.0, 1);
  auto dyn = std::make_shared<const Dynamics>(1, 1, 1, std::vector<Dynamics::Row>{{{0, 1.0}}});
  const MdpSpec m(dyn, PointSet(1, {{0.3}}), ActionEncoding::none, {1.0}, {RkhsExpansion::zero(k, 1)});
  const auto nu = m.pair_measure({1.0});
  const auto p = hard_instance_pair(m, k, nu, 9);
  EXPECT_NEAR(p.j_star_m2, p.g(m.sa_point(0, 0)), 1e-14);
  // One point: the two-ball maximizer is min(1, eps) * k(z, .) / sqrt(k(z, z)).
  EXPECT_NEAR(p.response_value, 1.0 / 3.0, 1e-12);
  expect_pair_invariants(p);
}

TEST(Adversary, OnlyReachableDistributionIsEasy) {
  // Deterministic single-action chain: Pi(h) = {delta at the h-th state}. Sampling
  // from the occupancy itself caps the response at eps.
  const auto k = KernelSpec::laplacian(1.0, 1);
  std::vector<Dynamics::Row> rows{{{1, 1.0}}, {{2, 1.0}}, {{2, 1.0}}};
  auto dyn = std::make_shared<const Dynamics>(Dynamics::stationary(3, 1, 1, rows));
  const MdpSpec m(dyn, PointSet(1, {{0.0}, {0.5}, {1.0}}), ActionEncoding::none, {1.0, 0.0, 0.0},
                  {RkhsExpansion::zero(k, 1)});
  const auto nu = m.pair_measure({1.0, 0.0, 0.0});
  for (std::size_t n : {4u, 64u}) {
    const auto p = hard_instance_pair(m, k, nu, n);
    EXPECT_LE(p.response_value, 1.0 / std::sqrt(static_cast<double>(n)) + 1e-12);
    expect_pair_invariants(p);
  }
}

TEST(Adversary, UnreachableUnderNuIsHard) {
  // State 1 is reachable by action 1 but nu only covers state 0.
  const auto k = KernelSpec::gaussian(0.3, 3);
  const std::vector<Dynamics::Row> rows{{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}};
  auto dyn = std::make_shared<const Dynamics>(Dynamics::stationary(2, 2, 2, rows));
  const MdpSpec m(dyn, PointSet(1, {{0.0}, {1.0}}), ActionEncoding::one_hot, {1.0, 0.0},
                  {RkhsExpansion::zero(k, 3), RkhsExpansion::zero(k, 3)});
  const auto nu = m.pair_measure({0.5, 0.5, 0.0, 0.0});
  const std::size_t n = 400;
  const auto p = hard_instance_pair(m, k, nu, n);
  EXPECT_GT(p.response_value, 10.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_EQ(p.h_star, 2u);
  EXPECT_GE(p.j_star_m2, (2.0 / 3.0) * p.response_value);
  expect_pair_invariants(p);
  EXPECT_THROW(hard_instance_pair(m, k, nu, 0), InvalidArgument);
}

TEST(Certificate, Examples) {
  const auto k = KernelSpec::gaussian(1.0, 1);
  const auto nu = DiscreteMeasure::uniform(PointSet(1, {{0.0}, {1.0}}));
  EXPECT_EQ(indistinguishability_certificate(RkhsExpansion::zero(k, 1), nu, 10), 0.0);
  const RkhsExpansion g(k, PointSet(1, {{0.0}}), {1.0});
  const auto v = g.evaluate(nu.points());
  const double l2 = 0.5 * v[0] * v[0] + 0.5 * v[1] * v[1];
  const RkhsExpansion unit = g.scaled(1.0 / std::sqrt(25.0 * l2));  // n ||g||^2 = 1 at n = 25
  EXPECT_NEAR(indistinguishability_certificate(unit, nu, 25), 0.5, 1e-14);
  EXPECT_NEAR(indistinguishability_certificate(unit.scaled(0.5), nu, 25), 0.25, 1e-14);
}
