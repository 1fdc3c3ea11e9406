#include "mlab/adversary.hpp"

#include <cmath>

#include "mlab/errors.hpp"

namespace mlab {

double indistinguishability_certificate(const RkhsExpansion& g, const DiscreteMeasure& nu, std::size_t n) {
  const std::vector<double> vals = g.evaluate(nu.points());
  double l2 = 0.0;
  for (std::size_t j = 0; j < vals.size(); ++j) l2 += nu.weights()[j] * vals[j] * vals[j];
  return std::sqrt(static_cast<double>(n) / 4.0 * l2);
}

double indistinguishability_certificate(const AdversarialPair& pair) {
  return indistinguishability_certificate(pair.g, pair.sampling_nu, pair.n);
}

AdversarialPair hard_instance_pair(const MdpSpec& m, const KernelSpec& k, const DiscreteMeasure& nu, std::size_t n,
                                   const PiSearchOptions& options) {
  if (n < 1) throw InvalidArgument("hard_instance_pair needs n >= 1");
  const double eps = epsilon_from_n(static_cast<double>(n));
  const ResponseSolver solver(k, nu, m.sa_points());

  AdversarialPair pair{m.with_zero_rewards(k), m.with_zero_rewards(k), 0, {}, -1.0, nu, n, 0.0, 0.0, 0.0, 0.0, {}};
  for (std::size_t h = 1; h <= m.horizon(); ++h) {
    PiSearchOptions step = options;
    step.steps = {h};
    ResponseReport rep = response_over_pi(m, solver, eps, step);
    if (rep.value > pair.response_value) {
      pair.response_value = rep.value;
      pair.h_star = h;
      pair.report = std::move(rep);
    }
  }
  pair.g = pair.report.witness;
  std::vector<RkhsExpansion> rewards(m.horizon(), RkhsExpansion::zero(k, m.point_dim()));
  rewards[pair.h_star - 1] = pair.g;
  pair.m2 = m.with_rewards(std::move(rewards));
  pair.j_star_m2 = optimal_value_and_policy(pair.m2).value;
  pair.g_rkhs_norm = rkhs_norm(pair.g);
  const std::vector<double> vals = pair.g.evaluate(nu.points());
  for (std::size_t j = 0; j < vals.size(); ++j) pair.g_l2_sq += nu.weights()[j] * vals[j] * vals[j];
  pair.tv_bound = std::sqrt(static_cast<double>(n) / 4.0 * pair.g_l2_sq);
  return pair;
}

}  // namespace mlab
