#pragma once

#include <cstddef>

#include "mlab/kernel.hpp"
#include "mlab/mdp.hpp"
#include "mlab/perturbation.hpp"

namespace mlab {

/// Two MDPs with the same dynamics object: M1 has zero reward, M2 has reward g
/// at step h_star only, where g is the exact response witness for eps = n^{-1/2}.
struct AdversarialPair {
  MdpSpec m1;
  MdpSpec m2;
  std::size_t h_star = 0;
  RkhsExpansion g;
  double response_value = 0.0;
  DiscreteMeasure sampling_nu;
  std::size_t n = 0;
  double tv_bound = 0.0;
  double j_star_m2 = 0.0;
  double g_rkhs_norm = 0.0;
  double g_l2_sq = 0.0;  // int g^2 d nu
  ResponseReport report;
};

AdversarialPair hard_instance_pair(const MdpSpec& m, const KernelSpec& k, const DiscreteMeasure& nu, std::size_t n,
                                   const PiSearchOptions& options = {});

/// sqrt(n/4 * int g^2 d nu).
double indistinguishability_certificate(const AdversarialPair& pair);
double indistinguishability_certificate(const RkhsExpansion& g, const DiscreteMeasure& nu, std::size_t n);

}  // namespace mlab
