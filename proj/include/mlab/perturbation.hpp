#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlab/kernel.hpp"
#include "mlab/mdp.hpp"
#include "mlab/spectral.hpp"

namespace mlab {

inline double epsilon_from_n(double n) { return 1.0 / std::sqrt(n); }

/// Two-ball problem  sup { int g d rho : ||g||_k <= 1, ||g||_{L^2(nu)} <= eps }
/// for a fixed kernel, base measure nu and a finite set of evaluation points
/// that carry rho. Everything independent of (rho, eps) is factored once:
///
///   Z = supp(nu) u eval points (exact duplicates merged)
///   K_Z = U D U^T (truncated),  Phi = U D^{1/2}  (rows: features of Z)
///   G = Phi_nu^T W Phi_nu = V Gamma V^T
///
/// In the rotated feature basis the problem is  max alpha^T v  subject to
/// ||v|| <= 1 and sum_i gamma_i v_i^2 <= eps^2, with alpha = V^T Phi_eval^T w_rho.
class ResponseSolver {
 public:
  enum class Active { none, rkhs_ball, l2_ball, both };

  struct Solution {
    double value = 0.0;
    /// inf_g [MMD^2(rho, g o nu) + eps^2 ||g||^2_{L^2(nu)}]
    double spectral_sq = 0.0;
    double epsilon = 0.0;
    Active active = Active::none;
    int iterations = 0;
    /// Multiplier ratio lambda_L2 / lambda_H in the two-constraint case.
    double ratio = 0.0;
    Eigen::VectorXd v;  // rotated feature coordinates of the witness
  };

  ResponseSolver(const KernelSpec& k, const DiscreteMeasure& nu, const PointSet& eval_points);

  /// rho given by weights on the evaluation points.
  Solution solve(std::span<const double> rho_weights, double eps) const;
  /// rho = Dirac at evaluation point j (cheaper than a dense weight vector).
  Solution solve_dirac(std::size_t j, double eps) const;

  RkhsExpansion witness(const Solution& s) const;
  /// Witness values at every evaluation point.
  Eigen::VectorXd witness_values(const Solution& s) const;
  /// ||g||_k and ||g||_{L^2(nu)} of the witness.
  double witness_rkhs_norm(const Solution& s) const { return s.v.norm(); }
  double witness_l2_norm(const Solution& s) const;

  const KernelSpec& kernel() const { return kernel_; }
  const PointSet& joint_points() const { return joint_; }
  std::size_t rank() const { return static_cast<std::size_t>(gamma_.size()); }
  std::size_t num_eval() const { return static_cast<std::size_t>(eval_features_.rows()); }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  Point eval_point(std::size_t j) const { return joint_.point(eval_index_.at(j)); }

 private:
  Solution solve_alpha(const Eigen::VectorXd& alpha, double eps) const;

  KernelSpec kernel_;
  PointSet joint_;
  std::vector<std::size_t> eval_index_;
  Eigen::MatrixXd coeff_map_;      // |Z| x r, maps v to expansion coefficients on Z
  Eigen::MatrixXd eval_features_;  // n_eval x r, rows = Phi_eval V
  Eigen::VectorXd gamma_;          // eigenvalues of G, aligned with the rotated basis
};

/// Closed form S = sum_i eps^2 Lambda_i c_i^2 / (Lambda_i + eps^2) + residual with
/// c_i = int psi_i d rho by Nystrom extension. The residual ||mu_rho||^2 - sum Lambda_i c_i^2
/// is the part of rho's mean embedding outside the span of the kernel sections on
/// supp(nu); it vanishes when rho lives on supp(nu).
double spectral_response_sq(const SpectralBasis& b, const DiscreteMeasure& rho, double eps);

struct PrimalResult {
  double value = 0.0;
  double lower_bracket = 0.0;
  double upper_bracket = 0.0;
  RkhsExpansion witness;
  ResponseSolver::Active active = ResponseSolver::Active::none;
  int iterations = 0;
};

PrimalResult primal_response(const KernelSpec& k, const DiscreteMeasure& nu, double eps, const DiscreteMeasure& rho);

enum class SearchMode { enumerate, ascent, dirac_sup };
const char* search_mode_name(SearchMode m);
SearchMode parse_search_mode(const std::string& name);

struct ResponseReport {
  double value = 0.0;
  double lower_bracket = 0.0;
  double upper_bracket = 0.0;
  double epsilon = 0.0;
  RkhsExpansion witness;
  DiscreteMeasure maximizer;
  /// Maximizing policy (empty for dirac_sup).
  std::optional<Policy> policy;
  SearchMode mode = SearchMode::enumerate;
  int iterations = 0;
  std::size_t h_star = 0;
  /// Number of scanned candidates whose value is within 1e-9 of the maximum.
  std::size_t ties = 0;
  double witness_rkhs_norm = 0.0;
  double witness_l2_norm = 0.0;
  /// Ascent only: accepted values of the winning start, first entry is the start.
  std::vector<double> trace;
};

struct PiSearchOptions {
  SearchMode mode = SearchMode::enumerate;
  /// Steps over which the union is taken; empty means all of [H].
  std::vector<std::size_t> steps;
  /// Ascent: number of Dirac-seeded starts (the best-responding Diracs first).
  std::size_t dirac_starts = 16;
  int max_rounds = 100;
  double improvement_tol = 1e-9;
  /// Enumerate budget on |A|^{|S| H}.
  double enumerate_budget = 1e6;
};

/// R(Pi(P, mu), H_k, eps, nu) over the occupancy sets of the requested steps.
ResponseReport response_over_pi(const MdpSpec& m, const KernelSpec& k, const DiscreteMeasure& nu, double eps,
                                const PiSearchOptions& options = {});
/// Same, reusing a solver built on (k, nu, m.sa_points()).
ResponseReport response_over_pi(const MdpSpec& m, const ResponseSolver& solver, double eps,
                                const PiSearchOptions& options = {});

/// sup over all probability measures, attained at a Dirac on `grid`.
ResponseReport response_sup_all_measures(const KernelSpec& k, const DiscreteMeasure& nu, double eps,
                                         const PointSet& grid);
ResponseReport response_sup_all_measures(const ResponseSolver& solver, double eps);

struct CandidateResult {
  std::string id;
  DiscreteMeasure nu;
  ResponseReport report;
};

struct ComplexityReport {
  double epsilon = 0.0;
  double value = 0.0;
  std::size_t best = 0;
  std::vector<CandidateResult> per_candidate;
  /// Always true: the infimum is taken over a finite candidate set.
  bool is_upper_bound_of_delta = true;
  const DiscreteMeasure& best_nu() const { return per_candidate.at(best).nu; }
};

struct NamedMeasure {
  std::string id;
  DiscreteMeasure nu;
};

/// Uniform over pair points, visitation (averaged over h) of `random_policies`
/// random deterministic policies, and the uniform mixture of those.
std::vector<NamedMeasure> default_nu_candidates(const MdpSpec& m, std::uint64_t seed, std::size_t random_policies = 16);

ComplexityReport complexity_known(const MdpSpec& m, const KernelSpec& k, double eps,
                                  const std::vector<NamedMeasure>& candidates, const PiSearchOptions& options = {});

/// Query designs for the unknown-transition setting.
///   fixed      queries (h, s, a) ~ lambda; nu is the (s, a) marginal
///   two_phase  half the queries from lambda, half at (1, x, uniform action) with
///              x ~ P_theta(. | h, s, a) for (h, s, a) ~ lambda
struct Sampler {
  enum class Kind { fixed, two_phase };
  std::string id;
  Kind kind = Kind::fixed;
  /// lambda[((h-1) * S + s) * A + a]
  std::vector<double> lambda;
};

/// Pushforward nu_bar(s', a') = sum lambda(h, s, a) P(s' | h, s, a) / A.
std::vector<double> pushforward_uniform_actions(const Dynamics& p, const std::vector<double>& lambda);
/// Expected query marginal over pairs for a sampler under dynamics p.
std::vector<double> sampler_marginal(const Dynamics& p, const Sampler& sampler);

struct SamplerResult {
  std::string id;
  double value = 0.0;  // sup over theta
  std::size_t worst_theta = 0;
  std::vector<double> per_theta;
};

struct UnknownComplexityReport {
  double epsilon = 0.0;
  double value = 0.0;
  std::size_t best = 0;
  std::vector<SamplerResult> per_sampler;
  /// Always true: finite sampler set, and for each theta a finite search.
  bool is_upper_bound_of_delta = true;
};

UnknownComplexityReport complexity_unknown(const std::vector<MdpSpec>& family, const KernelSpec& k, double eps,
                                           const std::vector<Sampler>& samplers, const PiSearchOptions& options = {});

}  // namespace mlab
