#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mlab/kernel.hpp"
#include "mlab/mdp.hpp"
#include "mlab/rng.hpp"

namespace mlab {

struct FitResult {
  RkhsExpansion estimate;
  /// Ridge multiplier; zero when the unconstrained minimum-norm fit is feasible.
  double multiplier = 0.0;
  double residual_sq = 0.0;
  bool constraint_active = false;
  double norm = 0.0;
  double radius = 0.0;
  /// ||grad of the objective in feature coordinates + 2 lambda u||; zero at the optimum.
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// min sum_i (f(z_i) - y_i)^2 over ||f||_k <= radius. Exact duplicate points are
/// merged into one weighted term, which changes the objective only by the
/// within-group sum of squares (added back into residual_sq).
FitResult constrained_kernel_ls(const KernelSpec& k, const PointSet& points, const std::vector<double>& targets,
                                double radius);

/// Weighted form on distinct points: sum_g counts_g (f(z_g) - means_g)^2 + within_ss.
FitResult constrained_kernel_ls_weighted(const KernelSpec& k, const PointSet& points, const std::vector<double>& counts,
                                         const std::vector<double>& means, double within_ss, double radius);

/// One generative-simulator access, as logged.
struct SampleRecord {
  std::size_t h, s, a, next_state;
  double y;
};

struct FitOptions {
  RewardNoise noise = RewardNoise::standard_normal;
  bool record_samples = false;
};

/// Pair indices drawn i.i.d. from a weight vector over pairs.
std::vector<std::size_t> draw_pairs(const std::vector<double>& pair_weights, std::size_t count, Rng& rng);

/// Pair weights of a measure whose points are pair points of m (first match wins
/// when the encoding maps several pairs to one point).
std::vector<double> pair_weights_of(const MdpSpec& m, const DiscreteMeasure& nu);

struct FittedRewardResult {
  Policy policy;
  MdpSpec fitted;
  std::vector<FitResult> fits;  // one per step
  std::size_t samples_per_step = 0;
  std::vector<SampleRecord> log;
};

/// Fitted reward: n^2 i.i.d. pairs from nu_hat, one noisy reward per pair and
/// step, per-step fits in the ball of radius m.reward_radius(), then exact DP
/// on the fitted MDP with the true transitions.
FittedRewardResult fitted_reward(const MdpSpec& m, const KernelSpec& k, const std::vector<double>& nu_pairs,
                                 std::size_t n, Rng& rng, const FitOptions& options = {});

struct FqiResult {
  Policy policy;
  std::vector<FitResult> q;  // q[h-1]
  /// Fitted Q_h evaluated on every pair, q_tables[h-1][s * A + a].
  std::vector<std::vector<double>> q_tables;
  std::vector<SampleRecord> log;
};

/// Fitted Q-iteration from h = H down to 1 with targets r + max_a' Q_{h+1}(s', a')
/// and radius H - h + 1. sample_sets[h-1] lists the queried pair indices at step h.
FqiResult fitted_q_iteration(const MdpSpec& m, const KernelSpec& k,
                             const std::vector<std::vector<std::size_t>>& sample_sets, Rng& rng,
                             const FitOptions& options = {});

/// n^2 i.i.d. draws from nu_pairs at every step.
std::vector<std::vector<std::size_t>> iid_sample_sets(const MdpSpec& m, const std::vector<double>& nu_pairs,
                                                      std::size_t n, Rng& rng);

/// J*(m) - J(m, pi).
double policy_gap(const MdpSpec& m, const Policy& pi);

/// Greedy policy from per-step Q tables (smallest action on ties).
Policy greedy_policy(std::size_t num_states, std::size_t num_actions, const std::vector<std::vector<double>>& q);

/// Numerical check of ||T_h g||_k <= ||g||_k + 1 over random g on the pair points.
/// Norms of T_h g use the minimum-norm interpolant of its pair values; values
/// outside the range of the pair Gram matrix give an infinite norm.
struct BellmanDiagnostic {
  double max_excess = 0.0;  // max over samples and h of ||T_h g|| - ||g||
  bool holds = true;        // max_excess <= 1 + tol
  std::size_t samples = 0;
};

BellmanDiagnostic bellman_assumption_check(const MdpSpec& m, const KernelSpec& k, std::size_t samples, double g_norm,
                                           Rng& rng, double tol = 1e-6);

}  // namespace mlab
