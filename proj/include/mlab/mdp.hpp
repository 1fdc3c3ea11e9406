#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "mlab/kernel.hpp"
#include "mlab/rng.hpp"

namespace mlab {

/// Sparse transition kernel P[h][s][a] for h = 1..H. Rows are lists of
/// (next state, probability) with positive probabilities summing to one.
class Dynamics {
 public:
  using Row = std::vector<std::pair<std::size_t, double>>;

  /// rows[((h-1) * S + s) * A + a]
  Dynamics(std::size_t num_states, std::size_t num_actions, std::size_t horizon, std::vector<Row> rows);

  /// Same row for every step.
  static Dynamics stationary(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                             const std::vector<Row>& rows_sa);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t horizon() const { return horizon_; }
  const Row& row(std::size_t h, std::size_t s, std::size_t a) const;
  bool deterministic() const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t horizon_;
  std::vector<Row> rows_;
};

/// How a state-action pair becomes a kernel point.
///   one_hot  state coordinates followed by a one-hot action vector
///   none     state coordinates only (the kernel ignores the action)
///   index    the single coordinate s * A + a (for gram_table kernels)
enum class ActionEncoding { one_hot, none, index };

const char* action_encoding_name(ActionEncoding e);
ActionEncoding parse_action_encoding(const std::string& name);

/// Per-step reward tables over state-action pairs, r[h-1][s * A + a].
using RewardTables = std::vector<std::vector<double>>;

/// Finite-horizon MDP (S, A, H, P, r, mu) with kernel coordinates for every
/// state-action pair. Copies share the dynamics.
class MdpSpec {
 public:
  MdpSpec(std::shared_ptr<const Dynamics> dynamics, PointSet state_coords, ActionEncoding encoding,
          std::vector<double> init, std::vector<RkhsExpansion> rewards, double reward_radius = 1.0);

  /// Same MDP with different rewards (dynamics shared).
  MdpSpec with_rewards(std::vector<RkhsExpansion> rewards) const;
  /// Zero reward at every step, with the given kernel as the reward class.
  MdpSpec with_zero_rewards(const KernelSpec& k) const;

  std::size_t num_states() const { return dynamics_->num_states(); }
  std::size_t num_actions() const { return dynamics_->num_actions(); }
  std::size_t num_pairs() const { return num_states() * num_actions(); }
  std::size_t horizon() const { return dynamics_->horizon(); }
  const Dynamics& dynamics() const { return *dynamics_; }
  const std::shared_ptr<const Dynamics>& dynamics_ptr() const { return dynamics_; }
  const PointSet& state_coords() const { return state_coords_; }
  ActionEncoding encoding() const { return encoding_; }
  const std::vector<double>& init() const { return init_; }
  const std::vector<RkhsExpansion>& rewards() const { return rewards_; }
  double reward_radius() const { return reward_radius_; }
  const RewardTables& reward_tables() const { return reward_tables_; }

  std::size_t pair_index(std::size_t s, std::size_t a) const { return s * num_actions() + a; }
  std::size_t point_dim() const;
  Point sa_point(std::size_t s, std::size_t a) const;
  /// All S*A pair points in pair_index order.
  const PointSet& sa_points() const { return sa_points_; }
  /// Probability measure on pair points from a length S*A weight vector; zero entries are dropped.
  DiscreteMeasure pair_measure(const std::vector<double>& weights) const;
  DiscreteMeasure init_measure() const;

 private:
  std::shared_ptr<const Dynamics> dynamics_;
  PointSet state_coords_;
  ActionEncoding encoding_;
  std::vector<double> init_;
  std::vector<RkhsExpansion> rewards_;
  double reward_radius_;
  PointSet sa_points_;
  RewardTables reward_tables_;
};

/// pi[h][s] = distribution over actions, stored flat.
class Policy {
 public:
  Policy() = default;
  Policy(std::size_t num_states, std::size_t num_actions, std::size_t horizon, std::vector<double> probs);
  static Policy uniform(std::size_t num_states, std::size_t num_actions, std::size_t horizon);
  /// actions[(h-1) * S + s]
  static Policy deterministic(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                              const std::vector<std::size_t>& actions);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t horizon() const { return horizon_; }
  double prob(std::size_t h, std::size_t s, std::size_t a) const;
  /// Action with the largest probability (smallest index on ties).
  std::size_t mode(std::size_t h, std::size_t s) const;
  const std::vector<double>& probs() const { return probs_; }
  bool operator==(const Policy& other) const = default;

 private:
  std::size_t num_states_ = 0;
  std::size_t num_actions_ = 0;
  std::size_t horizon_ = 0;
  std::vector<double> probs_;
};

/// State-action occupancy at step h as a length S*A vector.
std::vector<double> occupancy_vector(const Dynamics& p, const std::vector<double>& init, const Policy& pi,
                                     std::size_t h);
/// All steps at once: result[h-1] is step h.
std::vector<std::vector<double>> occupancy_all(const Dynamics& p, const std::vector<double>& init, const Policy& pi);

DiscreteMeasure occupancy(const MdpSpec& m, const Policy& pi, std::size_t h);

double total_reward(const MdpSpec& m, const Policy& pi);
double total_reward(const Dynamics& p, const std::vector<double>& init, const RewardTables& r, const Policy& pi);

struct DpResult {
  double value = 0.0;
  Policy policy;
  /// q[h-1][s * A + a]
  std::vector<std::vector<double>> q;
};

/// Backward induction with Q_{H+1} = 0; greedy ties go to the smallest action.
DpResult optimal_value_and_policy(const Dynamics& p, const std::vector<double>& init, const RewardTables& r);
DpResult optimal_value_and_policy(const MdpSpec& m);

/// Reward tables that are zero except at step h, where they equal `values`.
RewardTables single_step_reward(std::size_t horizon, std::size_t h, std::vector<double> values);

/// sup over policies of |E_{rho_h} g| for g given by its values on pair points.
double pi_norm_values(const Dynamics& p, const std::vector<double>& init, const std::vector<double>& g_values,
                      std::size_t h);
double pi_norm(const MdpSpec& m, const RkhsExpansion& g, std::size_t h);
double pi_norm_all(const MdpSpec& m, const RkhsExpansion& g);

enum class RewardNoise { standard_normal, off };

struct GenerativeSample {
  std::size_t next_state;
  double reward;
};

GenerativeSample simulate_generative(const MdpSpec& m, std::size_t h, std::size_t s, std::size_t a, Rng& rng,
                                     RewardNoise noise = RewardNoise::standard_normal);

/// Grid on S^{d-1} in spherical coordinates phi_1..phi_{d-1} with a common
/// step pi/grid_per_angle: polar angles at (i + 1/2) * step (grid_per_angle
/// values), the azimuth at i * step (2 * grid_per_angle values). State
/// coordinates are Cartesian in R^d.
struct SphereGrid {
  std::size_t dim = 0;  // ambient dimension d
  std::size_t grid_per_angle = 0;
  double step = 0.0;
  /// angle indices per state, (d-1) entries each
  std::vector<std::vector<int>> indices;
  PointSet cartesian;
};

SphereGrid make_sphere_grid(std::size_t d, std::size_t grid_per_angle);

/// Angle indices after moving coordinate `coord` (0-based) by `steps` grid steps.
/// Crossing a pole reflects the polar angle and maps the remaining sub-sphere
/// to its antipode, which keeps the result on the grid.
std::vector<int> sphere_shift(const SphereGrid& grid, const std::vector<int>& idx, std::size_t coord, int steps);

/// The sphere MDP family member with shifts +-delta on coordinate (h-1) mod (d-1),
/// deterministic transitions, a Laplacian kernel exp(-||s - s'||) that ignores
/// actions, uniform mu over the grid and zero rewards.
struct SphereMdp {
  SphereGrid grid;
  KernelSpec kernel;
  MdpSpec mdp;
  int shift_steps;
};

SphereMdp sphere_mdp_family(std::size_t d, std::size_t horizon, double delta, std::size_t grid_per_angle);

/// Value of a grid-dependent quantity at a grid and at twice the grid.
struct RefinementReport {
  std::size_t grid = 0;
  double value = 0.0;
  double refined_value = 0.0;
  double relative_change = 0.0;
};

RefinementReport grid_refinement(const std::function<double(std::size_t)>& quantity, std::size_t grid);

}  // namespace mlab
