#include "mlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mlab/constants.hpp"
#include "mlab/errors.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// Dynamics

Dynamics::Dynamics(std::size_t num_states, std::size_t num_actions, std::size_t horizon, std::vector<Row> rows)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon), rows_(std::move(rows)) {
  if (num_states == 0 || num_actions == 0 || horizon == 0) throw InvalidArgument("MDP sizes must be positive");
  if (rows_.size() != num_states * num_actions * horizon) {
    throw InvalidArgument("transition tensor has " + std::to_string(rows_.size()) + " rows, expected " +
                          std::to_string(num_states * num_actions * horizon));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double total = 0.0;
    for (const auto& [next, p] : rows_[i]) {
      if (next >= num_states) throw InvalidArgument("transition row " + std::to_string(i) + " has next state out of range");
      if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("transition row " + std::to_string(i) + " has an invalid probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance * std::max<double>(1.0, static_cast<double>(rows_[i].size()))) {
      throw InvalidArgument("transition row " + std::to_string(i) + " sums to " + std::to_string(total));
    }
  }
}

Dynamics Dynamics::stationary(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                              const std::vector<Row>& rows_sa) {
  if (rows_sa.size() != num_states * num_actions) throw InvalidArgument("stationary rows must have S*A entries");
  std::vector<Row> rows;
  rows.reserve(rows_sa.size() * horizon);
  for (std::size_t h = 0; h < horizon; ++h) rows.insert(rows.end(), rows_sa.begin(), rows_sa.end());
  return Dynamics(num_states, num_actions, horizon, std::move(rows));
}

const Dynamics::Row& Dynamics::row(std::size_t h, std::size_t s, std::size_t a) const {
  if (h < 1 || h > horizon_ || s >= num_states_ || a >= num_actions_) {
    throw DomainError("transition index (h=" + std::to_string(h) + ", s=" + std::to_string(s) +
                      ", a=" + std::to_string(a) + ") out of range");
  }
  return rows_[((h - 1) * num_states_ + s) * num_actions_ + a];
}

bool Dynamics::deterministic() const {
  for (const auto& r : rows_) {
    std::size_t positive = 0;
    for (const auto& [next, p] : r) positive += p > 0.0 ? 1 : 0;
    if (positive != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// MdpSpec

const char* action_encoding_name(ActionEncoding e) {
  switch (e) {
    case ActionEncoding::one_hot:
      return "one_hot";
    case ActionEncoding::none:
      return "none";
    case ActionEncoding::index:
      return "index";
  }
  return "unknown";
}

ActionEncoding parse_action_encoding(const std::string& name) {
  if (name == "one_hot") return ActionEncoding::one_hot;
  if (name == "none") return ActionEncoding::none;
  if (name == "index") return ActionEncoding::index;
  throw InvalidArgument("unknown action encoding '" + name + "'");
}

MdpSpec::MdpSpec(std::shared_ptr<const Dynamics> dynamics, PointSet state_coords, ActionEncoding encoding,
                 std::vector<double> init, std::vector<RkhsExpansion> rewards, double reward_radius)
    : dynamics_(std::move(dynamics)),
      state_coords_(std::move(state_coords)),
      encoding_(encoding),
      init_(std::move(init)),
      rewards_(std::move(rewards)),
      reward_radius_(reward_radius) {
  if (!dynamics_) throw InvalidArgument("MDP needs dynamics");
  if (encoding_ != ActionEncoding::index && state_coords_.size() != num_states()) {
    throw InvalidArgument("state coordinates do not cover every state");
  }
  if (init_.size() != num_states()) throw InvalidArgument("initial distribution has the wrong length");
  double total = 0.0;
  for (double p : init_) {
    if (!(p >= 0.0)) throw InvalidArgument("initial distribution has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance * std::max<double>(1.0, static_cast<double>(init_.size()))) {
    throw InvalidArgument("initial distribution sums to " + std::to_string(total));
  }
  if (rewards_.size() != horizon()) throw InvalidArgument("need one reward expansion per step");
  if (!(reward_radius_ > 0.0)) throw InvalidArgument("reward radius must be positive");

  const std::size_t dim = point_dim();
  sa_points_ = PointSet(dim);
  sa_points_.reserve(num_pairs());
  for (std::size_t s = 0; s < num_states(); ++s) {
    for (std::size_t a = 0; a < num_actions(); ++a) sa_points_.push_back(sa_point(s, a));
  }
  reward_tables_.resize(horizon());
  for (std::size_t h = 0; h < horizon(); ++h) {
    reward_tables_[h] = rewards_[h].evaluate(sa_points_);
    const double norm = rkhs_norm(rewards_[h]);
    if (norm > reward_radius_ + 1e-8) {
      throw InvalidArgument("reward at step " + std::to_string(h + 1) + " has RKHS norm " + std::to_string(norm) +
                            " above the radius " + std::to_string(reward_radius_));
    }
  }
}

MdpSpec MdpSpec::with_rewards(std::vector<RkhsExpansion> rewards) const {
  return MdpSpec(dynamics_, state_coords_, encoding_, init_, std::move(rewards), reward_radius_);
}

MdpSpec MdpSpec::with_zero_rewards(const KernelSpec& k) const {
  std::vector<RkhsExpansion> r(horizon(), RkhsExpansion::zero(k, point_dim()));
  return with_rewards(std::move(r));
}

std::size_t MdpSpec::point_dim() const {
  switch (encoding_) {
    case ActionEncoding::one_hot:
      return state_coords_.dim() + num_actions();
    case ActionEncoding::none:
      return state_coords_.dim();
    case ActionEncoding::index:
      return 1;
  }
  return 0;
}

Point MdpSpec::sa_point(std::size_t s, std::size_t a) const {
  if (s >= num_states() || a >= num_actions()) throw DomainError("state-action pair out of range");
  if (encoding_ == ActionEncoding::index) return {static_cast<double>(pair_index(s, a))};
  Point p = state_coords_.point(s);
  if (encoding_ == ActionEncoding::one_hot) {
    for (std::size_t b = 0; b < num_actions(); ++b) p.push_back(b == a ? 1.0 : 0.0);
  }
  return p;
}

DiscreteMeasure MdpSpec::pair_measure(const std::vector<double>& weights) const {
  if (weights.size() != num_pairs()) throw InvalidArgument("pair weights must have S*A entries");
  PointSet pts(point_dim());
  std::vector<double> w;
  Point p(point_dim());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    sa_points_.copy_point(i, p);
    pts.push_back(p);
    w.push_back(weights[i]);
  }
  return DiscreteMeasure::probability(std::move(pts), std::move(w));
}

DiscreteMeasure MdpSpec::init_measure() const {
  PointSet pts(state_coords_.dim());
  std::vector<double> w;
  for (std::size_t s = 0; s < init_.size(); ++s) {
    if (init_[s] == 0.0) continue;
    pts.push_back(state_coords_.point(s));
    w.push_back(init_[s]);
  }
  return DiscreteMeasure::probability(std::move(pts), std::move(w));
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(std::size_t num_states, std::size_t num_actions, std::size_t horizon, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), horizon_(horizon), probs_(std::move(probs)) {
  if (probs_.size() != num_states * num_actions * horizon) throw InvalidArgument("policy table has the wrong size");
  for (std::size_t r = 0; r < num_states * horizon; ++r) {
    double total = 0.0;
    for (std::size_t a = 0; a < num_actions; ++a) {
      const double p = probs_[r * num_actions + a];
      if (!(p >= 0.0)) throw InvalidArgument("policy has a negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance * std::max<double>(1.0, static_cast<double>(num_actions))) {
      throw InvalidArgument("policy row " + std::to_string(r) + " sums to " + std::to_string(total));
    }
  }
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions, std::size_t horizon) {
  return Policy(num_states, num_actions, horizon,
                std::vector<double>(num_states * num_actions * horizon, 1.0 / static_cast<double>(num_actions)));
}

Policy Policy::deterministic(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                             const std::vector<std::size_t>& actions) {
  if (actions.size() != num_states * horizon) throw InvalidArgument("deterministic policy needs H*S actions");
  std::vector<double> probs(num_states * num_actions * horizon, 0.0);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    if (actions[r] >= num_actions) throw InvalidArgument("policy action out of range");
    probs[r * num_actions + actions[r]] = 1.0;
  }
  return Policy(num_states, num_actions, horizon, std::move(probs));
}

double Policy::prob(std::size_t h, std::size_t s, std::size_t a) const {
  return probs_[((h - 1) * num_states_ + s) * num_actions_ + a];
}

std::size_t Policy::mode(std::size_t h, std::size_t s) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < num_actions_; ++a) {
    if (prob(h, s, a) > prob(h, s, best)) best = a;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Occupancy and evaluation

namespace {

void check_policy(const Dynamics& p, const Policy& pi) {
  if (pi.num_states() != p.num_states() || pi.num_actions() != p.num_actions() || pi.horizon() != p.horizon()) {
    throw InvalidArgument("policy shape does not match the MDP");
  }
}

void check_step(const Dynamics& p, std::size_t h) {
  if (h < 1 || h > p.horizon()) throw DomainError("step " + std::to_string(h) + " outside [1, H]");
}

}  // namespace

std::vector<std::vector<double>> occupancy_all(const Dynamics& p, const std::vector<double>& init, const Policy& pi) {
  check_policy(p, pi);
  const std::size_t S = p.num_states(), A = p.num_actions();
  std::vector<std::vector<double>> out(p.horizon(), std::vector<double>(S * A, 0.0));
  std::vector<double> state = init;
  for (std::size_t h = 1; h <= p.horizon(); ++h) {
    auto& sa = out[h - 1];
    std::vector<double> next(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (state[s] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = state[s] * pi.prob(h, s, a);
        sa[s * A + a] = w;
        if (w == 0.0 || h == p.horizon()) continue;
        for (const auto& [s2, q] : p.row(h, s, a)) next[s2] += w * q;
      }
    }
    state = std::move(next);
  }
  return out;
}

std::vector<double> occupancy_vector(const Dynamics& p, const std::vector<double>& init, const Policy& pi,
                                     std::size_t h) {
  check_step(p, h);
  return occupancy_all(p, init, pi)[h - 1];
}

DiscreteMeasure occupancy(const MdpSpec& m, const Policy& pi, std::size_t h) {
  return m.pair_measure(occupancy_vector(m.dynamics(), m.init(), pi, h));
}

double total_reward(const Dynamics& p, const std::vector<double>& init, const RewardTables& r, const Policy& pi) {
  if (r.size() != p.horizon()) throw InvalidArgument("need one reward table per step");
  const auto occ = occupancy_all(p, init, pi);
  double total = 0.0;
  for (std::size_t h = 0; h < occ.size(); ++h) {
    for (std::size_t i = 0; i < occ[h].size(); ++i) total += occ[h][i] * r[h][i];
  }
  return total;
}

double total_reward(const MdpSpec& m, const Policy& pi) {
  return total_reward(m.dynamics(), m.init(), m.reward_tables(), pi);
}

DpResult optimal_value_and_policy(const Dynamics& p, const std::vector<double>& init, const RewardTables& r) {
  if (r.size() != p.horizon()) throw InvalidArgument("need one reward table per step");
  const std::size_t S = p.num_states(), A = p.num_actions(), H = p.horizon();
  DpResult res;
  res.q.assign(H, std::vector<double>(S * A, 0.0));
  std::vector<std::size_t> actions(S * H, 0);
  std::vector<double> v_next(S, 0.0);
  for (std::size_t h = H; h >= 1; --h) {
    auto& q = res.q[h - 1];
    if (r[h - 1].size() != S * A) throw InvalidArgument("reward table has the wrong size");
    std::vector<double> v(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        double cont = 0.0;
        if (h < H) {
          for (const auto& [s2, prob] : p.row(h, s, a)) cont += prob * v_next[s2];
        }
        q[s * A + a] = r[h - 1][s * A + a] + cont;
      }
      std::size_t best = 0;
      for (std::size_t a = 1; a < A; ++a) {
        if (q[s * A + a] > q[s * A + best]) best = a;
      }
      actions[(h - 1) * S + s] = best;
      v[s] = q[s * A + best];
    }
    v_next = std::move(v);
  }
  double value = 0.0;
  for (std::size_t s = 0; s < S; ++s) value += init[s] * v_next[s];
  res.value = value;
  res.policy = Policy::deterministic(S, A, H, actions);
  return res;
}

DpResult optimal_value_and_policy(const MdpSpec& m) {
  return optimal_value_and_policy(m.dynamics(), m.init(), m.reward_tables());
}

RewardTables single_step_reward(std::size_t horizon, std::size_t h, std::vector<double> values) {
  if (h < 1 || h > horizon) throw DomainError("step " + std::to_string(h) + " outside [1, H]");
  RewardTables r(horizon, std::vector<double>(values.size(), 0.0));
  r[h - 1] = std::move(values);
  return r;
}

double pi_norm_values(const Dynamics& p, const std::vector<double>& init, const std::vector<double>& g_values,
                      std::size_t h) {
  check_step(p, h);
  std::vector<double> neg(g_values.size());
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -g_values[i];
  const double up = optimal_value_and_policy(p, init, single_step_reward(p.horizon(), h, g_values)).value;
  const double down = optimal_value_and_policy(p, init, single_step_reward(p.horizon(), h, std::move(neg))).value;
  return std::max({up, down, 0.0});
}

double pi_norm(const MdpSpec& m, const RkhsExpansion& g, std::size_t h) {
  return pi_norm_values(m.dynamics(), m.init(), g.evaluate(m.sa_points()), h);
}

double pi_norm_all(const MdpSpec& m, const RkhsExpansion& g) {
  const std::vector<double> vals = g.evaluate(m.sa_points());
  double best = 0.0;
  for (std::size_t h = 1; h <= m.horizon(); ++h) best = std::max(best, pi_norm_values(m.dynamics(), m.init(), vals, h));
  return best;
}

GenerativeSample simulate_generative(const MdpSpec& m, std::size_t h, std::size_t s, std::size_t a, Rng& rng,
                                     RewardNoise noise) {
  const auto& row = m.dynamics().row(h, s, a);
  std::size_t next = row.front().first;
  if (row.size() > 1) {
    std::vector<double> probs(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) probs[i] = row[i].second;
    next = row[rng.categorical(probs)].first;
  }
  double reward = m.reward_tables()[h - 1][m.pair_index(s, a)];
  if (noise == RewardNoise::standard_normal) reward += rng.normal();
  return {next, reward};
}

// ---------------------------------------------------------------------------
// Sphere family

namespace {

Point sphere_cartesian(const std::vector<double>& angles) {
  const std::size_t d = angles.size() + 1;
  Point x(d);
  double sin_prod = 1.0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    x[i] = sin_prod * std::cos(angles[i]);
    sin_prod *= std::sin(angles[i]);
  }
  x[d - 1] = sin_prod;
  return x;
}

std::vector<double> grid_angles(const SphereGrid& g, const std::vector<int>& idx) {
  std::vector<double> angles(idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const bool azimuth = c + 1 == idx.size();
    angles[c] = azimuth ? idx[c] * g.step : (idx[c] + 0.5) * g.step;
  }
  return angles;
}

std::size_t flat_index(const SphereGrid& g, const std::vector<int>& idx) {
  std::size_t flat = 0;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const bool azimuth = c + 1 == idx.size();
    const std::size_t extent = azimuth ? 2 * g.grid_per_angle : g.grid_per_angle;
    flat = flat * extent + static_cast<std::size_t>(idx[c]);
  }
  return flat;
}

}  // namespace

SphereGrid make_sphere_grid(std::size_t d, std::size_t grid_per_angle) {
  if (d < 2) throw InvalidArgument("sphere dimension d must be at least 2");
  if (grid_per_angle < 1) throw InvalidArgument("grid_per_angle must be positive");
  SphereGrid g;
  g.dim = d;
  g.grid_per_angle = grid_per_angle;
  g.step = std::numbers::pi / static_cast<double>(grid_per_angle);
  g.cartesian = PointSet(d);
  const std::size_t angles = d - 1;
  std::vector<int> idx(angles, 0);
  const int gpa = static_cast<int>(grid_per_angle);
  // Row-major over angle indices, azimuth fastest.
  while (true) {
    g.indices.push_back(idx);
    g.cartesian.push_back(sphere_cartesian(grid_angles(g, idx)));
    std::size_t c = angles;
    while (c > 0) {
      --c;
      const int extent = (c + 1 == angles) ? 2 * gpa : gpa;
      if (++idx[c] < extent) break;
      idx[c] = 0;
      if (c == 0) return g;
    }
  }
}

std::vector<int> sphere_shift(const SphereGrid& grid, const std::vector<int>& idx, std::size_t coord, int steps) {
  const std::size_t angles = grid.dim - 1;
  if (idx.size() != angles || coord >= angles) throw DomainError("sphere shift coordinate out of range");
  const int gpa = static_cast<int>(grid.grid_per_angle);
  std::vector<int> out = idx;
  if (coord + 1 == angles) {
    out[coord] = ((out[coord] + steps) % (2 * gpa) + 2 * gpa) % (2 * gpa);
    return out;
  }
  // Polar angle: fold j into [0, gpa) across the poles; every fold maps the
  // trailing sub-sphere to its antipode.
  int j = out[coord] + steps;
  bool flip = false;
  const int period = 2 * gpa;
  j = ((j % period) + period) % period;
  if (j >= gpa) {
    j = period - 1 - j;
    flip = true;
  }
  // A full turn (an even number of folds) needs no flip; the modulo above
  // already removed those.
  out[coord] = j;
  if (flip) {
    for (std::size_t c = coord + 1; c < angles; ++c) {
      if (c + 1 == angles) {
        out[c] = (out[c] + gpa) % period;
      } else {
        out[c] = gpa - 1 - out[c];
      }
    }
  }
  return out;
}

SphereMdp sphere_mdp_family(std::size_t d, std::size_t horizon, double delta, std::size_t grid_per_angle) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (horizon < 1) throw InvalidArgument("horizon must be positive");
  SphereGrid grid = make_sphere_grid(d, grid_per_angle);
  const double ratio = delta / grid.step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("delta " + std::to_string(delta) + " is not a positive multiple of the grid step " +
                          std::to_string(grid.step));
  }
  const int k = static_cast<int>(rounded);
  const std::size_t S = grid.indices.size();
  const std::size_t angles = d - 1;
  std::vector<Dynamics::Row> rows;
  rows.reserve(S * 2 * horizon);
  Point expect(d), got(d);
  for (std::size_t h = 1; h <= horizon; ++h) {
    const std::size_t coord = (h - 1) % angles;
    for (std::size_t s = 0; s < S; ++s) {
      for (int a = 0; a < 2; ++a) {
        const std::vector<int> next = sphere_shift(grid, grid.indices[s], coord, a == 0 ? k : -k);
        const std::size_t ns = flat_index(grid, next);
        // Cross-check against the analytic shift in Cartesian coordinates.
        std::vector<double> ang = grid_angles(grid, grid.indices[s]);
        ang[coord] += (a == 0 ? 1.0 : -1.0) * k * grid.step;
        expect = sphere_cartesian(ang);
        grid.cartesian.copy_point(ns, got);
        for (std::size_t i = 0; i < d; ++i) {
          if (std::abs(expect[i] - got[i]) > 1e-9) throw ConsistencyError("sphere shift left the grid");
        }
        rows.push_back({{ns, 1.0}});
      }
    }
  }
  auto dyn = std::make_shared<const Dynamics>(S, 2, horizon, std::move(rows));
  KernelSpec kernel = KernelSpec::laplacian(1.0, d);
  std::vector<double> init(S, 1.0 / static_cast<double>(S));
  std::vector<RkhsExpansion> rewards(horizon, RkhsExpansion::zero(kernel, d));
  MdpSpec mdp(dyn, grid.cartesian, ActionEncoding::none, std::move(init), std::move(rewards));
  return SphereMdp{std::move(grid), kernel, std::move(mdp), k};
}

RefinementReport grid_refinement(const std::function<double(std::size_t)>& quantity, std::size_t grid) {
  RefinementReport r;
  r.grid = grid;
  r.value = quantity(grid);
  r.refined_value = quantity(2 * grid);
  const double scale = std::max(std::abs(r.value), 1e-300);
  r.relative_change = std::abs(r.refined_value - r.value) / scale;
  return r;
}

}  // namespace mlab
