#include "mlab/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "mlab/constants.hpp"
#include "mlab/errors.hpp"

namespace mlab {

FitResult constrained_kernel_ls_weighted(const KernelSpec& k, const PointSet& points, const std::vector<double>& counts,
                                         const std::vector<double>& means, double within_ss, double radius) {
  if (points.empty()) throw InvalidArgument("constrained_kernel_ls needs at least one point");
  if (counts.size() != points.size() || means.size() != points.size()) {
    throw InvalidArgument("counts and means must match the points");
  }
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (!std::isfinite(means[i]) || !std::isfinite(counts[i]) || counts[i] < 0.0) {
      throw InvalidArgument("targets and counts must be finite");
    }
  }
  const auto m = static_cast<Eigen::Index>(points.size());
  const Eigen::Map<const Eigen::VectorXd> c(counts.data(), m);
  const Eigen::Map<const Eigen::VectorXd> y(means.data(), m);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> keig(k.gram(points));
  const Eigen::VectorXd& d = keig.eigenvalues();
  const double dmax = d(m - 1);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    if (d(i) >= kRankTolerance * dmax && d(i) > 0.0) keep.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd phi(m, r), inv_half(m, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double dj = d(keep[static_cast<std::size_t>(j)]);
    phi.col(j) = keig.eigenvectors().col(keep[static_cast<std::size_t>(j)]) * std::sqrt(dj);
    inv_half.col(j) = keig.eigenvectors().col(keep[static_cast<std::size_t>(j)]) / std::sqrt(dj);
  }

  // Features: f(z_g) = (Phi u)_g and ||f||_k = ||u||. Normal equations
  // (M + lambda I) u = b with M = Phi^T C Phi, b = Phi^T C y.
  Eigen::MatrixXd mm = phi.transpose() * c.asDiagonal() * phi;
  mm = (mm + mm.transpose()) * 0.5;
  const Eigen::VectorXd b = phi.transpose() * c.asDiagonal() * y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> meig(mm);
  const Eigen::VectorXd sigma = meig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd qb = meig.eigenvectors().transpose() * b;
  const double smax = sigma.size() > 0 ? sigma.maxCoeff() : 0.0;

  auto coords = [&](double lambda) {
    Eigen::VectorXd w(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      const double den = sigma(i) + lambda;
      w(i) = (den > kRankTolerance * smax && den > 0.0) ? qb(i) / den : 0.0;
    }
    return w;
  };

  FitResult res;
  res.radius = radius;
  Eigen::VectorXd w = coords(0.0);
  double lambda = 0.0;
  if (w.norm() > radius) {
    const double yty = (c.array() * y.array().square()).sum();
    double lo = 0.0, hi = yty / (radius * radius) + smax;
    int it = 0;
    for (; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (coords(mid).norm() > radius) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
    if (hi - lo > 1e-15 * hi && it >= 200) {
      throw ConvergenceError("ridge-path bisection did not converge in 200 iterations");
    }
    lambda = hi;
    w = coords(lambda);
    res.iterations = it;
    res.constraint_active = true;
  }
  const Eigen::VectorXd u = meig.eigenvectors() * w;
  res.multiplier = lambda;
  res.norm = u.norm();
  res.kkt_residual = (2.0 * (mm * u - b) + 2.0 * lambda * u).norm();
  const Eigen::VectorXd fitted = phi * u;
  res.residual_sq = (c.array() * (fitted - y).array().square()).sum() + within_ss;
  const Eigen::VectorXd coef = inv_half * u;
  res.estimate = RkhsExpansion(k, points, std::vector<double>(coef.data(), coef.data() + coef.size()));
  return res;
}

FitResult constrained_kernel_ls(const KernelSpec& k, const PointSet& points, const std::vector<double>& targets,
                                double radius) {
  if (points.empty()) throw InvalidArgument("constrained_kernel_ls needs at least one point");
  if (targets.size() != points.size()) throw InvalidArgument("targets must match the points");
  for (double t : targets) {
    if (!std::isfinite(t)) throw InvalidArgument("targets must be finite");
  }
  std::map<Point, std::size_t> group;
  PointSet unique(points.dim());
  std::vector<double> counts, sums;
  std::vector<std::size_t> of(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Point p = points.point(i);
    auto [it, inserted] = group.emplace(p, unique.size());
    if (inserted) {
      unique.push_back(p);
      counts.push_back(0.0);
      sums.push_back(0.0);
    }
    of[i] = it->second;
    counts[it->second] += 1.0;
    sums[it->second] += targets[i];
  }
  std::vector<double> means(counts.size());
  for (std::size_t g = 0; g < counts.size(); ++g) means[g] = sums[g] / counts[g];
  double within = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dlt = targets[i] - means[of[i]];
    within += dlt * dlt;
  }
  return constrained_kernel_ls_weighted(k, unique, counts, means, within, radius);
}

std::vector<std::size_t> draw_pairs(const std::vector<double>& pair_weights, std::size_t count, Rng& rng) {
  std::vector<std::size_t> out(count);
  for (auto& p : out) p = rng.categorical(pair_weights);
  return out;
}

std::vector<double> pair_weights_of(const MdpSpec& m, const DiscreteMeasure& nu) {
  std::map<Point, std::size_t> index;
  for (std::size_t i = 0; i < m.num_pairs(); ++i) index.emplace(m.sa_points().point(i), i);
  std::vector<double> w(m.num_pairs(), 0.0);
  for (std::size_t j = 0; j < nu.size(); ++j) {
    auto it = index.find(nu.points().point(j));
    if (it == index.end()) throw DomainError("measure point is not a state-action point of the MDP");
    w[it->second] += nu.weights()[j];
  }
  return w;
}

namespace {

// Fit on pair-indexed samples: groups by pair, one weighted term per pair.
FitResult fit_pairs(const MdpSpec& m, const KernelSpec& k, const std::vector<std::size_t>& pairs,
                    const std::vector<double>& y, double radius) {
  std::vector<double> count(m.num_pairs(), 0.0), sum(m.num_pairs(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    count[pairs[i]] += 1.0;
    sum[pairs[i]] += y[i];
  }
  PointSet pts(m.point_dim());
  std::vector<double> counts, means;
  std::vector<double> mean_of(m.num_pairs(), 0.0);
  Point p(m.point_dim());
  for (std::size_t j = 0; j < m.num_pairs(); ++j) {
    if (count[j] == 0.0) continue;
    m.sa_points().copy_point(j, p);
    pts.push_back(p);
    counts.push_back(count[j]);
    mean_of[j] = sum[j] / count[j];
    means.push_back(mean_of[j]);
  }
  double within = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double dlt = y[i] - mean_of[pairs[i]];
    within += dlt * dlt;
  }
  return constrained_kernel_ls_weighted(k, pts, counts, means, within, radius);
}

}  // namespace

FittedRewardResult fitted_reward(const MdpSpec& m, const KernelSpec& k, const std::vector<double>& nu_pairs,
                                 std::size_t n, Rng& rng, const FitOptions& options) {
  if (n < 1) throw InvalidArgument("fitted_reward needs n >= 1");
  if (nu_pairs.size() != m.num_pairs()) throw InvalidArgument("sampling weights must cover every pair");
  const std::size_t count = n * n;
  const std::vector<std::size_t> pairs = draw_pairs(nu_pairs, count, rng);
  const std::size_t A = m.num_actions();
  std::vector<FitResult> fits;
  std::vector<SampleRecord> log;
  std::vector<RkhsExpansion> rewards;
  std::vector<double> y(count);
  for (std::size_t h = 1; h <= m.horizon(); ++h) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto smp = simulate_generative(m, h, pairs[i] / A, pairs[i] % A, rng, options.noise);
      y[i] = smp.reward;
      if (options.record_samples) log.push_back({h, pairs[i] / A, pairs[i] % A, smp.next_state, smp.reward});
    }
    fits.push_back(fit_pairs(m, k, pairs, y, m.reward_radius()));
    rewards.push_back(fits.back().estimate);
  }
  MdpSpec fitted = m.with_rewards(std::move(rewards));
  Policy policy = optimal_value_and_policy(fitted).policy;
  return FittedRewardResult{std::move(policy), std::move(fitted), std::move(fits), count, std::move(log)};
}

Policy greedy_policy(std::size_t num_states, std::size_t num_actions, const std::vector<std::vector<double>>& q) {
  const std::size_t H = q.size();
  std::vector<std::size_t> actions(num_states * H, 0);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t s = 0; s < num_states; ++s) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < num_actions; ++a) {
        if (q[h][s * num_actions + a] > q[h][s * num_actions + best]) best = a;
      }
      actions[h * num_states + s] = best;
    }
  }
  return Policy::deterministic(num_states, num_actions, H, actions);
}

FqiResult fitted_q_iteration(const MdpSpec& m, const KernelSpec& k,
                             const std::vector<std::vector<std::size_t>>& sample_sets, Rng& rng,
                             const FitOptions& options) {
  const std::size_t H = m.horizon(), S = m.num_states(), A = m.num_actions();
  if (sample_sets.size() != H) throw InvalidArgument("need one sample set per step");
  FqiResult res;
  res.q.resize(H);
  res.q_tables.assign(H, std::vector<double>(m.num_pairs(), 0.0));
  for (std::size_t h = H; h >= 1; --h) {
    const auto& pairs = sample_sets[h - 1];
    if (pairs.empty()) throw InvalidArgument("sample set for step " + std::to_string(h) + " is empty");
    std::vector<double> y(pairs.size());
    std::vector<double> v_next(S, 0.0);
    if (h < H) {
      const auto& qn = res.q_tables[h];
      for (std::size_t s = 0; s < S; ++s) {
        double best = qn[s * A];
        for (std::size_t a = 1; a < A; ++a) best = std::max(best, qn[s * A + a]);
        v_next[s] = best;
      }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i] >= m.num_pairs()) throw DomainError("sample pair index out of range");
      const auto smp = simulate_generative(m, h, pairs[i] / A, pairs[i] % A, rng, options.noise);
      y[i] = smp.reward + (h < H ? v_next[smp.next_state] : 0.0);
      if (options.record_samples) res.log.push_back({h, pairs[i] / A, pairs[i] % A, smp.next_state, y[i]});
    }
    res.q[h - 1] = fit_pairs(m, k, pairs, y, static_cast<double>(H - h + 1));
    res.q_tables[h - 1] = res.q[h - 1].estimate.evaluate(m.sa_points());
  }
  res.policy = greedy_policy(S, A, res.q_tables);
  return res;
}

std::vector<std::vector<std::size_t>> iid_sample_sets(const MdpSpec& m, const std::vector<double>& nu_pairs,
                                                      std::size_t n, Rng& rng) {
  std::vector<std::vector<std::size_t>> sets(m.horizon());
  for (auto& s : sets) s = draw_pairs(nu_pairs, n * n, rng);
  return sets;
}

double policy_gap(const MdpSpec& m, const Policy& pi) {
  return optimal_value_and_policy(m).value - total_reward(m, pi);
}

BellmanDiagnostic bellman_assumption_check(const MdpSpec& m, const KernelSpec& k, std::size_t samples, double g_norm,
                                           Rng& rng, double tol) {
  const std::size_t S = m.num_states(), A = m.num_actions(), P = m.num_pairs();
  const Eigen::MatrixXd kp = k.gram(m.sa_points());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kp);
  const Eigen::VectorXd& d = eig.eigenvalues();
  const double dmax = d.maxCoeff();
  const Eigen::MatrixXd& u = eig.eigenvectors();

  // Minimum-norm interpolant norm sqrt(v^T K^+ v); inf when v leaves range(K).
  auto interp_norm = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd proj = u.transpose() * v;
    double s = 0.0, outside = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d(i) >= kRankTolerance * dmax) {
        s += proj(i) * proj(i) / d(i);
      } else {
        outside += proj(i) * proj(i);
      }
    }
    if (outside > 1e-16 * std::max(1.0, v.squaredNorm())) return std::numeric_limits<double>::infinity();
    return std::sqrt(s);
  };

  BellmanDiagnostic diag;
  diag.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < samples; ++t) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(P));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.normal();
    const double raw = std::sqrt(std::max(c.dot(kp * c), 0.0));
    if (raw == 0.0) continue;
    c *= g_norm / raw;
    const Eigen::VectorXd g = kp * c;
    std::vector<double> vmax(S);
    for (std::size_t s = 0; s < S; ++s) {
      double best = g(static_cast<Eigen::Index>(s * A));
      for (std::size_t a = 1; a < A; ++a) best = std::max(best, g(static_cast<Eigen::Index>(s * A + a)));
      vmax[s] = best;
    }
    for (std::size_t h = 1; h <= m.horizon(); ++h) {
      Eigen::VectorXd tg(static_cast<Eigen::Index>(P));
      for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
          double cont = 0.0;
          for (const auto& [s2, p] : m.dynamics().row(h, s, a)) cont += p * vmax[s2];
          tg(static_cast<Eigen::Index>(s * A + a)) = m.reward_tables()[h - 1][s * A + a] + cont;
        }
      }
      diag.max_excess = std::max(diag.max_excess, interp_norm(tg) - g_norm);
    }
    ++diag.samples;
  }
  diag.holds = diag.max_excess <= 1.0 + tol;
  return diag;
}

}  // namespace mlab
