#include "mlab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "mlab/constants.hpp"
#include "mlab/errors.hpp"
#include "mlab/parallel.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// ResponseSolver

ResponseSolver::ResponseSolver(const KernelSpec& k, const DiscreteMeasure& nu, const PointSet& eval_points)
    : kernel_(k), joint_(k.input_dim()) {
  if (!nu.is_probability()) throw InvalidArgument("base measure must be a probability measure");
  if (nu.dim() != k.input_dim() || eval_points.dim() != k.input_dim()) {
    throw DomainError("measure or evaluation points do not match the kernel dimension");
  }
  if (eval_points.empty()) throw InvalidArgument("response solver needs at least one evaluation point");

  std::map<Point, std::size_t> seen;
  auto intern = [&](const Point& p) {
    auto [it, inserted] = seen.emplace(p, joint_.size());
    if (inserted) joint_.push_back(p);
    return it->second;
  };
  std::vector<std::size_t> nu_index(nu.size());
  for (std::size_t j = 0; j < nu.size(); ++j) nu_index[j] = intern(nu.points().point(j));
  eval_index_.resize(eval_points.size());
  for (std::size_t j = 0; j < eval_points.size(); ++j) eval_index_[j] = intern(eval_points.point(j));

  const auto nz = static_cast<Eigen::Index>(joint_.size());
  Eigen::VectorXd wz = Eigen::VectorXd::Zero(nz);
  for (std::size_t j = 0; j < nu.size(); ++j) wz(static_cast<Eigen::Index>(nu_index[j])) += nu.weights()[j];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> keig(k.gram(joint_));
  if (keig.info() != Eigen::Success) throw ConvergenceError("Gram eigensolver failed");
  const Eigen::VectorXd& d = keig.eigenvalues();
  const double dmax = d(nz - 1);
  if (!(dmax > 0.0)) throw ConsistencyError("Gram matrix has no positive eigenvalue");
  if (d(0) < -1e-8 * dmax) throw ConsistencyError("Gram matrix is not positive semi-definite");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = nz - 1; i >= 0; --i) {
    if (d(i) >= kRankTolerance * dmax) keep.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd phi(nz, r), inv_half(nz, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const double dc = d(keep[static_cast<std::size_t>(c)]);
    phi.col(c) = keig.eigenvectors().col(keep[static_cast<std::size_t>(c)]) * std::sqrt(dc);
    inv_half.col(c) = keig.eigenvectors().col(keep[static_cast<std::size_t>(c)]) / std::sqrt(dc);
  }

  Eigen::MatrixXd g = phi.transpose() * wz.asDiagonal() * phi;
  g = (g + g.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> geig(g);
  if (geig.info() != Eigen::Success) throw ConvergenceError("weighted Gram eigensolver failed");
  gamma_ = geig.eigenvalues().cwiseMax(0.0);
  const double gmax = gamma_.size() > 0 ? gamma_.maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < gamma_.size(); ++i) {
    if (gamma_(i) < kRankTolerance * gmax) gamma_(i) = 0.0;
  }
  const Eigen::MatrixXd& v = geig.eigenvectors();
  coeff_map_ = inv_half * v;
  eval_features_.resize(static_cast<Eigen::Index>(eval_index_.size()), r);
  const Eigen::MatrixXd phi_v = phi * v;
  for (std::size_t j = 0; j < eval_index_.size(); ++j) {
    eval_features_.row(static_cast<Eigen::Index>(j)) = phi_v.row(static_cast<Eigen::Index>(eval_index_[j]));
  }
}

ResponseSolver::Solution ResponseSolver::solve(std::span<const double> rho_weights, double eps) const {
  if (rho_weights.size() != num_eval()) throw InvalidArgument("rho weights must cover every evaluation point");
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rank()));
  for (std::size_t j = 0; j < rho_weights.size(); ++j) {
    if (rho_weights[j] != 0.0) alpha += rho_weights[j] * eval_features_.row(static_cast<Eigen::Index>(j)).transpose();
  }
  return solve_alpha(alpha, eps);
}

ResponseSolver::Solution ResponseSolver::solve_dirac(std::size_t j, double eps) const {
  if (j >= num_eval()) throw DomainError("Dirac index out of range");
  return solve_alpha(eval_features_.row(static_cast<Eigen::Index>(j)).transpose(), eps);
}

ResponseSolver::Solution ResponseSolver::solve_alpha(const Eigen::VectorXd& alpha, double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive and finite");
  const double e2 = eps * eps;
  Solution sol;
  sol.epsilon = eps;
  const Eigen::ArrayXd a2 = alpha.array().square();
  const Eigen::ArrayXd gam = gamma_.array();
  sol.spectral_sq = (e2 * a2 / (gam + e2)).sum();
  sol.v = Eigen::VectorXd::Zero(alpha.size());

  const double norm_sq = a2.sum();
  if (norm_sq == 0.0) return sol;
  const double norm = std::sqrt(norm_sq);

  // Only the RKHS ball binds.
  if ((gam * a2).sum() <= e2 * norm_sq) {
    sol.v = alpha / norm;
    sol.value = norm;
    sol.active = Active::rkhs_ball;
    return sol;
  }

  // Only the L^2 ball binds; needs alpha orthogonal to the null space of G.
  bool in_range = true;
  for (Eigen::Index i = 0; i < gam.size(); ++i) {
    if (gam(i) == 0.0 && a2(i) > 0.0) {
      in_range = false;
      break;
    }
  }
  if (in_range) {
    double s1 = 0.0, s2 = 0.0;
    for (Eigen::Index i = 0; i < gam.size(); ++i) {
      if (gam(i) == 0.0) continue;
      s1 += a2(i) / gam(i);
      s2 += a2(i) / (gam(i) * gam(i));
    }
    if (e2 * s2 <= s1) {
      const double scale = eps / std::sqrt(s1);
      for (Eigen::Index i = 0; i < gam.size(); ++i) sol.v(i) = gam(i) == 0.0 ? 0.0 : scale * alpha(i) / gam(i);
      sol.value = eps * std::sqrt(s1);
      sol.active = Active::l2_ball;
      return sol;
    }
  }

  // Both bind: v = alpha / (1 + t gamma) up to scale, where t > 0 is the root of
  // F(t) = sum (gamma - eps^2) alpha^2 / (1 + t gamma)^2, i.e. the derivative sign
  // of the quasi-convex reduced dual. F(0) > 0 here and F < 0 for large t.
  auto f = [&](double log_t) {
    const double t = std::exp(log_t);
    const Eigen::ArrayXd den = 1.0 + t * gam;
    return ((gam - e2) * a2 / den.square()).sum();
  };
  double lo = -80.0, hi = 80.0;
  while (f(lo) <= 0.0 && lo > -700.0) lo -= 80.0;
  while (f(hi) >= 0.0 && hi < 700.0) hi += 80.0;
  if (f(lo) <= 0.0 || f(hi) >= 0.0) {
    throw ConvergenceError("two-ball solver could not bracket the multiplier ratio (eps=" + std::to_string(eps) + ")");
  }
  int it = 0;
  for (; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo > 1e-13) {
    throw ConvergenceError("two-ball bisection did not converge in 200 iterations (bracket width " +
                           std::to_string(hi - lo) + ")");
  }
  const double t = std::exp(0.5 * (lo + hi));
  Eigen::VectorXd v = (alpha.array() / (1.0 + t * gam)).matrix();
  const double hn = v.norm();
  const double ln = std::sqrt((gam * v.array().square()).sum()) / eps;
  v /= std::max(hn, ln);
  sol.v = v;
  sol.value = alpha.dot(v);
  sol.active = Active::both;
  sol.iterations = it;
  sol.ratio = t;
  return sol;
}

RkhsExpansion ResponseSolver::witness(const Solution& s) const {
  const Eigen::VectorXd c = coeff_map_ * s.v;
  return RkhsExpansion(kernel_, joint_, std::vector<double>(c.data(), c.data() + c.size()));
}

Eigen::VectorXd ResponseSolver::witness_values(const Solution& s) const { return eval_features_ * s.v; }

double ResponseSolver::witness_l2_norm(const Solution& s) const {
  return std::sqrt((gamma_.array() * s.v.array().square()).sum());
}

// ---------------------------------------------------------------------------
// Spectral closed form and single-rho primal

double spectral_response_sq(const SpectralBasis& b, const DiscreteMeasure& rho, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
  const Eigen::VectorXd c = project_measure(b, rho);
  const double e2 = eps * eps;
  double s = 0.0, captured = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double lam = b.eigenvalues()[static_cast<std::size_t>(i)];
    const double lc2 = lam * c(i) * c(i);
    captured += lc2;
    s += e2 * lc2 / (lam + e2);
  }
  const Eigen::MatrixXd kr = b.kernel().gram(rho.points());
  const Eigen::Map<const Eigen::VectorXd> w(rho.weights().data(), static_cast<Eigen::Index>(rho.size()));
  const double mu_sq = w.dot(kr * w);
  double residual = mu_sq - captured;
  if (residual < 0.0) {
    if (residual < -1e-8 * std::max(1.0, mu_sq)) throw ConsistencyError("projection exceeds the mean embedding norm");
    residual = 0.0;
  }
  return s + residual;
}

PrimalResult primal_response(const KernelSpec& k, const DiscreteMeasure& nu, double eps, const DiscreteMeasure& rho) {
  if (!rho.is_probability()) throw InvalidArgument("rho must be a probability measure");
  const ResponseSolver solver(k, nu, rho.points());
  const auto sol = solver.solve(rho.weights(), eps);
  PrimalResult r;
  r.value = sol.value;
  r.lower_bracket = std::sqrt(sol.spectral_sq);
  r.upper_bracket = std::sqrt(2.0 * sol.spectral_sq);
  r.witness = solver.witness(sol);
  r.active = sol.active;
  r.iterations = sol.iterations;
  return r;
}

const char* search_mode_name(SearchMode m) {
  switch (m) {
    case SearchMode::enumerate:
      return "enumerate";
    case SearchMode::ascent:
      return "ascent";
    case SearchMode::dirac_sup:
      return "dirac_sup";
  }
  return "unknown";
}

SearchMode parse_search_mode(const std::string& name) {
  if (name == "enumerate") return SearchMode::enumerate;
  if (name == "ascent") return SearchMode::ascent;
  if (name == "dirac_sup") return SearchMode::dirac_sup;
  throw InvalidArgument("unknown search mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Search over occupancy sets

namespace {

constexpr double kTieTolerance = 1e-9;

struct Candidate {
  double value = -1.0;
  ResponseSolver::Solution sol;
  std::vector<double> rho;
  Policy policy;
  std::size_t h = 0;
};

std::vector<std::size_t> resolve_steps(const MdpSpec& m, const PiSearchOptions& opt) {
  std::vector<std::size_t> steps = opt.steps;
  if (steps.empty()) {
    steps.resize(m.horizon());
    std::iota(steps.begin(), steps.end(), std::size_t{1});
  }
  for (std::size_t h : steps) {
    if (h < 1 || h > m.horizon()) throw DomainError("search step " + std::to_string(h) + " outside [1, H]");
  }
  return steps;
}

std::size_t count_ties(const std::vector<double>& values, double best) {
  std::size_t n = 0;
  for (double v : values) n += (v >= best - kTieTolerance) ? 1 : 0;
  return n;
}

ResponseReport make_report(const MdpSpec& m, const ResponseSolver& solver, const Candidate& best, SearchMode mode,
                           int iterations, std::size_t ties) {
  ResponseReport rep;
  rep.value = best.sol.value;
  rep.lower_bracket = std::sqrt(best.sol.spectral_sq);
  rep.upper_bracket = std::sqrt(2.0 * best.sol.spectral_sq);
  rep.epsilon = best.sol.epsilon;
  rep.witness = solver.witness(best.sol);
  rep.maximizer = m.pair_measure(best.rho);
  rep.policy = best.policy;
  rep.mode = mode;
  rep.iterations = iterations;
  rep.h_star = best.h;
  rep.ties = ties;
  rep.witness_rkhs_norm = solver.witness_rkhs_norm(best.sol);
  rep.witness_l2_norm = solver.witness_l2_norm(best.sol);
  return rep;
}

ResponseReport enumerate_search(const MdpSpec& m, const ResponseSolver& solver, double eps,
                                const std::vector<std::size_t>& steps, const PiSearchOptions& opt) {
  const std::size_t S = m.num_states(), A = m.num_actions(), H = m.horizon();
  const double count = std::pow(static_cast<double>(A), static_cast<double>(S * H));
  if (count > opt.enumerate_budget) {
    throw BudgetError("enumerating " + std::to_string(count) + " deterministic policies exceeds the budget of " +
                      std::to_string(opt.enumerate_budget) + "; use ascent mode");
  }
  Candidate best;
  std::vector<double> values;
  int evaluated = 0;
  for (std::size_t h : steps) {
    // Occupancy at step h depends on the policy at steps 1..h only.
    const std::size_t digits = S * h;
    std::vector<std::size_t> actions(S * H, 0);
    while (true) {
      const Policy pi = Policy::deterministic(S, A, H, actions);
      std::vector<double> rho = occupancy_vector(m.dynamics(), m.init(), pi, h);
      auto sol = solver.solve(rho, eps);
      ++evaluated;
      values.push_back(sol.value);
      if (sol.value > best.value) best = Candidate{sol.value, std::move(sol), std::move(rho), pi, h};
      std::size_t pos = 0;
      while (pos < digits && ++actions[pos] == A) actions[pos++] = 0;
      if (pos == digits) break;
    }
  }
  return make_report(m, solver, best, SearchMode::enumerate, evaluated, count_ties(values, best.value));
}

ResponseReport ascent_search(const MdpSpec& m, const ResponseSolver& solver, double eps,
                             const std::vector<std::size_t>& steps, const PiSearchOptions& opt) {
  const std::size_t S = m.num_states(), A = m.num_actions(), H = m.horizon();
  const std::size_t P = m.num_pairs();

  // Dirac responses order the seeds: a Dirac witness is the best guess for a
  // reward that some policy can concentrate on.
  std::vector<std::pair<double, std::size_t>> dirac(P);
  for (std::size_t j = 0; j < P; ++j) dirac[j] = {solver.solve_dirac(j, eps).value, j};
  std::stable_sort(dirac.begin(), dirac.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  const std::size_t seeds = std::min(opt.dirac_starts, P);

  Candidate best;
  std::vector<double> best_trace;
  std::vector<double> values;
  int rounds_total = 0;

  auto best_response = [&](std::size_t h, const Eigen::VectorXd& g) {
    std::vector<double> vals(g.data(), g.data() + g.size());
    return optimal_value_and_policy(m.dynamics(), m.init(), single_step_reward(H, h, std::move(vals))).policy;
  };

  for (std::size_t h : steps) {
    std::vector<Policy> starts;
    starts.push_back(Policy::uniform(S, A, H));
    for (std::size_t q = 0; q < seeds; ++q) {
      const auto sol = solver.solve_dirac(dirac[q].second, eps);
      starts.push_back(best_response(h, solver.witness_values(sol)));
    }
    for (const Policy& start : starts) {
      Policy pi = start;
      std::vector<double> rho = occupancy_vector(m.dynamics(), m.init(), pi, h);
      auto sol = solver.solve(rho, eps);
      std::vector<double> trace{sol.value};
      for (int round = 0; round < opt.max_rounds; ++round) {
        ++rounds_total;
        Policy next_pi = best_response(h, solver.witness_values(sol));
        std::vector<double> next_rho = occupancy_vector(m.dynamics(), m.init(), next_pi, h);
        auto next = solver.solve(next_rho, eps);
        if (!(next.value > sol.value + opt.improvement_tol)) break;
        trace.push_back(next.value);
        pi = std::move(next_pi);
        rho = std::move(next_rho);
        sol = std::move(next);
      }
      values.push_back(sol.value);
      if (sol.value > best.value) {
        best = Candidate{sol.value, sol, rho, pi, h};
        best_trace = trace;
      }
    }
  }
  ResponseReport rep = make_report(m, solver, best, SearchMode::ascent, rounds_total, count_ties(values, best.value));
  rep.trace = std::move(best_trace);
  return rep;
}

}  // namespace

ResponseReport response_over_pi(const MdpSpec& m, const ResponseSolver& solver, double eps,
                                const PiSearchOptions& options) {
  if (solver.num_eval() != m.num_pairs()) throw InvalidArgument("solver evaluation points must be the MDP's pairs");
  const auto steps = resolve_steps(m, options);
  switch (options.mode) {
    case SearchMode::enumerate:
      return enumerate_search(m, solver, eps, steps, options);
    case SearchMode::ascent:
      return ascent_search(m, solver, eps, steps, options);
    case SearchMode::dirac_sup:
      break;
  }
  throw InvalidArgument("response_over_pi supports enumerate and ascent modes");
}

ResponseReport response_over_pi(const MdpSpec& m, const KernelSpec& k, const DiscreteMeasure& nu, double eps,
                                const PiSearchOptions& options) {
  const ResponseSolver solver(k, nu, m.sa_points());
  return response_over_pi(m, solver, eps, options);
}

ResponseReport response_sup_all_measures(const ResponseSolver& solver, double eps) {
  std::size_t best_j = 0;
  ResponseSolver::Solution best;
  best.value = -1.0;
  std::vector<double> values(solver.num_eval());
  for (std::size_t j = 0; j < solver.num_eval(); ++j) {
    auto sol = solver.solve_dirac(j, eps);
    values[j] = sol.value;
    if (sol.value > best.value) {
      best = std::move(sol);
      best_j = j;
    }
  }
  ResponseReport rep;
  rep.value = best.value;
  rep.lower_bracket = std::sqrt(best.spectral_sq);
  rep.upper_bracket = std::sqrt(2.0 * best.spectral_sq);
  rep.epsilon = eps;
  rep.witness = solver.witness(best);
  rep.maximizer = DiscreteMeasure::dirac(solver.eval_point(best_j));
  rep.mode = SearchMode::dirac_sup;
  rep.iterations = static_cast<int>(solver.num_eval());
  rep.ties = count_ties(values, best.value);
  rep.witness_rkhs_norm = solver.witness_rkhs_norm(best);
  rep.witness_l2_norm = solver.witness_l2_norm(best);
  return rep;
}

ResponseReport response_sup_all_measures(const KernelSpec& k, const DiscreteMeasure& nu, double eps,
                                         const PointSet& grid) {
  if (grid.empty()) throw InvalidArgument("response_sup_all_measures needs a nonempty grid");
  const ResponseSolver solver(k, nu, grid);
  return response_sup_all_measures(solver, eps);
}

// ---------------------------------------------------------------------------
// Complexity

std::vector<NamedMeasure> default_nu_candidates(const MdpSpec& m, std::uint64_t seed, std::size_t random_policies) {
  const std::size_t S = m.num_states(), A = m.num_actions(), H = m.horizon(), P = m.num_pairs();
  std::vector<NamedMeasure> out;
  out.push_back({"uniform", m.pair_measure(std::vector<double>(P, 1.0 / static_cast<double>(P)))});
  std::vector<double> mixture(P, 0.0);
  for (std::size_t r = 0; r < random_policies; ++r) {
    Rng rng(seed, r);
    std::vector<std::size_t> actions(S * H);
    for (auto& a : actions) a = static_cast<std::size_t>(rng.uniform_index(A));
    const auto occ = occupancy_all(m.dynamics(), m.init(), Policy::deterministic(S, A, H, actions));
    std::vector<double> visit(P, 0.0);
    for (const auto& step : occ) {
      for (std::size_t i = 0; i < P; ++i) visit[i] += step[i] / static_cast<double>(H);
    }
    for (std::size_t i = 0; i < P; ++i) mixture[i] += visit[i] / static_cast<double>(random_policies);
    char id[32];
    std::snprintf(id, sizeof id, "policy_%02zu", r);
    out.push_back({id, m.pair_measure(visit)});
  }
  if (random_policies > 0) out.push_back({"mixture", m.pair_measure(mixture)});
  return out;
}

ComplexityReport complexity_known(const MdpSpec& m, const KernelSpec& k, double eps,
                                  const std::vector<NamedMeasure>& candidates, const PiSearchOptions& options) {
  if (candidates.empty()) throw InvalidArgument("complexity_known needs at least one candidate");
  ComplexityReport rep;
  rep.epsilon = eps;
  auto reports = parallel_map<ResponseReport>(candidates.size(), [&](std::size_t i) {
    return response_over_pi(m, k, candidates[i].nu, eps, options);
  });
  rep.value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (reports[i].value < rep.value) {
      rep.value = reports[i].value;
      rep.best = i;
    }
    rep.per_candidate.push_back({candidates[i].id, candidates[i].nu, std::move(reports[i])});
  }
  return rep;
}

std::vector<double> pushforward_uniform_actions(const Dynamics& p, const std::vector<double>& lambda) {
  const std::size_t S = p.num_states(), A = p.num_actions(), H = p.horizon();
  if (lambda.size() != H * S * A) throw InvalidArgument("sampler lambda must have H*S*A entries");
  std::vector<double> out(S * A, 0.0);
  for (std::size_t h = 1; h <= H; ++h) {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        const double w = lambda[((h - 1) * S + s) * A + a];
        if (w == 0.0) continue;
        for (const auto& [s2, q] : p.row(h, s, a)) {
          for (std::size_t b = 0; b < A; ++b) out[s2 * A + b] += w * q / static_cast<double>(A);
        }
      }
    }
  }
  return out;
}

std::vector<double> sampler_marginal(const Dynamics& p, const Sampler& sampler) {
  const std::size_t S = p.num_states(), A = p.num_actions(), H = p.horizon();
  if (sampler.lambda.size() != H * S * A) throw InvalidArgument("sampler lambda must have H*S*A entries");
  double total = 0.0;
  for (double w : sampler.lambda) {
    if (!(w >= 0.0)) throw InvalidArgument("sampler lambda has a negative entry");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("sampler lambda must sum to one");
  std::vector<double> marginal(S * A, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < S * A; ++i) marginal[i] += sampler.lambda[h * S * A + i];
  }
  if (sampler.kind == Sampler::Kind::fixed) return marginal;
  const auto bar = pushforward_uniform_actions(p, sampler.lambda);
  for (std::size_t i = 0; i < marginal.size(); ++i) marginal[i] = 0.5 * marginal[i] + 0.5 * bar[i];
  return marginal;
}

UnknownComplexityReport complexity_unknown(const std::vector<MdpSpec>& family, const KernelSpec& k, double eps,
                                           const std::vector<Sampler>& samplers, const PiSearchOptions& options) {
  if (family.empty()) throw InvalidArgument("complexity_unknown needs a nonempty family");
  if (samplers.empty()) throw InvalidArgument("complexity_unknown needs at least one sampler");
  const MdpSpec& first = family.front();
  for (const auto& m : family) {
    if (m.num_states() != first.num_states() || m.num_actions() != first.num_actions() ||
        m.horizon() != first.horizon() || m.init() != first.init()) {
      throw InvalidArgument("family members must share S, A, H and mu");
    }
  }
  const std::size_t T = family.size();
  auto values = parallel_map<double>(samplers.size() * T, [&](std::size_t task) {
    const Sampler& sampler = samplers[task / T];
    const MdpSpec& m = family[task % T];
    const DiscreteMeasure nu = m.pair_measure(sampler_marginal(m.dynamics(), sampler));
    return response_over_pi(m, k, nu, eps, options).value;
  });
  UnknownComplexityReport rep;
  rep.epsilon = eps;
  rep.value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samplers.size(); ++i) {
    SamplerResult sr;
    sr.id = samplers[i].id;
    sr.per_theta.assign(values.begin() + static_cast<std::ptrdiff_t>(i * T),
                        values.begin() + static_cast<std::ptrdiff_t>((i + 1) * T));
    sr.value = -1.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (sr.per_theta[t] > sr.value) {
        sr.value = sr.per_theta[t];
        sr.worst_theta = t;
      }
    }
    if (sr.value < rep.value) {
      rep.value = sr.value;
      rep.best = i;
    }
    rep.per_sampler.push_back(std::move(sr));
  }
  return rep;
}

}  // namespace mlab
