#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "internal.hpp"
#include "mlab/adversary.hpp"
#include "mlab/fitting.hpp"
#include "mlab/spectral.hpp"

namespace mlab::harness {

namespace {

std::vector<double> simplex(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) total += (x = rng.uniform());
  for (auto& x : w) x /= total;
  return w;
}

MdpSpec random_mdp(const MdpSource& src, const KernelSpec& k) {
  const std::size_t S = src.states, A = src.actions, H = src.horizon;
  Rng rng(src.seed, 0);
  std::vector<Dynamics::Row> rows;
  rows.reserve(S * A * H);
  for (std::size_t i = 0; i < S * A * H; ++i) {
    const auto p = simplex(S, rng);
    Dynamics::Row row;
    for (std::size_t s2 = 0; s2 < S; ++s2) row.push_back({s2, p[s2]});
    rows.push_back(std::move(row));
  }
  auto dyn = std::make_shared<const Dynamics>(S, A, H, std::move(rows));
  PointSet coords(1);
  for (std::size_t s = 0; s < S; ++s) coords.push_back(std::vector<double>{static_cast<double>(s) / static_cast<double>(S)});
  const auto init = simplex(S, rng);
  MdpSpec base(dyn, coords, ActionEncoding::one_hot, init,
               std::vector<RkhsExpansion>(H, RkhsExpansion::zero(k, 1 + A)));
  std::vector<RkhsExpansion> rewards;
  for (std::size_t h = 0; h < H; ++h) {
    std::vector<double> c(base.num_pairs());
    for (auto& x : c) x = rng.normal();
    RkhsExpansion f(k, base.sa_points(), c);
    const double norm = rkhs_norm(f);
    rewards.push_back(f.scaled(norm > 0.0 ? src.reward_norm / norm : 0.0));
  }
  return base.with_rewards(std::move(rewards));
}

}  // namespace

MdpSpec build_mdp(const MdpSource& src, const Json& kernel_json, const std::filesystem::path& base_dir) {
  (void)base_dir;  // file sources are read while the config is parsed
  if (src.generator == "random") {
    return random_mdp(src, kernel_from_json(kernel_json, 1 + src.actions));
  }
  if (src.generator == "two_state") {
    // State 1 is only entered by action 1 and is absorbing.
    const KernelSpec k = kernel_from_json(kernel_json, std::size_t{3});
    const std::vector<Dynamics::Row> rows{{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{1, 1.0}}};
    auto dyn = std::make_shared<const Dynamics>(Dynamics::stationary(2, 2, src.horizon, rows));
    return MdpSpec(dyn, PointSet(1, {{0.0}, {1.0}}), ActionEncoding::one_hot, {1.0, 0.0},
                   std::vector<RkhsExpansion>(src.horizon, RkhsExpansion::zero(k, 3)));
  }
  return mdp_from_json(src.spec);
}

KernelSpec build_kernel(const Json& kernel_json, const MdpSpec& m) {
  KernelSpec k = kernel_from_json(kernel_json, m.point_dim());
  if (k.input_dim() != m.point_dim()) {
    throw InvalidArgument("kernel input_dim " + std::to_string(k.input_dim()) + " does not match the MDP point dimension " +
                          std::to_string(m.point_dim()));
  }
  return k;
}

namespace detail {

namespace {

std::string label_n(std::size_t n) { return "n" + std::to_string(n); }

Json slope_json(const std::vector<double>& n, const std::vector<double>& v) {
  try {
    const SlopeFit f = fit_slope(n, v);
    return Json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
  } catch (const Error& e) {
    return Json{{"error", e.what()}};
  }
}

/// Per-n medians of a column, over the n values present in the rows.
struct Medians {
  std::vector<double> n, value;
};

Medians medians_by_n(const std::vector<Json>& rows, const std::vector<std::size_t>& n_grid, const std::string& column,
                     const std::string& key = "", double key_value = 0.0) {
  Medians m;
  for (auto n : n_grid) {
    std::vector<double> vals;
    for (const auto& r : rows) {
      if (r.at("n").get<double>() != static_cast<double>(n)) continue;
      if (!key.empty() && r.at(key).get<double>() != key_value) continue;
      vals.push_back(r.at(column).get<double>());
    }
    if (vals.empty()) continue;
    m.n.push_back(static_cast<double>(n));
    m.value.push_back(median(vals));
  }
  return m;
}

std::string samples_csv(const std::vector<SampleRecord>& log) {
  std::string out = "h,s,a,next_state,y\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%.17g\n", r.h, r.s, r.a, r.next_state, r.y);
    out += buf;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Experiment make_eigdecay(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const auto& p = c.eigdecay;
  const KernelSpec k = kernel_from_json(p.kernel);
  PointSet grid(1);
  for (std::size_t j = 0; j < p.grid; ++j) {
    grid.push_back(std::vector<double>{2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(p.grid)});
  }
  Experiment ex;
  for (auto seed : seeds) {
    ex.tasks.push_back({seed, "all_n", [=, &c] {
                          DiscreteMeasure nu;
                          if (p.nu == "uniform") {
                            nu = DiscreteMeasure::uniform(grid);
                          } else {
                            Rng rng(seed, 0);
                            std::vector<double> counts(p.grid, 0.0);
                            for (std::size_t i = 0; i < p.nu_samples; ++i) counts[rng.uniform_index(p.grid)] += 1.0;
                            PointSet support(1);
                            std::vector<double> w;
                            for (std::size_t j = 0; j < p.grid; ++j) {
                              if (counts[j] == 0.0) continue;
                              support.push_back(grid.point(j));
                              w.push_back(counts[j] / static_cast<double>(p.nu_samples));
                            }
                            nu = DiscreteMeasure::probability(std::move(support), std::move(w));
                          }
                          const ResponseSolver solver(k, nu, grid);
                          const auto eig = mercer_decompose(k, nu).eigenvalues();
                          TaskRows out;
                          for (auto n : c.n_grid) {
                            const double eps = c.epsilon_for(n);
                            const auto r = response_sup_all_measures(solver, eps);
                            const double nd = static_cast<double>(n);
                            const std::size_t ni = effective_index(eig, nd);
                            const double tail = tail_sum(eig, ni);
                            const double lo = 0.5 * std::sqrt(tail);
                            const double hi = 2.0 * std::sqrt(static_cast<double>(ni) / nd + tail) * std::sqrt(2.0);
                            out.rows.push_back(Json{{"seed", seed},
                                                    {"n", n},
                                                    {"epsilon", eps},
                                                    {"response", r.value},
                                                    {"lower_bracket", r.lower_bracket},
                                                    {"upper_bracket", r.upper_bracket},
                                                    {"effective_index", ni},
                                                    {"tail", tail},
                                                    {"sandwich_lower", lo},
                                                    {"sandwich_upper", hi},
                                                    {"within_sandwich", r.value >= lo - 1e-8 && r.value <= hi + 1e-8}});
                          }
                          return out;
                        }});
  }
  ex.summarize = [&c, decay = p.kernel.contains("decay") ? std::optional<double>(p.kernel.at("decay").get<double>())
                                                        : std::nullopt](const std::vector<Json>& rows) {
    const auto m = medians_by_n(rows, c.n_grid, "response");
    Json j{{"median_response", m.value}, {"n", m.n}, {"fit", slope_json(m.n, m.value)}};
    std::size_t violations = 0;
    for (const auto& r : rows) violations += !r.at("within_sandwich").get<bool>();
    j["sandwich_violations"] = violations;
    if (decay) j["predicted_slope"] = -(*decay - 1.0) / (2.0 * *decay);
    return j;
  };
  return ex;
}

// ---------------------------------------------------------------------------

Experiment make_concentration(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const auto& p = c.concentration;
  // A single-action cycle started at state 0: the step-h occupancy is the
  // Dirac at state h-1, so Pi is the set of Diracs on the states and the
  // L^2(nu) density ratio against uniform nu is sqrt(S).
  const std::size_t S = p.states;
  std::vector<Dynamics::Row> rows;
  for (std::size_t s = 0; s < S; ++s) rows.push_back({{(s + 1) % S, 1.0}});
  auto dyn = std::make_shared<const Dynamics>(Dynamics::stationary(S, 1, S, rows));
  PointSet coords(1);
  for (std::size_t s = 0; s < S; ++s) coords.push_back(std::vector<double>{static_cast<double>(s) / static_cast<double>(S)});
  std::vector<double> init(S, 0.0);
  init[0] = 1.0;
  const KernelSpec k = KernelSpec::gaussian(p.bandwidth, 1);
  const MdpSpec m(dyn, coords, ActionEncoding::none, init, std::vector<RkhsExpansion>(S, RkhsExpansion::zero(k, 1)));

  Experiment ex;
  for (auto seed : seeds) {
    ex.tasks.push_back({seed, "all_n", [=, &c] {
                          const std::vector<double> w(m.num_pairs(), 1.0 / static_cast<double>(m.num_pairs()));
                          const DiscreteMeasure nu = m.pair_measure(w);
                          // sup over Pi of ||d rho / d nu||_{L^2(nu)}; the only policy suffices here.
                          double ratio = 0.0;
                          const auto occ = occupancy_all(m.dynamics(), m.init(), Policy::uniform(S, 1, S));
                          for (const auto& step : occ) {
                            double sq = 0.0;
                            for (std::size_t i = 0; i < step.size(); ++i) sq += step[i] * step[i] / w[i];
                            ratio = std::max(ratio, std::sqrt(sq));
                          }
                          const ResponseSolver solver(k, nu, m.sa_points());
                          TaskRows out;
                          for (auto n : c.n_grid) {
                            const double eps = c.epsilon_for(n);
                            const auto r = response_over_pi(m, solver, eps);
                            const double bound = 2.0 * ratio * eps;
                            out.rows.push_back(Json{{"seed", seed},
                                                    {"n", n},
                                                    {"epsilon", eps},
                                                    {"response", r.value},
                                                    {"density_ratio", ratio},
                                                    {"bound", bound},
                                                    {"within_bound", r.value <= bound}});
                          }
                          return out;
                        }});
  }
  ex.summarize = [&c](const std::vector<Json>& rows) {
    std::size_t violations = 0;
    double ratio = 0.0;
    for (const auto& r : rows) {
      violations += !r.at("within_bound").get<bool>();
      ratio = r.at("density_ratio").get<double>();
    }
    const auto m = medians_by_n(rows, c.n_grid, "response");
    return Json{{"bound_violations", violations},
                {"density_ratio", ratio},
                {"p", 2},
                {"median_response", m.value},
                {"fit", slope_json(m.n, m.value)}};
  };
  return ex;
}

// ---------------------------------------------------------------------------

namespace {

struct PerN {
  double delta_hat = 0.0;
  std::string best;
  std::vector<double> nu_pairs;
};

}  // namespace

Experiment make_fitted(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds, bool fqi) {
  const auto& p = c.fitted;
  const MdpSpec m = build_mdp(p.mdp, p.kernel, c.base_dir);
  const KernelSpec k = build_kernel(p.kernel, m);
  const auto candidates = default_nu_candidates(m, p.candidates_seed, p.random_policies);
  const double H = static_cast<double>(m.horizon());
  PiSearchOptions search;
  search.mode = p.mode;

  std::vector<Lazy<PerN>> per_n;
  for (auto n : c.n_grid) {
    per_n.emplace_back([=, &c] {
      const auto rep = complexity_known(m, k, c.epsilon_for(n), candidates, search);
      return PerN{rep.value, rep.per_candidate[rep.best].id, pair_weights_of(m, rep.best_nu())};
    });
  }
  const double j_star = optimal_value_and_policy(m).value;

  Experiment ex;
  for (auto seed : seeds) {
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      const std::size_t n = c.n_grid[i];
      ex.tasks.push_back({seed, label_n(n), [=, &c, lazy = per_n[i]] {
                            const PerN& pn = lazy.get();
                            Rng rng(seed, n);
                            FitOptions opts;
                            opts.record_samples = p.dump_samples;
                            Policy pi;
                            std::vector<SampleRecord> log;
                            double q_ratio = 0.0;
                            if (fqi) {
                              const auto sets = iid_sample_sets(m, pn.nu_pairs, n, rng);
                              auto r = fitted_q_iteration(m, k, sets, rng, opts);
                              for (std::size_t h = 0; h < r.q.size(); ++h) {
                                q_ratio = std::max(q_ratio, r.q[h].norm / (H - static_cast<double>(h)));
                              }
                              pi = std::move(r.policy);
                              log = std::move(r.log);
                            } else {
                              auto r = fitted_reward(m, k, pn.nu_pairs, n, rng, opts);
                              pi = std::move(r.policy);
                              log = std::move(r.log);
                            }
                            const double gap = policy_gap(m, pi);
                            const double nd = static_cast<double>(n);
                            const double log_factor = std::sqrt(1.0 + std::log(nd * H / p.p));
                            const double scale = (fqi ? H * H * H : H) * pn.delta_hat * log_factor;
                            Json row{{"seed", seed},
                                     {"n", n},
                                     {"epsilon", c.epsilon_for(n)},
                                     {"delta_hat", pn.delta_hat},
                                     {"best_candidate", pn.best},
                                     {"j_star", j_star},
                                     {"j_policy", j_star - gap},
                                     {"gap", gap},
                                     {"log_factor", log_factor},
                                     {"normalized_gap", scale > 0.0 ? gap / scale : 0.0}};
                            if (fqi) row["max_q_norm_ratio"] = q_ratio;
                            TaskRows out;
                            out.rows.push_back(std::move(row));
                            if (p.dump_samples) {
                              out.files.push_back({c.name + ".samples.seed" + std::to_string(seed) + ".n" +
                                                       std::to_string(n) + ".csv",
                                                   samples_csv(log)});
                            }
                            return out;
                          }});
    }
  }

  ex.summarize = [&c, p, fqi, m, k, seeds](const std::vector<Json>& rows) {
    const auto med = medians_by_n(rows, c.n_grid, "gap");
    bool monotone = true;
    for (std::size_t i = 1; i < med.value.size(); ++i) monotone &= med.value[i] <= med.value[i - 1];
    double c_fit = 0.0;
    for (const auto& r : rows) c_fit = std::max(c_fit, r.at("normalized_gap").get<double>());
    // The bound is claimed with probability 1 - p, so the matching constant is the
    // (1 - p) order statistic of the normalized gaps at each n, maximized over n.
    double c_quantile = 0.0;
    for (auto n : c.n_grid) {
      auto v = column_where(rows, "normalized_gap", "n", static_cast<double>(n));
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      const auto rank = static_cast<std::size_t>(std::ceil((1.0 - p.p) * static_cast<double>(v.size())));
      c_quantile = std::max(c_quantile, v[std::clamp<std::size_t>(rank, 1, v.size()) - 1]);
    }
    Json per_n = Json::array();
    for (auto n : c.n_grid) {
      for (const auto& r : rows) {
        if (r.at("n").get<std::size_t>() == n) {
          per_n.push_back(Json{{"n", n}, {"delta_hat", r.at("delta_hat")}, {"best_candidate", r.at("best_candidate")}});
          break;
        }
      }
    }
    Json j{{"n", med.n},
           {"median_gap", med.value},
           {"median_gap_nonincreasing", monotone},
           {"c_hat_fitted", c_fit},
           {"c_hat_quantile", c_quantile},
           {"bound", fqi ? "gap / (H^3 delta_hat sqrt(1 + log(nH/p)))" : "gap / (H delta_hat sqrt(1 + log(nH/p)))"},
           {"p", p.p},
           {"per_n", per_n}};
    if (p.c_hat) {
      j["c_hat"] = *p.c_hat;
      j["within_c_hat"] = c_fit <= *p.c_hat;
    }
    if (med.value.size() >= 2) {
      j["median_gap_last_over_first"] = med.value.front() > 0.0 ? med.value.back() / med.value.front() : 0.0;
    }
    // Constant fitted separately on the first and second half of the seeds.
    const std::size_t half = (seeds.size() + 1) / 2;
    if (seeds.size() >= 2) {
      double c1 = 0.0, c2 = 0.0;
      for (const auto& r : rows) {
        const auto s = r.at("seed").get<std::uint64_t>();
        const bool first = std::find(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(half), s) !=
                           seeds.begin() + static_cast<std::ptrdiff_t>(half);
        (first ? c1 : c2) = std::max(first ? c1 : c2, r.at("normalized_gap").get<double>());
      }
      j["c_hat_batches"] = {c1, c2};
      j["c_hat_batch_ratio"] = c1 > 0.0 ? c2 / c1 : 0.0;
    }
    if (fqi) {
      Rng rng(p.candidates_seed, 7);
      const auto d = bellman_assumption_check(m, k, p.bellman_samples, 1.0, rng);
      j["bellman_check"] = Json{{"max_excess", d.max_excess}, {"holds", d.holds}, {"samples", d.samples}};
    }
    return j;
  };
  return ex;
}

// ---------------------------------------------------------------------------

namespace {

struct SphereSetup {
  std::size_t grid = 0;
  double delta = 0.0;
  std::size_t horizon = 0;
};

SphereSetup sphere_setup(const SphereParams& p, std::size_t d, std::size_t n) {
  const double target = p.delta_scale * std::pow(static_cast<double>(n), -1.0 / (2.0 * static_cast<double>(d - 1)));
  SphereSetup s;
  s.grid = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(std::numbers::pi / target)));
  s.delta = std::numbers::pi / static_cast<double>(s.grid);
  s.horizon = static_cast<std::size_t>(std::ceil(p.horizon_constant * static_cast<double>(d - 1) / s.delta));
  return s;
}

std::size_t sphere_states(std::size_t d, std::size_t grid) {
  double s = 2.0 * static_cast<double>(grid);
  for (std::size_t i = 2; i < d; ++i) s *= static_cast<double>(grid);
  return static_cast<std::size_t>(s);
}

/// Response over the final-step occupancy set, and the sup over all measures.
std::pair<ResponseReport, ResponseReport> sphere_response(const SphereParams& p, std::size_t d, std::size_t horizon,
                                                          double delta, std::size_t grid, double eps) {
  if (sphere_states(d, grid) > p.max_states) {
    throw BudgetError("sphere grid has " + std::to_string(sphere_states(d, grid)) + " states, above max_states " +
                      std::to_string(p.max_states));
  }
  const SphereMdp sm = sphere_mdp_family(d, horizon, delta, grid);
  const MdpSpec& m = sm.mdp;
  const DiscreteMeasure nu = m.pair_measure(std::vector<double>(m.num_pairs(), 1.0 / static_cast<double>(m.num_pairs())));
  const ResponseSolver solver(sm.kernel, nu, m.sa_points());
  PiSearchOptions o;
  o.mode = SearchMode::ascent;
  o.steps = {horizon};
  o.dirac_starts = p.dirac_starts;
  return {response_over_pi(m, solver, eps, o), response_sup_all_measures(solver, eps)};
}

}  // namespace

Experiment make_sphere(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const auto& p = c.sphere;
  Experiment ex;
  for (auto seed : seeds) {
    for (auto d : p.dims) {
      for (auto n : c.n_grid) {
        ex.tasks.push_back({seed, "d" + std::to_string(d) + "_n" + std::to_string(n), [=, &c] {
                              const SphereSetup s = sphere_setup(p, d, n);
                              const double eps = c.epsilon_for(n);
                              const auto [r, sup] = sphere_response(p, d, s.horizon, s.delta, s.grid, eps);
                              TaskRows out;
                              out.rows.push_back(Json{{"seed", seed},
                                                      {"d", d},
                                                      {"n", n},
                                                      {"epsilon", eps},
                                                      {"grid_per_angle", s.grid},
                                                      {"delta", s.delta},
                                                      {"horizon", s.horizon},
                                                      {"states", sphere_states(d, s.grid)},
                                                      {"response", r.value},
                                                      {"dirac_sup", sup.value},
                                                      {"iterations", r.iterations}});
                              return out;
                            }});
      }
    }
  }
  ex.summarize = [&c, p](const std::vector<Json>& rows) {
    Json per_d = Json::array();
    for (auto d : p.dims) {
      const auto m = medians_by_n(rows, c.n_grid, "response", "d", static_cast<double>(d));
      const auto u = medians_by_n(rows, c.n_grid, "dirac_sup", "d", static_cast<double>(d));
      Json e{{"d", d},
             {"n", m.n},
             {"median_response", m.value},
             {"fit", slope_json(m.n, m.value)},
             {"dirac_sup_fit", slope_json(u.n, u.value)},
             {"target_slope", -1.0 / (2.0 * static_cast<double>(d - 1))}};
      if (p.refinement && !c.n_grid.empty()) {
        // Same delta on a grid twice as fine (twice the steps per move).
        const std::size_t n = c.n_grid.front();
        const SphereSetup s = sphere_setup(p, d, n);
        const double eps = c.epsilon_for(n);
        try {
          const auto rep = grid_refinement(
              [&](std::size_t g) { return sphere_response(p, d, s.horizon, s.delta, g, eps).first.value; }, s.grid);
          e["refinement"] = Json{{"n", n},
                                 {"grid_per_angle", rep.grid},
                                 {"value", rep.value},
                                 {"refined_value", rep.refined_value},
                                 {"relative_change", rep.relative_change}};
        } catch (const Error& err) {
          e["refinement"] = Json{{"error", err.what()}};
        }
      }
      per_d.push_back(std::move(e));
    }
    return Json{{"per_dimension", per_d},
                {"response_set", "occupancy at step H, ascent search"},
                {"caveat",
                 "States are a product grid in spherical coordinates with uniform weights, which over-weights the "
                 "poles relative to the surface measure; delta is snapped to pi / grid_per_angle, so the coupling "
                 "delta ~ n^{-1/(2(d-1))} holds only up to rounding. The refinement entry shows how much the value "
                 "moves when the grid is doubled at fixed delta."}};
  };
  return ex;
}

// ---------------------------------------------------------------------------

Experiment make_adversary(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const auto& p = c.adversary;
  const MdpSpec m = build_mdp(p.mdp, p.kernel, c.base_dir);
  const KernelSpec k = build_kernel(p.kernel, m);
  if (p.nu.size() != m.num_pairs()) {
    throw ConfigError(c.origin + ": field 'params.nu' needs " + std::to_string(m.num_pairs()) + " pair weights");
  }
  const DiscreteMeasure nu = m.pair_measure(p.nu);
  std::vector<Lazy<AdversarialPair>> pairs;
  for (auto n : c.n_grid) pairs.emplace_back([=] { return hard_instance_pair(m, k, nu, n); });

  Experiment ex;
  for (auto seed : seeds) {
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      const std::size_t n = c.n_grid[i];
      ex.tasks.push_back({seed, label_n(n), [=, lazy = pairs[i]] {
                            const AdversarialPair& pair = lazy.get();
                            Rng rng(seed, n);
                            const auto fr = fitted_reward(pair.m2, k, pair_weights_of(pair.m2, pair.sampling_nu), n, rng);
                            const double j_hat = optimal_value_and_policy(fr.fitted).value;
                            const double err = std::abs(j_hat - pair.j_star_m2);
                            TaskRows out;
                            out.rows.push_back(Json{{"seed", seed},
                                                    {"n", n},
                                                    {"h_star", pair.h_star},
                                                    {"response", pair.response_value},
                                                    {"j_star_m2", pair.j_star_m2},
                                                    {"j_hat", j_hat},
                                                    {"error", err},
                                                    {"separated", err >= p.threshold * pair.response_value},
                                                    {"policy_gap", policy_gap(pair.m2, fr.policy)},
                                                    {"tv_bound", pair.tv_bound},
                                                    {"g_rkhs_norm", pair.g_rkhs_norm},
                                                    {"n_g_l2_sq", static_cast<double>(n) * pair.g_l2_sq}});
                            return out;
                          }});
    }
  }
  ex.summarize = [&c, p, pairs](const std::vector<Json>& rows) {
    Json per_n = Json::array();
    for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
      const std::size_t n = c.n_grid[i];
      std::size_t total = 0, separated = 0;
      for (const auto& r : rows) {
        if (r.at("n").get<std::size_t>() != n) continue;
        ++total;
        separated += r.at("separated").get<bool>();
      }
      Json e{{"n", n}, {"runs", total}, {"separated", separated}};
      e["fraction"] = total ? static_cast<double>(separated) / static_cast<double>(total) : 0.0;
      e["meets_min_fraction"] = total && static_cast<double>(separated) >= p.min_fraction * static_cast<double>(total);
      try {
        const AdversarialPair& pair = pairs[i].get();
        const double tol = 1e-6;
        const bool ok = static_cast<double>(n) * pair.g_l2_sq <= 1.0 + tol && pair.g_rkhs_norm <= 1.0 + tol &&
                        pair.j_star_m2 >= (2.0 / 3.0 - tol) * pair.response_value && pair.tv_bound <= 0.5 + tol;
        e["invariants_hold"] = ok;
        e["pair"] = to_json(pair, p.mdp.generator);
      } catch (const Error& err) {
        e["invariants_hold"] = false;
        e["pair_error"] = err.what();
      }
      per_n.push_back(std::move(e));
    }
    return Json{{"threshold", p.threshold}, {"min_fraction", p.min_fraction}, {"per_n", per_n}};
  };
  return ex;
}

// ---------------------------------------------------------------------------

namespace {

DiscreteMeasure response_nu(const ResponseParams& p, const MdpSpec& m) {
  if (p.nu == "uniform") return m.pair_measure(std::vector<double>(m.num_pairs(), 1.0 / static_cast<double>(m.num_pairs())));
  if (p.nu_weights.size() != m.num_pairs()) {
    throw InvalidArgument("nu needs " + std::to_string(m.num_pairs()) + " pair weights, got " +
                          std::to_string(p.nu_weights.size()));
  }
  return m.pair_measure(p.nu_weights);
}

}  // namespace

Experiment make_response(const ExperimentConfig& c, const std::vector<std::uint64_t>& seeds) {
  const auto& p = c.response;
  const MdpSpec m = build_mdp(p.mdp, p.kernel, c.base_dir);
  const KernelSpec k = build_kernel(p.kernel, m);
  const DiscreteMeasure nu = response_nu(p, m);
  Experiment ex;
  for (auto seed : seeds) {
    ex.tasks.push_back({seed, "all_n", [=, &c] {
                          const ResponseSolver solver(k, nu, m.sa_points());
                          TaskRows out;
                          for (auto n : c.n_grid) {
                            const double eps = c.epsilon_for(n);
                            const auto r = response_over_pi(m, solver, eps, p.search);
                            out.rows.push_back(Json{{"seed", seed},
                                                    {"n", n},
                                                    {"epsilon", eps},
                                                    {"response", r.value},
                                                    {"lower_bracket", r.lower_bracket},
                                                    {"upper_bracket", r.upper_bracket},
                                                    {"h_star", r.h_star},
                                                    {"ties", r.ties},
                                                    {"iterations", r.iterations},
                                                    {"mode", search_mode_name(r.mode)}});
                          }
                          return out;
                        }});
  }
  ex.summarize = [&c](const std::vector<Json>& rows) {
    const auto med = medians_by_n(rows, c.n_grid, "response");
    Json j{{"n", med.n}, {"median_response", med.value}};
    if (med.n.size() >= 3) j["fit"] = slope_json(med.n, med.value);
    return j;
  };
  return ex;
}

}  // namespace detail

// ---------------------------------------------------------------------------

DecomposeResult decompose_from_config(const Json& document) {
  if (!document.contains("kernel") || !document.contains("points")) {
    throw ConfigError("decompose config needs 'kernel' and 'points'");
  }
  PointSet pts = points_from_json(document.at("points"));
  const KernelSpec k = kernel_from_json(document.at("kernel"), pts.dim());
  DiscreteMeasure nu = document.contains("weights")
                           ? DiscreteMeasure::probability(std::move(pts), document.at("weights").get<std::vector<double>>())
                           : DiscreteMeasure::uniform(std::move(pts));
  SpectralBasis b = mercer_decompose(k, nu);
  Json j = to_json(b);
  return {std::move(b), std::move(j)};
}

std::vector<ComplexityReport> respond(const ExperimentConfig& config) {
  if (config.experiment != "response") throw ConfigError(config.origin + ": respond needs a response config");
  const auto& p = config.response;
  const MdpSpec m = build_mdp(p.mdp, p.kernel, config.base_dir);
  const KernelSpec k = build_kernel(p.kernel, m);
  auto candidates = default_nu_candidates(m, 99);
  if (p.nu != "uniform") candidates.push_back({"configured", m.pair_measure(p.nu_weights)});
  std::vector<ComplexityReport> out;
  for (auto n : config.n_grid) out.push_back(complexity_known(m, k, config.epsilon_for(n), candidates, p.search));
  return out;
}

std::string format_report_table(const ComplexityReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %14s %14s %14s %-10s %10s\n", "candidate", "value", "lower", "upper", "mode",
                "iterations");
  out += buf;
  for (std::size_t i = 0; i < r.per_candidate.size(); ++i) {
    const auto& c = r.per_candidate[i];
    std::snprintf(buf, sizeof buf, "%-12s %14.8g %14.8g %14.8g %-10s %10d%s\n", c.id.c_str(), c.report.value,
                  c.report.lower_bracket, c.report.upper_bracket, search_mode_name(c.report.mode), c.report.iterations,
                  i == r.best ? "  *" : "");
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "epsilon %.8g  delta_hat %.8g  best %s\n", r.epsilon, r.value,
                r.per_candidate.at(r.best).id.c_str());
  out += buf;
  return out;
}

}  // namespace mlab::harness
