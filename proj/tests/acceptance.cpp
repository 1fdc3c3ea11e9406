// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   mlab_acceptance [configs_dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mlab/adversary.hpp"
#include "mlab/fitting.hpp"
#include "mlab/harness.hpp"
#include "mlab/perturbation.hpp"
#include "mlab/spectral.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mlab;
namespace fs = std::filesystem;

namespace {

fs::path g_configs = MLAB_CONFIG_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Column name -> values, for the numeric columns of a run's CSV.
std::map<std::string, std::vector<double>> columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, cell;
  std::getline(in, line);
  std::vector<std::string> names;
  std::istringstream hs(line);
  while (std::getline(hs, cell, ',')) names.push_back(cell);
  std::map<std::string, std::vector<double>> out;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    for (std::size_t i = 0; std::getline(ls, cell, ','); ++i) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() && *end == '\0') out[names.at(i)].push_back(v);
    }
  }
  return out;
}

struct Runs {
  std::map<std::string, harness::RunResult> first;
  const harness::RunResult& get(const std::string& name, std::int64_t offset = 0) {
    const std::string key = name + "@" + std::to_string(offset);
    auto it = first.find(key);
    if (it == first.end()) {
      harness::RunOptions o;
      o.seed_offset = offset;
      it = first.emplace(key, harness::run_experiment(harness::load_config(g_configs / (name + ".json")), o)).first;
    }
    return it->second;
  }
};

Runs g_runs;

const Json& results(const std::string& name) { return g_runs.get(name).summary.at("results"); }

// AC1 ------------------------------------------------------------------------

Outcome duality() {
  Rng rng(2024, 1);
  double worst_dual = 0.0, worst_sandwich = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.uniform_index(3);
    const auto k = trial % 2 ? KernelSpec::laplacian(0.4 + rng.uniform(), dim) : KernelSpec::gaussian(0.4 + rng.uniform(), dim);
    const std::size_t m_nu = 2 + rng.uniform_index(14);
    const std::size_t m_rho = 1 + rng.uniform_index(20 - m_nu);
    const auto nu = DiscreteMeasure::probability(fixtures::random_points(m_nu, dim, rng),
                                                 fixtures::random_simplex(m_nu, rng, 0.02));
    const auto rho = DiscreteMeasure::probability(fixtures::random_points(m_rho, dim, rng),
                                                  fixtures::random_simplex(m_rho, rng));
    for (double eps : {0.05, 0.2, 1.0}) {
      const double primal = primal_response(k, nu, eps, rho).value;
      const double dual = oracles::dual_infimum(k, nu, rho, eps);
      const double s = oracles::spectral_infimum(k, nu, rho, eps);
      worst_dual = std::max(worst_dual, std::abs(primal - dual));
      worst_sandwich = std::max({worst_sandwich, std::sqrt(s) - primal, primal - std::sqrt(2.0 * s)});
    }
  }
  return {worst_dual <= 1e-4 && worst_sandwich <= 1e-8,
          "150 solves, max |primal - dual| " + fmt("%.2e", worst_dual) + ", max sandwich excess " +
              fmt("%.2e", worst_sandwich)};
}

// AC2 ------------------------------------------------------------------------

double basis_defect(const SpectralBasis& b) {
  const auto& w = b.base_measure().weights();
  Eigen::MatrixXd gram = b.psi() * Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())).asDiagonal() *
                         b.psi().transpose();
  double defect = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  double trace = 0.0, sum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const Point z = b.base_measure().points().point(j);
    trace += w[j] * b.kernel()(z, z);
  }
  for (double l : b.eigenvalues()) sum += l;
  return std::max(defect, std::abs(trace - sum));
}

Outcome spectral() {
  Rng rng(2025, 2);
  double defect = 0.0, mercer = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto k = trial % 2 ? KernelSpec::laplacian(0.7, 3) : KernelSpec::gaussian(0.9, 3);
    const auto nu = DiscreteMeasure::probability(fixtures::random_points(25, 3, rng), fixtures::random_simplex(25, rng, 0.05));
    const auto b = mercer_decompose(k, nu);
    defect = std::max(defect, basis_defect(b));
    std::vector<double> c(25);
    for (auto& x : c) x = rng.normal();
    const RkhsExpansion g(k, nu.points(), c);
    mercer = std::max(mercer, std::abs(mercer_norm_sq(b, g) - g.norm_sq_raw()) / std::max(1.0, g.norm_sq_raw()));
  }
  std::vector<double> spec(255);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = 1.0 / ((i + 1.0) * (i + 1.0));
  PointSet grid(1);
  for (std::size_t j = 0; j < 256; ++j) grid.push_back(Point{2.0 * std::numbers::pi * static_cast<double>(j) / 256.0});
  const auto b = mercer_decompose(KernelSpec::fourier_spectrum(spec), DiscreteMeasure::uniform(grid));
  double planted = b.rank() == spec.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(b.rank(), spec.size()); ++i) planted = std::max(planted, std::abs(b.eigenvalues()[i] - spec[i]));
  defect = std::max(defect, basis_defect(b));
  return {defect <= 1e-8 && planted <= 1e-6 && mercer <= 1e-6,
          "orthonormality/trace " + fmt("%.1e", defect) + ", planted i^-2 " + fmt("%.1e", planted) + ", Mercer norm " +
              fmt("%.1e", mercer)};
}

// AC3, AC4, AC5 --------------------------------------------------------------

Outcome sandwich() {
  const auto& r = g_runs.get("eigdecay");
  const auto col = columns(r.csv);
  double excess = -1e300;
  for (std::size_t i = 0; i < col.at("response").size(); ++i) {
    excess = std::max({excess, col.at("sandwich_lower")[i] - col.at("response")[i],
                       col.at("response")[i] - col.at("sandwich_upper")[i]});
  }
  return {r.failures == 0 && col.at("n").size() == 9 && excess <= 1e-8,
          std::to_string(col.at("n").size()) + " n values, max excess over the sandwich " + fmt("%.3g", excess)};
}

Outcome scaling() {
  const double slope = results("eigdecay").at("fit").at("slope").get<double>();
  return {std::abs(slope + 0.25) <= 0.08, "slope " + fmt("%.4f", slope) + " (target -0.25 +- 0.08)"};
}

Outcome concentration() {
  const auto& r = g_runs.get("concentration");
  const auto col = columns(r.csv);
  double worst = -1e300, m = 0.0;
  for (std::size_t i = 0; i < col.at("response").size(); ++i) {
    m = std::max(m, col.at("density_ratio")[i]);
    worst = std::max(worst, col.at("response")[i] - 2.0 * 4.0 / std::sqrt(col.at("n")[i]));
  }
  return {r.failures == 0 && col.at("n").size() == 7 && std::abs(m - 4.0) <= 1e-12 && worst <= 0.0,
          "M = " + fmt("%.6g", m) + ", max response - 2M/sqrt(n) = " + fmt("%.3g", worst)};
}

// AC6 ------------------------------------------------------------------------

Outcome pi_search() {
  Rng rng(2026, 6);
  const auto k = KernelSpec::gaussian(0.5, 3);
  double search = 0.0, norm = 0.0;
  std::size_t instances = 0;
  for (std::size_t H = 1; H <= 3; ++H) {
    for (int trial = 0; trial < 10; ++trial, ++instances) {
      const MdpSpec m = fixtures::random_mdp(2, 2, H, rng, &k);
      const auto nu = m.pair_measure(fixtures::random_simplex(4, rng, 0.02));
      for (double eps : {0.05, 0.3}) {
        PiSearchOptions as;
        as.mode = SearchMode::ascent;
        search = std::max(search, std::abs(response_over_pi(m, k, nu, eps, as).value - response_over_pi(m, k, nu, eps).value));
      }
      const auto g = fixtures::random_rewards(m, k, rng)[0];
      const auto vals = g.evaluate(m.sa_points());
      for (std::size_t h = 1; h <= H; ++h) {
        double brute = 0.0;
        for (const auto& pi : fixtures::all_deterministic_policies(2, 2, H)) {
          const auto rho = occupancy_vector(m.dynamics(), m.init(), pi, h);
          double e = 0.0;
          for (std::size_t i = 0; i < vals.size(); ++i) e += rho[i] * vals[i];
          brute = std::max(brute, std::abs(e));
        }
        norm = std::max(norm, std::abs(pi_norm(m, g, h) - brute));
      }
    }
  }
  return {search <= 1e-8 && norm <= 1e-10, std::to_string(instances) + " MDPs, max |ascent - enumerate| " +
                                               fmt("%.1e", search) + ", max pi_norm error " + fmt("%.1e", norm)};
}

// AC7, AC8 -------------------------------------------------------------------

Outcome fitted_reward_shape() {
  const auto& r = g_runs.get("fitted_reward");
  const Json& j = r.summary.at("results");
  const double c_fit = j.at("c_hat_fitted").get<double>();
  const double c_hat = j.at("c_hat").get<double>();
  const bool monotone = j.at("median_gap_nonincreasing").get<bool>();
  return {r.failures == 0 && monotone && c_fit <= c_hat && c_hat <= 50.0,
          std::string("median gap ") + (monotone ? "nonincreasing" : "increases") + ", max normalized gap " +
              fmt("%.4g", c_fit) + " <= frozen C " + fmt("%.4g", c_hat)};
}

double noiseless_fqi_error() {
  const std::size_t H = 4;
  const auto k = KernelSpec::gram_table(4.0 * Eigen::MatrixXd::Identity(4, 4));
  const std::vector<Dynamics::Row> rows{{{0, 1.0}}, {{1, 1.0}}, {{1, 1.0}}, {{0, 1.0}}};
  const MdpSpec base = fixtures::index_mdp(std::make_shared<const Dynamics>(Dynamics::stationary(2, 2, H, rows)), {0.5, 0.5}, k);
  const PointSet pairs(1, {{0.0}, {1.0}, {2.0}, {3.0}});
  std::vector<RkhsExpansion> rewards;
  for (std::size_t h = 0; h < H; ++h) {
    const std::vector<double> vals{0.1 * h, 0.9, 0.5, 0.2 + 0.1 * h};
    std::vector<double> c(4);
    for (int i = 0; i < 4; ++i) c[i] = vals[i] / 4.0;
    rewards.emplace_back(k, pairs, c);
  }
  const MdpSpec m = base.with_rewards(rewards);
  FitOptions opt;
  opt.noise = RewardNoise::off;
  Rng rng(1, 0);
  const auto fq = fitted_q_iteration(m, k, std::vector<std::vector<std::size_t>>(H, {0, 1, 2, 3}), rng, opt);
  const auto dp = optimal_value_and_policy(m);
  double err = 0.0;
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < 4; ++i) err = std::max(err, std::abs(fq.q_tables[h][i] - dp.q[h][i]));
  }
  return err;
}

Outcome fitted_q_shape() {
  const double oracle = noiseless_fqi_error();
  const auto& a = g_runs.get("fitted_q");
  const auto& b = g_runs.get("fitted_q", 20);
  const Json& j = a.summary.at("results");
  const auto med = j.at("median_gap").get<std::vector<double>>();
  const bool halved = med.back() <= 0.5 * med.front();
  const double c1 = j.at("c_hat_quantile").get<double>();
  const double c2 = b.summary.at("results").at("c_hat_quantile").get<double>();
  const bool stable = c1 > 0.0 && std::abs(c2 / c1 - 1.0) <= 0.5;
  return {oracle <= 1e-8 && a.failures == 0 && b.failures == 0 && halved && stable,
          "noise-off Q error " + fmt("%.1e", oracle) + ", median gap " + fmt("%.4g", med.front()) + " -> " +
              fmt("%.4g", med.back()) + ", C (1-p quantile) " + fmt("%.4g", c1) + " vs rerun on seeds +20 " +
              fmt("%.4g", c2) + ", max-based C " + fmt("%.4g", j.at("c_hat_fitted").get<double>())};
}

// AC9 ------------------------------------------------------------------------

bool pair_ok(const AdversarialPair& p) {
  const double tol = 1e-6;
  return static_cast<double>(p.n) * p.g_l2_sq <= 1.0 + tol && rkhs_norm(p.g) <= 1.0 + tol &&
         p.j_star_m2 >= (2.0 / 3.0 - tol) * p.response_value && p.tv_bound <= 0.5 + tol;
}

Outcome adversary() {
  bool invariants = true;
  Rng rng(2027, 9);
  const auto k = KernelSpec::gaussian(0.5, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const MdpSpec m = fixtures::random_mdp(3, 2, 2, rng, &k);
    const auto nu = m.pair_measure(fixtures::random_simplex(6, rng, 0.01));
    for (std::size_t n : {1u, 16u, 256u}) invariants &= pair_ok(hard_instance_pair(m, k, nu, n));
  }
  const auto& r = g_runs.get("adversary_demo");
  std::string counts;
  bool demo = r.failures == 0;
  for (const auto& e : r.summary.at("results").at("per_n")) {
    invariants &= e.at("invariants_hold").get<bool>();
    const auto sep = e.at("separated").get<std::size_t>();
    const auto runs = e.at("runs").get<std::size_t>();
    demo &= runs == 100 && sep >= 25;
    counts += (counts.empty() ? "" : ", ") + std::to_string(sep) + "/" + std::to_string(runs) + " at n = " +
              std::to_string(e.at("n").get<std::size_t>());
  }
  return {invariants && demo, std::string("invariants ") + (invariants ? "hold" : "violated") + ", separated " + counts};
}

// AC10 -----------------------------------------------------------------------

Outcome sphere() {
  const auto& r = g_runs.get("sphere_cod");
  const Json& j = r.summary.at("results");
  std::map<std::size_t, double> slope;
  for (const auto& e : j.at("per_dimension")) slope[e.at("d").get<std::size_t>()] = e.at("fit").at("slope").get<double>();
  const bool d2 = std::abs(slope[2] + 0.5) <= 0.15;
  const bool d3 = std::abs(slope[3] + 0.25) <= 0.15;
  const bool order = slope[2] < slope[3];
  const bool caveat = !j.at("caveat").get<std::string>().empty();
  return {r.failures == 0 && d2 && d3 && order && caveat,
          "d=2 slope " + fmt("%.4f", slope[2]) + (d2 ? " within" : " outside") + " -0.5 +- 0.15, d=3 slope " +
              fmt("%.4f", slope[3]) + (d3 ? " within" : " outside") + " -0.25 +- 0.15, d=2 " +
              (order ? "steeper" : "not steeper")};
}

// AC11 -----------------------------------------------------------------------

Outcome determinism() {
  std::size_t checked = 0;
  std::string differing;
  for (const auto& entry : fs::directory_iterator(g_configs)) {
    if (entry.path().extension() != ".json" || entry.path().stem() == "decompose_circle") continue;
    const std::string name = entry.path().stem().string();
    const auto again = harness::run_experiment(harness::load_config(entry.path()));
    if (again.csv != g_runs.get(name).csv) differing += " " + name;
    ++checked;
  }
  return {checked > 0 && differing.empty(),
          std::to_string(checked) + " configs rerun" + (differing.empty() ? ", all CSVs identical" : ", differ:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_configs = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 duality", duality},
      {"AC2 spectral", spectral},
      {"AC3 sandwich", sandwich},
      {"AC4 scaling", scaling},
      {"AC5 concentration", concentration},
      {"AC6 pi-search", pi_search},
      {"AC7 fitted-reward", fitted_reward_shape},
      {"AC8 fitted-q", fitted_q_shape},
      {"AC9 adversary", adversary},
      {"AC10 sphere", sphere},
      {"AC11 determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
