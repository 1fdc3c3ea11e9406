#pragma once

#include <memory>
#include <vector>

#include "mlab/kernel.hpp"
#include "mlab/mdp.hpp"
#include "mlab/rng.hpp"

namespace mlab::fixtures {

inline PointSet random_points(std::size_t count, std::size_t dim, Rng& rng, double scale = 1.0) {
  PointSet ps(dim);
  Point p(dim);
  for (std::size_t j = 0; j < count; ++j) {
    for (auto& x : p) x = scale * (2.0 * rng.uniform() - 1.0);
    ps.push_back(p);
  }
  return ps;
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng, double floor = 0.0) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& x : w) {
    x = floor + rng.uniform();
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

/// Random dense dynamics with scalar state coordinates s / S and one-hot actions.
inline MdpSpec random_mdp(std::size_t S, std::size_t A, std::size_t H, Rng& rng, const KernelSpec* k = nullptr,
                          bool sparse = false) {
  std::vector<Dynamics::Row> rows;
  for (std::size_t i = 0; i < S * A * H; ++i) {
    Dynamics::Row row;
    if (sparse) {
      row.push_back({static_cast<std::size_t>(rng.uniform_index(S)), 1.0});
    } else {
      const auto p = random_simplex(S, rng);
      for (std::size_t s2 = 0; s2 < S; ++s2) row.push_back({s2, p[s2]});
    }
    rows.push_back(row);
  }
  auto dyn = std::make_shared<const Dynamics>(S, A, H, std::move(rows));
  PointSet coords(1);
  for (std::size_t s = 0; s < S; ++s) coords.push_back(std::vector<double>{static_cast<double>(s) / static_cast<double>(S)});
  const KernelSpec kern = k ? *k : KernelSpec::gaussian(0.5, 1 + A);
  std::vector<RkhsExpansion> rewards(H, RkhsExpansion::zero(kern, 1 + A));
  return MdpSpec(dyn, coords, ActionEncoding::one_hot, random_simplex(S, rng), rewards);
}

/// Reward r_h = scale * normalized random expansion on the pair points.
inline std::vector<RkhsExpansion> random_rewards(const MdpSpec& m, const KernelSpec& k, Rng& rng, double norm = 0.8) {
  std::vector<RkhsExpansion> out;
  for (std::size_t h = 0; h < m.horizon(); ++h) {
    std::vector<double> c(m.num_pairs());
    for (auto& x : c) x = rng.normal();
    RkhsExpansion f(k, m.sa_points(), c);
    const double n = rkhs_norm(f);
    out.push_back(f.scaled(n > 0 ? norm / n : 0.0));
  }
  return out;
}

}  // namespace mlab::fixtures

namespace mlab::fixtures {

/// Every deterministic policy over steps 1..H, in lexicographic order of the action table.
inline std::vector<Policy> all_deterministic_policies(std::size_t S, std::size_t A, std::size_t H) {
  std::vector<Policy> out;
  std::vector<std::size_t> acts(S * H, 0);
  while (true) {
    out.push_back(Policy::deterministic(S, A, H, acts));
    std::size_t i = 0;
    while (i < acts.size() && ++acts[i] == A) acts[i++] = 0;
    if (i == acts.size()) return out;
  }
}

/// MDP on pair indices with a gram_table kernel, so any table of pair values of
/// the right shape is a reward.
inline MdpSpec index_mdp(std::shared_ptr<const Dynamics> dyn, std::vector<double> init, const KernelSpec& k) {
  std::vector<RkhsExpansion> rewards(dyn->horizon(), RkhsExpansion::zero(k, 1));
  return MdpSpec(std::move(dyn), PointSet(1), ActionEncoding::index, std::move(init), std::move(rewards));
}

}  // namespace mlab::fixtures
