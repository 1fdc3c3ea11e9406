#include "mlab/serialize.hpp"

#include <cmath>

#include "mlab/errors.hpp"

namespace mlab {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw InvalidArgument(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw InvalidArgument(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw InvalidArgument(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw InvalidArgument(std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw InvalidArgument(std::string("field '") + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw InvalidArgument(std::string("field '") + key + "' must be an array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = rows ? v[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) throw InvalidArgument(std::string("field '") + key + "' is ragged");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[i][c].is_number()) throw InvalidArgument(std::string("field '") + key + "' must hold numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v[i][c].get<double>();
    }
  }
  return m;
}

}  // namespace

Json to_json(const KernelSpec& k) {
  Json j;
  j["kind"] = kernel_kind_name(k.kind());
  switch (k.kind()) {
    case KernelKind::gaussian:
    case KernelKind::laplacian:
      j["bandwidth"] = k.bandwidth();
      j["input_dim"] = k.input_dim();
      break;
    case KernelKind::fourier_spectrum:
      j["spectrum"] = k.spectrum();
      break;
    case KernelKind::gram_table:
      j["table"] = matrix_json(k.table());
      break;
  }
  return j;
}

KernelSpec kernel_from_json(const Json& j, std::optional<std::size_t> default_dim) {
  const Json& kind = field(j, "kind");
  if (!kind.is_string()) throw InvalidArgument("field 'kind' must be a string");
  const KernelKind kk = parse_kernel_kind(kind.get<std::string>());
  switch (kk) {
    case KernelKind::gaussian:
    case KernelKind::laplacian: {
      std::size_t dim = 0;
      if (j.contains("input_dim")) {
        dim = count(j, "input_dim");
      } else if (default_dim) {
        dim = *default_dim;
      } else {
        throw InvalidArgument("missing field 'input_dim'");
      }
      const double b = number(j, "bandwidth");
      return kk == KernelKind::gaussian ? KernelSpec::gaussian(b, dim) : KernelSpec::laplacian(b, dim);
    }
    case KernelKind::fourier_spectrum: {
      if (j.contains("spectrum")) return KernelSpec::fourier_spectrum(numbers(j, "spectrum"));
      const double a = number(j, "decay");
      const std::size_t terms = count(j, "terms");
      std::vector<double> l(terms);
      for (std::size_t i = 0; i < terms; ++i) l[i] = std::pow(static_cast<double>(i + 1), -a);
      return KernelSpec::fourier_spectrum(std::move(l));
    }
    case KernelKind::gram_table:
      return KernelSpec::gram_table(matrix_from(j, "table"));
  }
  throw InvalidArgument("unsupported kernel kind");
}

Json to_json(const PointSet& p) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i) pts.push_back(p.point(i));
  return Json{{"dim", p.dim()}, {"points", std::move(pts)}};
}

PointSet points_from_json(const Json& j) {
  const std::size_t dim = count(j, "dim");
  const Json& pts = field(j, "points");
  if (!pts.is_array()) throw InvalidArgument("field 'points' must be an array");
  PointSet out(dim);
  out.reserve(pts.size());
  Point p(dim);
  for (const auto& row : pts) {
    if (!row.is_array() || row.size() != dim) throw InvalidArgument("every point needs exactly 'dim' coordinates");
    for (std::size_t d = 0; d < dim; ++d) {
      if (!row[d].is_number()) throw InvalidArgument("point coordinates must be numbers");
      p[d] = row[d].get<double>();
    }
    out.push_back(p);
  }
  return out;
}

Json to_json(const DiscreteMeasure& m) {
  return Json{{"points", to_json(m.points())}, {"weights", m.weights()}, {"probability", m.is_probability()}};
}

DiscreteMeasure measure_from_json(const Json& j) {
  PointSet pts = points_from_json(field(j, "points"));
  std::vector<double> w = numbers(j, "weights");
  const bool prob = !j.contains("probability") || j.at("probability").get<bool>();
  return prob ? DiscreteMeasure::probability(std::move(pts), std::move(w))
              : DiscreteMeasure::signed_measure(std::move(pts), std::move(w));
}

Json to_json(const RkhsExpansion& f) {
  return Json{{"kernel", to_json(f.kernel())}, {"centers", to_json(f.centers())}, {"coefficients", f.coefficients()}};
}

RkhsExpansion expansion_from_json(const Json& j) {
  PointSet centers = points_from_json(field(j, "centers"));
  KernelSpec k = kernel_from_json(field(j, "kernel"), centers.dim());
  return RkhsExpansion(std::move(k), std::move(centers), numbers(j, "coefficients"));
}

Json to_json(const MdpSpec& m) {
  const Dynamics& p = m.dynamics();
  Json rows = Json::array();
  for (std::size_t h = 1; h <= p.horizon(); ++h) {
    for (std::size_t s = 0; s < p.num_states(); ++s) {
      for (std::size_t a = 0; a < p.num_actions(); ++a) {
        Json row = Json::array();
        for (const auto& [next, prob] : p.row(h, s, a)) row.push_back(Json::array({next, prob}));
        rows.push_back(std::move(row));
      }
    }
  }
  Json rewards = Json::array();
  for (const auto& r : m.rewards()) rewards.push_back(to_json(r));
  return Json{{"num_states", p.num_states()},
              {"num_actions", p.num_actions()},
              {"horizon", p.horizon()},
              {"encoding", action_encoding_name(m.encoding())},
              {"state_coords", to_json(m.state_coords())},
              {"init", m.init()},
              {"transitions", std::move(rows)},
              {"rewards", std::move(rewards)},
              {"reward_radius", m.reward_radius()}};
}

MdpSpec mdp_from_json(const Json& j) {
  const std::size_t S = count(j, "num_states"), A = count(j, "num_actions"), H = count(j, "horizon");
  const Json& rows_j = field(j, "transitions");
  if (!rows_j.is_array()) throw InvalidArgument("field 'transitions' must be an array of rows");
  std::vector<Dynamics::Row> rows;
  rows.reserve(rows_j.size());
  for (const auto& row_j : rows_j) {
    if (!row_j.is_array()) throw InvalidArgument("every transition row must be an array of [next_state, prob]");
    Dynamics::Row row;
    for (const auto& e : row_j) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number()) {
        throw InvalidArgument("transition entries must be [next_state, prob]");
      }
      if (e[0].get<long long>() < 0) throw InvalidArgument("transition next_state must be nonnegative");
      row.emplace_back(e[0].get<std::size_t>(), e[1].get<double>());
    }
    rows.push_back(std::move(row));
  }
  // A single block of S*A rows is shared by every step.
  std::shared_ptr<const Dynamics> dyn =
      rows.size() == S * A && H > 1 ? std::make_shared<const Dynamics>(Dynamics::stationary(S, A, H, rows))
                                    : std::make_shared<const Dynamics>(S, A, H, std::move(rows));
  const ActionEncoding enc = j.contains("encoding") ? parse_action_encoding(field(j, "encoding").get<std::string>())
                                                      : ActionEncoding::one_hot;
  PointSet coords = enc == ActionEncoding::index && !j.contains("state_coords") ? PointSet(1)
                                                                                : points_from_json(field(j, "state_coords"));
  std::vector<RkhsExpansion> rewards;
  const Json& rew = field(j, "rewards");
  if (!rew.is_array() || rew.size() != H) throw InvalidArgument("field 'rewards' must hold one expansion per step");
  for (const auto& r : rew) rewards.push_back(expansion_from_json(r));
  const double radius = j.contains("reward_radius") ? number(j, "reward_radius") : 1.0;
  return MdpSpec(std::move(dyn), std::move(coords), enc, numbers(j, "init"), std::move(rewards), radius);
}

Json to_json(const Policy& pi) {
  return Json{{"num_states", pi.num_states()},
              {"num_actions", pi.num_actions()},
              {"horizon", pi.horizon()},
              {"probs", pi.probs()}};
}

Policy policy_from_json(const Json& j) {
  return Policy(count(j, "num_states"), count(j, "num_actions"), count(j, "horizon"), numbers(j, "probs"));
}

Json to_json(const SpectralBasis& b) {
  return Json{{"kernel", to_json(b.kernel())},
              {"base_measure", to_json(b.base_measure())},
              {"eigenvalues", b.eigenvalues()},
              {"psi", matrix_json(b.psi())},
              {"dropped", b.dropped()}};
}

SpectralBasis basis_from_json(const Json& j) {
  DiscreteMeasure nu = measure_from_json(field(j, "base_measure"));
  KernelSpec k = kernel_from_json(field(j, "kernel"), nu.dim());
  std::vector<double> eig = numbers(j, "eigenvalues");
  Eigen::MatrixXd psi = matrix_from(j, "psi");
  if (static_cast<std::size_t>(psi.rows()) != eig.size() ||
      (psi.rows() > 0 && static_cast<std::size_t>(psi.cols()) != nu.size())) {
    throw InvalidArgument("field 'psi' must be (eigenvalues x support)");
  }
  if (psi.rows() == 0) psi.resize(0, static_cast<Eigen::Index>(nu.size()));
  return SpectralBasis(std::move(k), std::move(nu), std::move(eig), std::move(psi), count(j, "dropped"));
}

Json to_json(const ResponseReport& r) {
  Json j{{"value", r.value},
         {"lower_bracket", r.lower_bracket},
         {"upper_bracket", r.upper_bracket},
         {"epsilon", r.epsilon},
         {"mode", search_mode_name(r.mode)},
         {"iterations", r.iterations},
         {"h_star", r.h_star},
         {"ties", r.ties},
         {"witness_rkhs_norm", r.witness_rkhs_norm},
         {"witness_l2_norm", r.witness_l2_norm},
         {"witness", to_json(r.witness)},
         {"maximizer", to_json(r.maximizer)}};
  j["policy"] = r.policy ? to_json(*r.policy) : Json(nullptr);
  if (!r.trace.empty()) j["trace"] = r.trace;
  return j;
}

Json to_json(const ComplexityReport& r) {
  Json cands = Json::array();
  for (const auto& c : r.per_candidate) {
    Json e = to_json(c.report);
    e["id"] = c.id;
    cands.push_back(std::move(e));
  }
  return Json{{"epsilon", r.epsilon},
              {"value", r.value},
              {"best", r.per_candidate.at(r.best).id},
              {"is_upper_bound_of_delta", r.is_upper_bound_of_delta},
              {"candidates", std::move(cands)}};
}

Json to_json(const UnknownComplexityReport& r) {
  Json samplers = Json::array();
  for (const auto& s : r.per_sampler) {
    samplers.push_back(
        Json{{"id", s.id}, {"value", s.value}, {"worst_theta", s.worst_theta}, {"per_theta", s.per_theta}});
  }
  return Json{{"epsilon", r.epsilon},
              {"value", r.value},
              {"best", r.per_sampler.at(r.best).id},
              {"is_upper_bound_of_delta", r.is_upper_bound_of_delta},
              {"samplers", std::move(samplers)}};
}

Json to_json(const FitResult& f) {
  return Json{{"estimate", to_json(f.estimate)},
              {"multiplier", f.multiplier},
              {"residual_sq", f.residual_sq},
              {"constraint_active", f.constraint_active},
              {"norm", f.norm},
              {"radius", f.radius},
              {"kkt_residual", f.kkt_residual},
              {"iterations", f.iterations}};
}

Json to_json(const AdversarialPair& p, const std::string& dynamics_id) {
  return Json{{"dynamics", dynamics_id},
              {"h_star", p.h_star},
              {"g", to_json(p.g)},
              {"response_value", p.response_value},
              {"sampling_nu", to_json(p.sampling_nu)},
              {"n", p.n},
              {"tv_bound", p.tv_bound},
              {"j_star_m2", p.j_star_m2},
              {"g_rkhs_norm", p.g_rkhs_norm},
              {"g_l2_sq", p.g_l2_sq}};
}

}  // namespace mlab
