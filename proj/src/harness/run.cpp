#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "internal.hpp"
#include "mlab/parallel.hpp"

namespace mlab::harness {

const char* version() { return MLAB_VERSION; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

SlopeFit fit_slope(std::span<const double> n, std::span<const double> values) {
  if (n.size() != values.size()) throw InvalidArgument("fit_slope needs one value per n");
  if (n.size() < 3) throw InvalidArgument("fit_slope needs at least 3 rows");
  double sx = 0, sy = 0;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) throw InvalidArgument("fit_slope needs positive n");
    if (!(values[i] > 0.0)) throw InvalidArgument("fit_slope needs positive values, got " + std::to_string(values[i]));
    x.push_back(std::log(n[i]));
    y.push_back(std::log(values[i]));
    sx += x.back();
    sy += y.back();
  }
  const double m = static_cast<double>(x.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_slope needs at least two distinct n");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // A constant series is fitted exactly.
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

const std::vector<std::string>& csv_columns(const std::string& experiment) {
  static const std::map<std::string, std::vector<std::string>> columns{
      {"eigdecay",
       {"experiment", "seed", "n", "epsilon", "response", "lower_bracket", "upper_bracket", "effective_index", "tail",
        "sandwich_lower", "sandwich_upper", "within_sandwich"}},
      {"concentration", {"experiment", "seed", "n", "epsilon", "response", "density_ratio", "bound", "within_bound"}},
      {"fitted_reward",
       {"experiment", "seed", "n", "epsilon", "delta_hat", "best_candidate", "j_star", "j_policy", "gap", "log_factor",
        "normalized_gap"}},
      {"fitted_q",
       {"experiment", "seed", "n", "epsilon", "delta_hat", "best_candidate", "j_star", "j_policy", "gap", "log_factor",
        "normalized_gap", "max_q_norm_ratio"}},
      {"sphere_cod",
       {"experiment", "seed", "d", "n", "epsilon", "grid_per_angle", "delta", "horizon", "states", "response",
        "dirac_sup", "iterations"}},
      {"adversary_demo",
       {"experiment", "seed", "n", "h_star", "response", "j_star_m2", "j_hat", "error", "separated", "policy_gap",
        "tv_bound", "g_rkhs_norm", "n_g_l2_sq"}},
      {"response",
       {"experiment", "seed", "n", "epsilon", "response", "lower_bracket", "upper_bracket", "h_star", "ties",
        "iterations", "mode"}},
  };
  auto it = columns.find(experiment);
  if (it == columns.end()) throw InvalidArgument("unknown experiment '" + experiment + "'");
  return it->second;
}

namespace detail {

std::vector<TaskOutcome> run_tasks(const std::vector<Task>& tasks) {
  return parallel_map<TaskOutcome>(tasks.size(), [&](std::size_t i) {
    TaskOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      TaskRows r = tasks[i].fn();
      out.rows = std::move(r.rows);
      out.files = std::move(r.files);
      for (const auto& row : out.rows) {
        for (auto it = row.begin(); it != row.end(); ++it) {
          if (it->is_number_float() && !std::isfinite(it->get<double>())) {
            throw ConsistencyError("non-finite value in column '" + it.key() + "'");
          }
        }
      }
    } catch (const std::exception& e) {
      out.rows.clear();
      out.files.clear();
      out.error = e.what();
    }
    out.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
  });
}

std::vector<std::uint64_t> effective_seeds(const ExperimentConfig& c, const RunOptions& o) {
  std::vector<std::uint64_t> out;
  for (auto s : c.seeds) {
    const long long v = static_cast<long long>(s) + o.seed_offset;
    if (v < 0) throw ConfigError("seed " + std::to_string(s) + " with offset " + std::to_string(o.seed_offset) + " is negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> column_where(const std::vector<Json>& rows, const std::string& column, const std::string& key,
                                 double value) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.at(key).get<double>() == value) out.push_back(r.at(column).get<double>());
  }
  return out;
}

}  // namespace detail

namespace {

std::string format_cell(const Json& v) {
  char buf[64];
  if (v.is_number_float()) {
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_string()) return v.get<std::string>();
  throw ConsistencyError("unsupported CSV cell " + v.dump());
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto seeds = detail::effective_seeds(config, options);
  const std::string& e = config.experiment;
  detail::Experiment ex;
  if (e == "eigdecay") {
    ex = detail::make_eigdecay(config, seeds);
  } else if (e == "concentration") {
    ex = detail::make_concentration(config, seeds);
  } else if (e == "fitted_reward") {
    ex = detail::make_fitted(config, seeds, false);
  } else if (e == "fitted_q") {
    ex = detail::make_fitted(config, seeds, true);
  } else if (e == "sphere_cod") {
    ex = detail::make_sphere(config, seeds);
  } else if (e == "adversary_demo") {
    ex = detail::make_adversary(config, seeds);
  } else if (e == "response") {
    ex = detail::make_response(config, seeds);
  } else {
    throw ConfigError("unknown experiment '" + e + "'");
  }

  const auto outcomes = detail::run_tasks(ex.tasks);
  const auto& cols = csv_columns(e);
  RunResult res;
  std::string csv;
  for (std::size_t i = 0; i < cols.size(); ++i) csv += (i ? "," : "") + cols[i];
  csv += "\n";
  std::string timing = "experiment,seed,task,wall_time_ms\n";
  std::vector<Json> rows;
  Json failures = Json::array();
  char buf[64];
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const auto& o = outcomes[t];
    std::snprintf(buf, sizeof buf, "%.3f", o.wall_time_ms);
    timing += e + "," + std::to_string(ex.tasks[t].seed) + "," + ex.tasks[t].label + "," + buf + "\n";
    if (!o.error.empty()) {
      failures.push_back(Json{{"seed", ex.tasks[t].seed}, {"task", ex.tasks[t].label}, {"error", o.error}});
      continue;
    }
    for (const auto& f : o.files) res.extra_files.push_back(f);
    for (auto row : o.rows) {
      row["experiment"] = e;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (!row.contains(cols[i])) throw ConsistencyError("row is missing column '" + cols[i] + "'");
        csv += (i ? "," : "") + format_cell(row.at(cols[i]));
      }
      csv += "\n";
      rows.push_back(std::move(row));
    }
  }
  res.csv = std::move(csv);
  res.timing_csv = std::move(timing);
  res.failures = failures.size();

  Json results;
  try {
    results = ex.summarize ? ex.summarize(rows) : Json::object();
  } catch (const std::exception& err) {
    results = Json{{"error", err.what()}};
  }
  res.summary = Json{{"experiment", e},
                     {"name", config.name},
                     {"version", version()},
                     {"config_sha256", config.hash},
                     {"seeds", seeds},
                     {"n_grid", config.n_grid},
                     {"epsilon", config.epsilon ? Json(*config.epsilon) : Json("from_n")},
                     {"rows", rows.size()},
                     {"failures", std::move(failures)},
                     {"results", std::move(results)}};
  return res;
}

void write_outputs(const RunResult& result, const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& file, const std::string& content) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / file).string());
    out << content;
  };
  write(name + ".csv", result.csv);
  write(name + ".timing.csv", result.timing_csv);
  write(name + ".summary.json", result.summary.dump(2) + "\n");
  for (const auto& [file, content] : result.extra_files) write(file, content);
}

}  // namespace mlab::harness
