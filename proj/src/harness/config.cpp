#include <algorithm>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "mlab/harness.hpp"

namespace mlab::harness {

namespace {

struct Source {
  std::string origin;
  std::string text;

  // Line of the last key of `path` in the text, found by walking the keys in
  // order. Array indices are skipped. Falls back to line 1.
  std::size_t line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    bool found = false;
    for (const auto& key : path) {
      if (!key.empty() && std::all_of(key.begin(), key.end(), ::isdigit)) continue;
      const std::size_t at = text.find("\"" + key + "\"", pos);
      if (at == std::string::npos) break;
      pos = at;
      found = true;
    }
    if (!found) return 1;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }
};

std::string join(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& p : path) s += (s.empty() ? "" : ".") + p;
  return s;
}

/// Typed access to one JSON object with diagnostics and unknown-key detection.
class Fields {
 public:
  Fields(const Json& j, std::vector<std::string> path, const Source& src) : j_(j), path_(std::move(path)), src_(src) {
    if (!j_.is_object()) fail_at(path_, "expected an object");
  }

  bool has(const std::string& key) const {
    used_.insert(key);
    return j_.contains(key);
  }

  const Json& raw(const std::string& key) const {
    if (!has(key)) fail(key, "is required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "is required");
    }
    const Json& v = j_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) const {
    const double x = number(key, def);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  std::uint64_t uinteger(const std::string& key, std::optional<std::uint64_t> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "is required");
    }
    return as_uint(j_.at(key), key);
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      fail(key, "is required");
    }
    const Json& v = j_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(key, "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> uintegers(const std::string& key) const {
    const Json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of nonnegative integers");
    std::vector<std::uint64_t> out;
    for (const auto& x : v) out.push_back(as_uint(x, key));
    return out;
  }

  Fields object(const std::string& key) const {
    const Json& v = raw(key);
    auto p = path_;
    p.push_back(key);
    if (!v.is_object()) fail(key, "must be an object");
    return Fields(v, std::move(p), src_);
  }

  /// Every key of the object must have been looked at.
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail(it.key(), "is not a recognized field");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    auto p = path_;
    p.push_back(key);
    fail_at(p, msg);
  }

  [[noreturn]] void fail_at(const std::vector<std::string>& p, const std::string& msg) const {
    throw ConfigError(src_.origin + ":" + std::to_string(src_.line_of(p)) + ": field '" + join(p) + "' " + msg);
  }

  const std::vector<std::string>& path() const { return path_; }

 private:
  std::uint64_t as_uint(const Json& v, const std::string& key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
    fail(key, "must be a nonnegative integer");
  }

  const Json& j_;
  std::vector<std::string> path_;
  const Source& src_;
  mutable std::set<std::string> used_;
};

/// Parses a nested component that has its own JSON reader, turning reader
/// errors into field diagnostics. Done here so configs fail before any work.
template <typename Fn>
void check_component(const Fields& f, const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    f.fail(key, std::string("is invalid: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    f.fail(key, std::string("is invalid: ") + e.what());
  }
}

MdpSource parse_mdp(const Fields& parent, const std::string& key, const std::string& def_generator,
                    const std::filesystem::path& base_dir) {
  MdpSource src;
  src.generator = def_generator;
  if (!parent.has(key)) return src;
  const Fields f = parent.object(key);
  src.generator = f.text("generator", def_generator);
  if (src.generator == "random") {
    src.states = f.uinteger("states", 4);
    src.actions = f.uinteger("actions", 2);
    src.horizon = f.uinteger("horizon", 3);
    src.seed = f.uinteger("seed", 7);
    src.reward_norm = f.number("reward_norm", 0.8);
    if (src.states < 1) f.fail("states", "must be at least 1");
    if (src.actions < 1) f.fail("actions", "must be at least 1");
    if (src.horizon < 1) f.fail("horizon", "must be at least 1");
    if (src.reward_norm < 0.0) f.fail("reward_norm", "must be nonnegative");
  } else if (src.generator == "two_state") {
    src.horizon = f.uinteger("horizon", 2);
    if (src.horizon < 2) f.fail("horizon", "must be at least 2");
  } else if (src.generator == "inline") {
    src.spec = f.raw("spec");
    check_component(f, "spec", [&] { mdp_from_json(src.spec); });
  } else if (src.generator == "file") {
    const std::filesystem::path p = base_dir / f.text("path");
    std::ifstream in(p);
    if (!in) f.fail("path", "names a file that does not exist: " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    check_component(f, "path", [&] {
      src.spec = Json::parse(ss.str());
      mdp_from_json(src.spec);
    });
  } else {
    f.fail("generator", "must be one of random, two_state, inline, file");
  }
  f.reject_unknown();
  return src;
}

Json parse_kernel(const Fields& parent, Json def) {
  if (!parent.has("kernel")) return def;
  parent.object("kernel");
  const Json& j = parent.raw("kernel");
  check_component(parent, "kernel", [&] {
    // Dimension is checked against the MDP later; a placeholder lets the reader validate the rest.
    kernel_from_json(j, std::size_t{1});
  });
  return j;
}

SearchMode parse_mode(const Fields& f, SearchMode def) {
  if (!f.has("mode")) return def;
  const std::string s = f.text("mode");
  try {
    return parse_search_mode(s);
  } catch (const Error&) {
    f.fail("mode", "must be one of enumerate, ascent, dirac_sup");
  }
}

void parse_params(ExperimentConfig& c, const Fields& top, const Source& src) {
  (void)src;
  const bool present = top.has("params");
  const Json empty = Json::object();
  const Fields f = present ? top.object("params") : Fields(empty, {"params"}, src);
  const std::string& e = c.experiment;
  if (e == "eigdecay") {
    auto& p = c.eigdecay;
    p.kernel = parse_kernel(f, Json{{"kind", "fourier_spectrum"}, {"decay", 2.0}, {"terms", 255}});
    p.grid = f.uinteger("grid", 256);
    if (p.grid < 1) f.fail("grid", "must be at least 1");
    p.nu = f.text("nu", "uniform");
    if (p.nu != "uniform" && p.nu != "empirical") f.fail("nu", "must be uniform or empirical");
    p.nu_samples = f.uinteger("nu_samples", p.grid);
    if (p.nu == "empirical" && p.nu_samples < 1) f.fail("nu_samples", "must be at least 1");
    if (kernel_kind_name(parse_kernel_kind(p.kernel.at("kind").get<std::string>())) != std::string("fourier_spectrum")) {
      f.fail("kernel", "must be a fourier_spectrum kernel for eigdecay");
    }
  } else if (e == "concentration") {
    auto& p = c.concentration;
    p.states = f.uinteger("states", 16);
    if (p.states < 1) f.fail("states", "must be at least 1");
    p.bandwidth = f.positive("bandwidth", 0.3);
  } else if (e == "fitted_reward" || e == "fitted_q") {
    auto& p = c.fitted;
    p.mdp = parse_mdp(f, "mdp", "random", c.base_dir);
    p.kernel = parse_kernel(f, Json{{"kind", "gaussian"}, {"bandwidth", 0.5}});
    p.p = f.number("p", 0.1);
    if (!(p.p > 0.0 && p.p < 1.0)) f.fail("p", "must lie in (0, 1)");
    p.candidates_seed = f.uinteger("candidates_seed", 99);
    p.random_policies = f.uinteger("random_policies", 16);
    p.mode = parse_mode(f, SearchMode::enumerate);
    if (f.has("c_hat")) p.c_hat = f.positive("c_hat");
    p.bellman_samples = f.uinteger("bellman_samples", 32);
    p.dump_samples = f.boolean("dump_samples", false);
  } else if (e == "sphere_cod") {
    auto& p = c.sphere;
    if (f.has("dims")) {
      p.dims.clear();
      for (auto d : f.uintegers("dims")) {
        if (d < 2) f.fail("dims", "entries must be at least 2");
        p.dims.push_back(d);
      }
      if (p.dims.empty()) f.fail("dims", "must be nonempty");
    }
    p.delta_scale = f.positive("delta_scale", 1.0);
    p.horizon_constant = f.positive("horizon_constant", 3.2);
    p.dirac_starts = f.uinteger("dirac_starts", 4);
    p.max_states = f.uinteger("max_states", 4000);
    p.refinement = f.boolean("refinement", true);
  } else if (e == "adversary_demo") {
    auto& p = c.adversary;
    p.mdp = parse_mdp(f, "mdp", "two_state", c.base_dir);
    p.kernel = parse_kernel(f, Json{{"kind", "gaussian"}, {"bandwidth", 0.3}});
    if (f.has("nu")) {
      p.nu = f.numbers("nu");
    } else if (p.mdp.generator == "two_state") {
      p.nu = {0.5, 0.5, 0.0, 0.0};
    } else {
      f.fail("nu", "is required unless the MDP is two_state");
    }
    p.threshold = f.positive("threshold", 0.2);
    p.min_fraction = f.number("min_fraction", 0.25);
  } else if (e == "response") {
    auto& p = c.response;
    p.mdp = parse_mdp(f, "mdp", "random", c.base_dir);
    p.kernel = parse_kernel(f, Json{{"kind", "gaussian"}, {"bandwidth", 0.5}});
    if (f.has("nu")) {
      const Json& v = f.raw("nu");
      if (v.is_string()) {
        p.nu = v.get<std::string>();
        if (p.nu != "uniform") f.fail("nu", "must be \"uniform\" or an array of pair weights");
      } else {
        p.nu = "weights";
        p.nu_weights = f.numbers("nu");
      }
    }
    p.search.mode = parse_mode(f, SearchMode::enumerate);
    if (f.has("steps")) {
      for (auto h : f.uintegers("steps")) p.search.steps.push_back(h);
    }
    p.search.dirac_starts = f.uinteger("dirac_starts", p.search.dirac_starts);
  }
  if (present) f.reject_unknown();
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"eigdecay",  "concentration",  "fitted_reward", "fitted_q",
                                              "sphere_cod", "adversary_demo", "response"};
  return kinds;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  const Source src{origin, text};
  ExperimentConfig c;
  c.origin = origin;
  c.base_dir = base_dir;
  try {
    c.document = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n'));
    throw ConfigError(origin + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  const Fields top(c.document, {}, src);
  c.experiment = top.text("experiment");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.experiment) == kinds.end()) {
    std::string list;
    for (const auto& k : kinds) list += (list.empty() ? "" : ", ") + k;
    top.fail("experiment", "must be one of " + list);
  }
  std::string stem = std::filesystem::path(origin).stem().string();
  c.name = top.text("name", stem.empty() || origin == "<string>" ? c.experiment : stem);
  if (c.name.empty() || c.name.find('/') != std::string::npos) top.fail("name", "must be a nonempty file stem");

  for (auto n : top.uintegers("n_grid")) {
    if (n < 1) top.fail("n_grid", "entries must be positive");
    if (!c.n_grid.empty() && n <= c.n_grid.back()) top.fail("n_grid", "must be strictly increasing");
    c.n_grid.push_back(n);
  }
  if (c.n_grid.empty()) top.fail("n_grid", "must be nonempty");
  c.seeds = top.uintegers("seeds");
  if (c.seeds.empty()) top.fail("seeds", "must be nonempty");
  if (top.has("epsilon")) {
    const Json& e = top.raw("epsilon");
    if (e.is_string()) {
      if (e.get<std::string>() != "from_n") top.fail("epsilon", "must be a positive number or \"from_n\"");
    } else {
      c.epsilon = top.positive("epsilon");
    }
  }
  c.output = top.text("output", ".");
  parse_params(c, top, src);
  top.reject_unknown();
  c.hash = sha256_hex(c.document.dump());
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace mlab::harness
