#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlab/errors.hpp"
#include "mlab/perturbation.hpp"
#include "mlab/serialize.hpp"

namespace mlab::harness {

/// Config problems, formatted "origin:line: field 'path': message".
class ConfigError : public Error {
 public:
  using Error::Error;
};

const char* version();
const std::vector<std::string>& experiment_kinds();

/// Which MDP an experiment runs on.
///   random    dense random dynamics, scalar state coordinates s/S, one-hot
///             actions, random rewards of RKHS norm reward_norm
///   two_state the mismatch instance: state 1 is reachable only by action 1
///   inline    an MdpSpec object under "spec"
///   file      an MdpSpec JSON file under "path" (relative to the config)
struct MdpSource {
  std::string generator = "random";
  std::size_t states = 4;
  std::size_t actions = 2;
  std::size_t horizon = 3;
  std::uint64_t seed = 7;
  double reward_norm = 0.8;
  Json spec;
};

struct EigdecayParams {
  Json kernel;
  std::size_t grid = 256;
  /// "uniform", or "empirical" with nu_samples i.i.d. grid draws per seed
  std::string nu = "uniform";
  std::size_t nu_samples = 0;
};

struct ConcentrationParams {
  std::size_t states = 16;
  double bandwidth = 0.3;
};

struct FittedParams {
  MdpSource mdp;
  Json kernel;
  double p = 0.1;
  std::uint64_t candidates_seed = 99;
  std::size_t random_policies = 16;
  SearchMode mode = SearchMode::enumerate;
  /// Frozen constant; the summary reports whether every run stays below it.
  std::optional<double> c_hat;
  std::size_t bellman_samples = 32;
  bool dump_samples = false;
};

struct SphereParams {
  std::vector<std::size_t> dims{2, 3};
  /// delta ~= delta_scale * n^{-1/(2(d-1))}, snapped to pi / grid_per_angle.
  double delta_scale = 1.0;
  /// H = ceil(horizon_constant * (d-1) / delta).
  double horizon_constant = 3.2;
  std::size_t dirac_starts = 4;
  std::size_t max_states = 4000;
  /// Report a grid-refinement check at the smallest n of each dimension.
  bool refinement = true;
};

struct AdversaryParams {
  MdpSource mdp;
  Json kernel;
  std::vector<double> nu;  // pair weights
  double threshold = 0.2;
  double min_fraction = 0.25;
};

struct ResponseParams {
  MdpSource mdp;
  Json kernel;
  /// "uniform" or explicit pair weights
  std::string nu = "uniform";
  std::vector<double> nu_weights;
  PiSearchOptions search;
};

struct ExperimentConfig {
  std::string origin;  // file path or "<string>"
  std::filesystem::path base_dir;
  std::string experiment;
  std::string name;
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  /// Fixed epsilon; unset means eps = n^{-1/2}.
  std::optional<double> epsilon;
  std::string output = ".";
  /// SHA-256 of the canonical (sorted-key, compact) config document.
  std::string hash;
  Json document;

  EigdecayParams eigdecay;
  ConcentrationParams concentration;
  FittedParams fitted;
  SphereParams sphere;
  AdversaryParams adversary;
  ResponseParams response;

  double epsilon_for(std::size_t n) const { return epsilon ? *epsilon : epsilon_from_n(static_cast<double>(n)); }
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// The MDP named by a source; kernel is the reward class for generated rewards.
MdpSpec build_mdp(const MdpSource& src, const Json& kernel_json, const std::filesystem::path& base_dir);
KernelSpec build_kernel(const Json& kernel_json, const MdpSpec& m);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// OLS of log(value) on log(n). Needs >= 3 rows, positive n and values.
SlopeFit fit_slope(std::span<const double> n, std::span<const double> values);

std::string sha256_hex(std::string_view data);

/// CSV columns of an experiment, in order. Every file starts with experiment,seed.
const std::vector<std::string>& csv_columns(const std::string& experiment);

struct RunOptions {
  std::int64_t seed_offset = 0;
};

struct RunResult {
  std::string csv;
  /// seed,n,... and wall_time_ms per task; not deterministic.
  std::string timing_csv;
  Json summary;
  std::size_t failures = 0;
  /// Extra files (name relative to the output directory, content).
  std::vector<std::pair<std::string, std::string>> extra_files;
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes <name>.csv, <name>.timing.csv, <name>.summary.json and extras into dir.
void write_outputs(const RunResult& result, const std::filesystem::path& dir, const std::string& name);

/// One-shot utilities behind the CLI.
struct DecomposeResult {
  SpectralBasis basis;
  Json json;
};
/// Config: {"kernel": ..., "points": {"dim", "points"}, "weights": [...] (optional)}.
DecomposeResult decompose_from_config(const Json& document);

/// complexity_known over default candidates for every n of a response config.
std::vector<ComplexityReport> respond(const ExperimentConfig& config);
/// candidate id, value, brackets, mode, iterations; one line per candidate.
std::string format_report_table(const ComplexityReport& r);

}  // namespace mlab::harness
