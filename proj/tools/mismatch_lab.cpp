// mismatch-lab: config-driven experiment runner.
//
//   mismatch-lab <experiment> --config path [--out dir] [--seed-offset k]
//   mismatch-lab decompose    --config path [--out dir]
//   mismatch-lab respond      --config path [--out dir]
//
// Exit codes: 0 all seeds succeeded, 1 some seed failed, 2 bad config or usage.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlab/harness.hpp"

using namespace mlab;

namespace {

struct Args {
  std::string config;
  std::string out;
  long long seed_offset = 0;
};

void add_common(CLI::App* sub, Args& a, bool seeds) {
  sub->add_option("--config", a.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", a.out, "output directory (default: the config's \"output\" field)");
  if (seeds) sub->add_option("--seed-offset", a.seed_offset, "added to every configured seed");
}

std::filesystem::path out_dir(const Args& a, const harness::ExperimentConfig& c) {
  if (!a.out.empty()) return a.out;
  return c.base_dir / c.output;
}

int run_experiment(const std::string& kind, const Args& a) {
  const auto c = harness::load_config(a.config);
  if (c.experiment != kind) {
    std::fprintf(stderr, "%s: config is for experiment '%s', not '%s'\n", a.config.c_str(), c.experiment.c_str(),
                 kind.c_str());
    return 2;
  }
  harness::RunOptions opts;
  opts.seed_offset = a.seed_offset;
  const auto res = harness::run_experiment(c, opts);
  const auto dir = out_dir(a, c);
  harness::write_outputs(res, dir, c.name);
  for (const auto& f : res.summary.at("failures")) {
    std::fprintf(stderr, "seed %llu task %s failed: %s\n", static_cast<unsigned long long>(f.at("seed").get<std::uint64_t>()),
                 f.at("task").get<std::string>().c_str(), f.at("error").get<std::string>().c_str());
  }
  std::printf("%s: %zu rows, %zu failed tasks -> %s\n", c.name.c_str(), res.summary.at("rows").get<std::size_t>(),
              res.failures, (dir / (c.name + ".csv")).string().c_str());
  return res.failures == 0 ? 0 : 1;
}

int run_decompose(const Args& a) {
  std::ifstream in(a.config);
  std::stringstream ss;
  ss << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw harness::ConfigError(a.config + ": invalid JSON: " + e.what());
  }
  const auto r = harness::decompose_from_config(doc);
  const std::filesystem::path cfg(a.config);
  const std::filesystem::path dir = a.out.empty() ? (cfg.parent_path().empty() ? "." : cfg.parent_path()) : std::filesystem::path(a.out);
  std::filesystem::create_directories(dir);
  const auto file = dir / (cfg.stem().string() + ".basis.json");
  std::ofstream(file) << r.json.dump(2) << "\n";
  std::printf("rank %zu (dropped %zu)\n", r.basis.rank(), r.basis.dropped());
  const auto& eig = r.basis.eigenvalues();
  for (std::size_t i = 0; i < eig.size() && i < 10; ++i) std::printf("  lambda_%zu = %.10g\n", i + 1, eig[i]);
  std::printf("-> %s\n", file.string().c_str());
  return 0;
}

int run_respond(const Args& a) {
  const auto c = harness::load_config(a.config);
  const auto reports = harness::respond(c);
  Json all = Json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::printf("n = %zu\n%s\n", c.n_grid[i], harness::format_report_table(reports[i]).c_str());
    Json j = to_json(reports[i]);
    j["n"] = c.n_grid[i];
    all.push_back(std::move(j));
  }
  if (!a.out.empty()) {
    std::filesystem::create_directories(a.out);
    std::ofstream(std::filesystem::path(a.out) / (c.name + ".respond.json")) << all.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution-mismatch experiments for kernel RL"};
  app.require_subcommand(1);
  Args args;
  std::vector<std::pair<std::string, CLI::App*>> experiments;
  for (const auto& kind : harness::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run the " + kind + " experiment");
    add_common(sub, args, true);
    experiments.emplace_back(kind, sub);
  }
  auto* dec = app.add_subcommand("decompose", "Mercer eigensystem of a kernel on a weighted point set");
  add_common(dec, args, false);
  auto* resp = app.add_subcommand("respond", "perturbational complexity table for a response config");
  add_common(resp, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (dec->parsed()) return run_decompose(args);
    if (resp->parsed()) return run_respond(args);
    for (const auto& [kind, sub] : experiments) {
      if (sub->parsed()) return run_experiment(kind, args);
    }
  } catch (const harness::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
