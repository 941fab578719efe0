#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "cogbeam/check.h"
#include "cogbeam/error.h"
#include "cogbeam/harness.h"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> scenario;
  std::optional<std::string> algo;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void AddCommonFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Configuration file (defaults when omitted)");
  cmd->add_option("--scenario", o.scenario, "PU placement preset: c1 (70-100 m) or c2 (30-100 m)")
      ->check(CLI::IsMember({"c1", "c2"}));
  cmd->add_option("--algo", o.algo, "bca | bca_proximal | primal_decomp | nonrobust")
      ->check(CLI::IsMember({"bca", "bca_proximal", "primal_decomp", "nonrobust"}));
  cmd->add_option("--runs", o.runs, "Monte Carlo runs (default 200)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Experiment seed (default 1)");
  cmd->add_option("--out", o.out, "Output directory (default out)");
  cmd->add_option("--threads", o.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
}

cogbeam::ExperimentConfig Load(const Overrides& o) {
  cogbeam::ExperimentConfig cfg =
      o.config.empty() ? cogbeam::ParseConfig("") : cogbeam::ParseConfig(cogbeam::ReadFile(o.config));
  if (o.scenario) cfg.scenario = *o.scenario;
  if (o.algo) cfg.algo = cogbeam::ParseAlgo(*o.algo);
  if (o.runs) cfg.runs = *o.runs;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  cfg.Finalize();
  return cfg;
}

int Simulate(const Overrides& o) {
  const cogbeam::ExperimentConfig cfg = Load(o);
  const cogbeam::ExperimentResult res = cogbeam::RunExperiment(cfg);
  cogbeam::WriteExperiment(res, cfg, cfg.out_dir);
  int feasible = 0;
  int violations = 0;
  int ok = 0;
  double mse = 0.0;
  for (const auto& r : res.runs) {
    if (!r.ok) {
      std::cerr << "run " << r.run << " failed: " << r.error << "\n";
      continue;
    }
    ++ok;
    feasible += r.feasible ? 1 : 0;
    violations += r.aggregate_violation ? 1 : 0;
    mse += r.final_sum_mse;
  }
  std::printf("%s %s: %d/%d runs ok, mean sum-MSE %.6g, feasible %d, aggregate violations %d\n",
              std::string(cogbeam::AlgoName(cfg.algo)).c_str(), cfg.scenario.c_str(), ok, cfg.runs,
              ok > 0 ? mse / ok : 0.0, feasible, violations);
  std::printf("wrote %s\n", cfg.out_dir.c_str());
  return res.complete ? 0 : 1;
}

int Sweep(const Overrides& o, const std::optional<std::string>& parameter, const std::vector<double>& values) {
  cogbeam::ExperimentConfig cfg = Load(o);
  if (parameter) {
    if (!cfg.sweep) cfg.sweep.emplace();
    cfg.sweep->parameter = *parameter;
  }
  if (!values.empty()) {
    if (!cfg.sweep) cfg.sweep.emplace();
    cfg.sweep->values = values;
  }
  if (!cfg.sweep || cfg.sweep->parameter.empty() || cfg.sweep->values.empty()) {
    throw cogbeam::Error(cogbeam::ErrorCode::kInvalidConfig,
                         "sweep needs a parameter and values ([sweep] section or --parameter/--values)");
  }
  cfg.Finalize();
  const auto points = cogbeam::RunSweep(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);
  cogbeam::WriteFile(dir / "sweep.csv", cogbeam::SweepCsv(points));
  cogbeam::WriteManifest(dir, {"sweep.csv"},
                         {"status: complete", "algo: " + std::string(cogbeam::AlgoName(cfg.algo)),
                          "scenario: " + cfg.scenario, "runs: " + std::to_string(cfg.runs),
                          "seed: " + std::to_string(cfg.seed), "parameter: " + cfg.sweep->parameter});
  for (const auto& p : points) {
    std::printf("%s=%.6g mean sum-MSE %.6g (se %.3g, %d runs)\n", p.parameter.c_str(), p.value,
                p.mean_sum_mse, p.std_err, p.runs);
  }
  return 0;
}

int Check(const cogbeam::CheckOptions& opts) {
  const auto results = cogbeam::RunChecks(opts);
  bool all = true;
  for (const auto& r : results) {
    std::printf("%-20s %s  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust MIMO cognitive-radio beamforming experiments"};
  app.require_subcommand(1);
  app.footer("Config grammar: [section] headers and key = value lines; print the reference file with "
             "'simulate --print-config'.");

  Overrides sim;
  bool print_config = false;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo experiment; writes CSV files and MANIFEST");
  AddCommonFlags(simulate, sim);
  simulate->add_flag("--print-config", print_config, "Print the reference configuration and exit");

  Overrides swp;
  std::optional<std::string> parameter;
  std::vector<double> values;
  CLI::App* sweep = app.add_subcommand("sweep", "Mean sum-MSE over a parameter grid (common random numbers)");
  AddCommonFlags(sweep, swp);
  sweep->add_option("--parameter", parameter, "iota_max | rho | snr_db")
      ->check(CLI::IsMember({"iota_max", "rho", "snr_db"}));
  sweep->add_option("--values", values, "Grid values")->delimiter(',');

  cogbeam::CheckOptions check_opts;
  std::string channels;
  std::string manifest;
  CLI::App* check = app.add_subcommand("check", "Invariant and certificate suites on fixtures");
  check->add_option("--seed", check_opts.seed, "Fixture seed");
  check->add_option("--instances", check_opts.instances, "Random instances per suite")
      ->check(CLI::PositiveNumber);
  check->add_option("--channels", channels, "JSON channel fixture to validate and solve on");
  check->add_option("--verify", manifest, "Output directory whose MANIFEST is verified");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) {
      if (print_config) {
        std::fputs(cogbeam::ReferenceConfig().c_str(), stdout);
        return 0;
      }
      return Simulate(sim);
    }
    if (*sweep) return Sweep(swp, parameter, values);
    if (!channels.empty()) check_opts.channels_file = channels;
    if (!manifest.empty()) check_opts.manifest_dir = manifest;
    return Check(check_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
