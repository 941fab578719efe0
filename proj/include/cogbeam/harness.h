#ifndef COGBEAM_HARNESS_H_
#define COGBEAM_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogbeam/allocator.h"
#include "cogbeam/bca.h"
#include "cogbeam/scenario.h"

namespace cogbeam {

enum class Algo { kBca, kBcaProximal, kPrimalDecomp, kNonrobust };

std::string_view AlgoName(Algo algo);
Algo ParseAlgo(std::string_view name);  // throws kInvalidConfig

struct SweepSpec {
  std::string parameter;  // iota_max | rho | snr_db
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string scenario = "c1";
  Algo algo = Algo::kBca;
  int runs = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  NetworkConfig network;
  BcaOptions bca;
  AllocatorOptions allocator;
  std::optional<SweepSpec> sweep;
  // Explicit PU distance bounds; unset bounds come from the scenario preset.
  std::optional<double> pu_distance_min_m;
  std::optional<double> pu_distance_max_m;

  // Applies the scenario preset and explicit PU distances to `network`,
  // copies the seed and budget mode, then validates everything.
  void Finalize();
};

// Line-oriented grammar:
//   # comment
//   [section]
//   key = value            (lists are comma separated)
// Sections: experiment, network, bca, allocator, sweep. Unknown sections or
// keys raise kUnknownKey, malformed lines kParseError, out-of-range values
// kRangeError; every message starts with "line N:".
ExperimentConfig ParseConfig(std::string_view text);

// Text of the shipped reference configuration (all defaults spelled out).
std::string ReferenceConfig();

// Applies a sweep parameter value to a config copy.
ExperimentConfig WithParameter(const ExperimentConfig& cfg, const std::string& parameter, double value);

struct InterferenceRow {
  int pu = 0;
  int link = 0;
  double nominal_w = 0.0;
  double worst_case_w = 0.0;
  double realized_w = 0.0;
  double limit_w = 0.0;
};

struct RunOutcome {
  int run = 0;
  bool ok = false;
  std::string error;
  double final_sum_mse = 0.0;
  int cycles = 0;
  bool converged = false;
  bool feasible = false;            // worst-case and realized within per-link limits
  bool aggregate_violation = false; // realized sum over links > iota_max, some PU
  bool link_violation = false;      // realized > per-link limit, some link
  double max_utility_drop = 0.0;    // max_n U(n-1) - U(n), clipped at 0
  double max_aggregate_worst_case = 0.0;  // over master steps, primal decomposition
  std::vector<InterferenceRow> interference;
  std::vector<std::pair<double, double>> trace;  // (sum_mse, sum_utility) per cycle
  std::vector<MasterRecord> masters;
};

struct MetricRow {
  int run = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::vector<MetricRow> metrics;
  bool complete = true;
};

RunOutcome RunOne(const ExperimentConfig& cfg, int run);

// Runs cfg.runs independent instances on cfg.threads workers. Never throws
// for per-run failures; those are recorded and mark the result incomplete.
ExperimentResult RunExperiment(const ExperimentConfig& cfg);

// Writes interference_cdf.csv, mse_trace.csv, summary.csv, budgets.csv,
// metrics.csv and MANIFEST into dir.
void WriteExperiment(const ExperimentResult& res, const ExperimentConfig& cfg,
                     const std::filesystem::path& dir);

struct SweepPoint {
  std::string parameter;
  double value = 0.0;
  int runs = 0;
  double mean_sum_mse = 0.0;
  double std_err = 0.0;
};

// Common random numbers: every grid point reuses the same seeds.
std::vector<SweepPoint> RunSweep(const ExperimentConfig& cfg);
std::string SweepCsv(const std::vector<SweepPoint>& points);

// Right-continuous empirical CDF: (x_(i), i/n), sorted. Throws kEmptyInput.
std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values);

std::string Sha256Hex(std::string_view data);

// MANIFEST: "sha256  name" per file; returns the names whose hash differs.
void WriteManifest(const std::filesystem::path& dir, const std::vector<std::string>& files,
                   const std::vector<std::string>& notes);
std::vector<std::string> VerifyManifest(const std::filesystem::path& dir);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

}  // namespace cogbeam

#endif  // COGBEAM_HARNESS_H_
