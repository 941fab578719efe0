#ifndef COGBEAM_CHECK_H_
#define COGBEAM_CHECK_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cogbeam/mse.h"
#include "cogbeam/rng.h"
#include "cogbeam/scenario.h"

namespace cogbeam {

// Small random network: K in [1, max_links], antenna counts in [1, max_dim].
ChannelSet RandomSmallInstance(Rng& rng, int max_links, int max_dim, std::uint64_t seed);

// Random PSD covariances with Tr Q_k in (0, p_max_k].
std::vector<HermitianMatrix> RandomProfile(Rng& rng, const ChannelSet& ch);

// Central differences of f_k = sum_{j != k} u_j along Hermitian basis
// directions, reassembled into the matrix D with df = Re Tr{D dQ_k}.
ComplexMatrix FiniteDifferenceGradient(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                       int k, double h);

// max |D_fd - D| / max |D| over entries, step 1e-5 p_max_k.
double GradientRelativeError(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  int instances = 50;
  std::optional<std::filesystem::path> channels_file;  // JSON fixture to validate and solve on
  std::optional<std::filesystem::path> manifest_dir;   // output directory to verify
};

std::vector<CheckResult> RunChecks(const CheckOptions& opts);

}  // namespace cogbeam

#endif  // COGBEAM_CHECK_H_
