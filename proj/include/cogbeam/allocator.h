#ifndef COGBEAM_ALLOCATOR_H_
#define COGBEAM_ALLOCATOR_H_

#include <string>
#include <vector>

#include "cogbeam/bca.h"

namespace cogbeam {

// Euclidean projection onto {x >= 0, sum x <= iota_max}.
std::vector<double> ProjectSimplex(const std::vector<double>& v, double iota_max);

struct BudgetState {
  Budgets iota;    // [pu][link], watts
  Budgets lambda;  // [pu][link], 1/W
  int ell = 0;     // master iterations taken
  double step = 0.0;
};

struct AllocatorOptions {
  // s(l) = s0 / sqrt(l); 0 selects iota_max^2 (W^2, since lambda is in 1/W).
  double s0 = 0.0;
  int max_masters = 100;
  int max_stall = 5;
  double upsilon = 1e-5;
  // Run the inner BCA to convergence per master step instead of one cycle.
  bool inner_to_convergence = false;
  int max_inner_cycles = 100;
  // A master step whose inner pass loses sum utility is retried with half
  // the step, at most this many times, then with a zero step. 0 disables.
  int max_backtracks = 40;
  bool robust = true;
  double neighbor_threshold = 0.0;
  SdpOptions sdp{1e-9, 1e-9, 200};
};

double StepSize(const AllocatorOptions& opts, double iota_max, int ell);

// iota <- Proj[iota + step_scale * s(l) * lambda] per PU row; ell incremented.
BudgetState MasterStep(const BudgetState& state, const Budgets& lambdas, double iota_max,
                       const AllocatorOptions& opts, double step_scale = 1.0);

struct MasterRecord {
  int ell = 0;
  Budgets iota;    // budgets used by this inner pass
  Budgets lambda;  // multipliers returned by it
  double sum_utility = 0.0;
  double sum_mse = 0.0;
  std::vector<double> aggregate_worst_case;  // per PU, after the master step
};

struct AllocationResult {
  CovarianceProfile profile;
  BudgetState state;
  IterationTrace trace;
  std::vector<MasterRecord> masters;
  MessageLog log;
  bool converged = false;
  bool budget_collapse = false;
  int backtracks = 0;

  // master_iter,pu,link,iota_w,lambda
  std::string BudgetsCsv() const;
};

// Primal decomposition of the aggregate constraint sum_k wc_k <= iota_max
// (per PU), starting from the equal split.
AllocationResult RunPrimalDecomposition(const ChannelSet& ch, double iota_max, const AllocatorOptions& opts);

}  // namespace cogbeam

#endif  // COGBEAM_ALLOCATOR_H_
