#ifndef COGBEAM_BCA_H_
#define COGBEAM_BCA_H_

#include <optional>
#include <string>
#include <vector>

#include "cogbeam/lmi.h"
#include "cogbeam/mse.h"
#include "cogbeam/scenario.h"
#include "cogbeam/sdp.h"

namespace cogbeam {

// Per-PU, per-link interference limits in watts, indexed [pu][link].
using Budgets = std::vector<std::vector<double>>;

enum class BcaMode { kPlain, kProximal };

enum class StopRule {
  kSumUtility,  // U(n) - U(n-1) < upsilon
  kPerLink,     // |u_k(n) - u_k(n-1)| < upsilon for every k
};

struct BcaOptions {
  BcaMode mode = BcaMode::kPlain;
  std::vector<double> tau{0.1};      // length 1 or K
  double upsilon = 1e-5;
  int max_cycles = 100;
  double neighbor_threshold = 0.0;
  // false: eps forced to 0 and G_hat used in a plain trace constraint.
  bool robust = true;
  // Unset: kSumUtility for the centralized run, kPerLink for the distributed one.
  std::optional<StopRule> stop_rule;
  bool track_stationarity = false;
  SdpOptions sdp{1e-9, 1e-9, 200};

  double Tau(int k) const { return tau.size() == 1 ? tau[0] : tau.at(static_cast<std::size_t>(k)); }
};

void Validate(const BcaOptions& opts, int num_links);

struct CycleRecord {
  int cycle = 0;
  double sum_utility = 0.0;
  double sum_mse = 0.0;
  std::vector<double> u;
  std::vector<std::vector<double>> nominal_interference;     // [pu][link], watts
  std::vector<std::vector<double>> worst_case_interference;  // [pu][link], watts
  double max_step = 0.0;       // max_k ||Q_k(n) - Q_k(n-1)||_F
  double stationarity = -1.0;  // negative when not tracked
  double wall_seconds = 0.0;
  int solver_warnings = 0;     // MaxIter / breakdown solves accepted via safeguard
};

struct IterationTrace {
  std::vector<CycleRecord> cycles;  // cycles[0] is the all-zero start
  bool converged = false;

  int completed_cycles() const { return static_cast<int>(cycles.size()) - 1; }
  // cycle,sum_utility,sum_mse,max_step,stationarity,wall_s,u_0..u_{K-1}
  std::string ToCsv() const;
};

struct Message {
  int cycle = 0;
  int from = 0;   // -1 is the cluster head
  int to = 0;
  std::string kind;  // "BV", "lambda", "iota"
  std::size_t bytes = 0;
};

struct MessageLog {
  std::vector<Message> messages;

  std::size_t Count(const std::string& kind) const;
  // cycle,from,to,kind,bytes
  std::string ToCsv() const;
};

struct LinkOptions {
  BcaMode mode = BcaMode::kPlain;
  double tau = 0.1;
  bool robust = true;
  bool budgeted = false;
  double interference_scale = 0.0;
  SdpOptions sdp{1e-9, 1e-9, 200};
  int cycle = 0;  // for error context
};

struct LinkUpdate {
  HermitianMatrix Q{0};
  std::vector<double> lambda;  // per PU, budgeted mode only
  bool kept_previous = false;
  SdpStatus status = SdpStatus::kOptimal;
};

// Solves link k's convexified subproblem around the current profile,
// polishes the result into the exact feasible set and keeps the previous
// covariance when it scores at least as well on the same surrogate.
LinkUpdate UpdateLink(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k,
                      const HermitianMatrix& D_k, const HermitianMatrix& R_kk,
                      const std::vector<double>& iota_k, const LinkOptions& opts);

// Worst-case (or, if !robust, nominal) interference of link k towards PU p.
double LinkInterference(const ChannelSet& ch, const HermitianMatrix& Q_k, int pu, int k, bool robust);

CycleRecord Snapshot(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int cycle);

struct BcaResult {
  CovarianceProfile profile;
  IterationTrace trace;
};

struct DistributedResult {
  CovarianceProfile profile;
  IterationTrace trace;
  MessageLog log;
};

BcaResult RunCentralized(const ChannelSet& ch, const Budgets& budgets, const BcaOptions& opts);
DistributedResult RunDistributed(const ChannelSet& ch, const Budgets& budgets, const BcaOptions& opts);

// max_k max_{Q_k feasible} Re Tr{grad_k U (Q_k - Qbar_k)}.
double StationarityResidual(const ChannelSet& ch, const CovarianceProfile& prof, const Budgets& budgets,
                            bool robust = true);

// true iff sigma_min(H_kk) > 1e-10 sigma_max(H_kk) and N_k >= M_k.
std::vector<bool> RankCheck(const ChannelSet& ch);

}  // namespace cogbeam

#endif  // COGBEAM_BCA_H_
