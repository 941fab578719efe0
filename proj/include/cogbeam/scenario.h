#ifndef COGBEAM_SCENARIO_H_
#define COGBEAM_SCENARIO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogbeam/matrix_core.h"

namespace cogbeam {

enum class BudgetMode { kPrepartitionedEqual, kAggregate };

struct Range {
  double min = 0.0;
  double max = 0.0;
};

// One experiment instance. Per-link vectors of length 1 are broadcast to all
// K links (likewise pu_antennas over num_pu).
struct NetworkConfig {
  int num_links = 4;                   // K
  std::vector<int> tx_antennas{2};     // M_k
  std::vector<int> rx_antennas{2};     // N_k
  int num_pu = 1;
  std::vector<int> pu_antennas{2};     // L per PU receiver
  double path_loss_exponent = 3.5;     // eta
  std::vector<double> direct_distance_m{30.0};
  Range cross_distance_m{30.0, 100.0};
  Range pu_distance_m{70.0, 100.0};
  double snr_db = 15.0;
  double noise_w = 1e-7;               // sigma_k^2, identical for all links
  double iota_max_w = 4e-7;            // tolerable interference per PU receiver
  BudgetMode budget_mode = BudgetMode::kPrepartitionedEqual;
  double rho = 0.05;                   // eps_k^2 = rho * ||G_hat_k||_F^2
  std::uint64_t seed = 1;

  int M(int k) const;
  int N(int k) const;
  int L(int pu) const;
  double DirectDistance(int k) const;
  // p such that p * d_kk^-eta / noise equals the configured SNR.
  double PMax(int k) const;
};

// Throws kInvalidConfig naming the violated invariant.
void Validate(const NetworkConfig& cfg);

// All channels of one network realization.
struct ChannelSet {
  int num_links = 0;
  int num_pu = 0;
  // H[k][j]: transmitter j -> receiver k, shape N_k x M_j.
  std::vector<std::vector<ComplexMatrix>> H;
  // G_hat[p][k]: estimated transmitter k -> PU p channel, shape L_p x M_k.
  std::vector<std::vector<ComplexMatrix>> G_hat;
  std::optional<std::vector<std::vector<ComplexMatrix>>> G_true;
  std::vector<std::vector<double>> eps;  // eps[p][k]
  std::vector<double> sigma2;            // per link, watts
  std::vector<double> p_max;             // per link, watts
  // Sampled geometry, kept for reporting only.
  std::vector<std::vector<double>> cr_distance_m;  // [k][j]
  std::vector<std::vector<double>> pu_distance_m;  // [p][k]

  int M(int k) const { return static_cast<int>(H[k][k].cols()); }
  int N(int k) const { return static_cast<int>(H[k][k].rows()); }
  int L(int p) const { return static_cast<int>(G_hat[p][0].rows()); }
  // Throws kShapeMismatch if dimensions are inconsistent.
  void CheckShapes() const;
};

// Draws one Rayleigh-faded realization. `run` selects an independent Monte
// Carlo replica of the same configuration.
ChannelSet Generate(const NetworkConfig& cfg, std::uint64_t run = 0);

// "c1": PU distances 70-100 m; "c2": 30-100 m. Throws kUnknownPreset.
NetworkConfig ScenarioPreset(std::string_view name, const NetworkConfig& base);

// sqrt(rho) * ||G_hat||_F.
double UncertaintyRadius(const ComplexMatrix& g_hat, double rho);

// Per-link budgets iota_k = iota_max / K for every PU: result[p][k].
std::vector<std::vector<double>> EqualSplitBudgets(const NetworkConfig& cfg);
std::vector<std::vector<double>> EqualSplitBudgets(int num_pu, int num_links, double iota_max);

std::string BudgetModeName(BudgetMode mode);

}  // namespace cogbeam

#endif  // COGBEAM_SCENARIO_H_
