#ifndef COGBEAM_MSE_H_
#define COGBEAM_MSE_H_

#include <optional>
#include <vector>

#include "cogbeam/matrix_core.h"
#include "cogbeam/scenario.h"

namespace cogbeam {

// Current transmit covariances Q_k (watts) and, once computed, the linear
// receive filters W_k (M_k x N_k).
struct CovarianceProfile {
  std::vector<HermitianMatrix> Q;
  std::optional<std::vector<ComplexMatrix>> W;

  static CovarianceProfile Zero(const ChannelSet& ch);
};

struct UtilityReport {
  std::vector<double> u;
  double sum_u = 0.0;
  double sum_mse = 0.0;
  std::vector<HermitianMatrix> A;  // A_k = sum_j H_kj Q_j H_kj^H + sigma_k^2 I
  std::vector<HermitianMatrix> R;  // R_kk = A_k - H_kk Q_k H_kk^H
};

// R_kk: interference-plus-noise covariance seen by receiver k.
HermitianMatrix InterferenceCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                       int k);
// B_k (= A_k): total received covariance at receiver k.
HermitianMatrix ReceivedCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                   int k);
// V_k = H_kk Q_k H_kk^H.
HermitianMatrix SignalCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                 int k);

// u_k = Tr{V_k (V_k + R_kk)^-1}. Throws kSingularSystem if V_k + R_kk is
// not numerically positive definite.
double LinkUtility(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k);

UtilityReport Utility(const ChannelSet& ch, const CovarianceProfile& prof);

// W_k = F_k^H H_kk^H A_k^-1 with F_k the Hermitian square root of Q_k.
std::vector<ComplexMatrix> OptimalReceiver(const ChannelSet& ch, const CovarianceProfile& prof);
void AttachOptimalReceiver(const ChannelSet& ch, CovarianceProfile& prof);

// E_k for the stored receivers; throws kMissingReceiver when prof.W is empty.
HermitianMatrix MseMatrix(const ChannelSet& ch, const CovarianceProfile& prof, int k);
// Same with an explicit receiver, for perturbation studies.
HermitianMatrix MseMatrix(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                          const ComplexMatrix& W, int k);

// One summand of D_k contributed by receiver j: -H_jk^H B_j^-1 V_j B_j^-1 H_jk.
HermitianMatrix GradientTerm(const ComplexMatrix& H_jk, const HermitianMatrix& B_j,
                             const HermitianMatrix& V_j);

// D_k = d f_k / d Q_k^* with f_k = sum_{j != k} u_j. Receivers j whose cross
// gain ||H_jk||_F^2 falls below neighbor_threshold are left out of the sum.
HermitianMatrix GradientD(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k,
                          double neighbor_threshold = 0.0);

// d u_k / d Q_k^* = H_kk^H A_k^-1 R_kk A_k^-1 H_kk.
HermitianMatrix OwnUtilityGradient(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                   int k);

// Tr{G Q_k G^H} with G the estimated or (use_true) realized channel of link
// k towards PU `pu`. Throws kMissingTrueChannel if G_true is absent.
double Interference(const ChannelSet& ch, const HermitianMatrix& Q_k, int pu, int k,
                    bool use_true);

struct WorstCase {
  double value = 0.0;       // watts
  ComplexMatrix delta_g;    // maximizing perturbation, ||delta_g||_F = eps
};

// max over ||dG||_F <= eps of Tr{(G_hat + dG) Q (G_hat + dG)^H}, solved
// exactly through the trust-region secular equation.
WorstCase WorstCaseInterference(const ComplexMatrix& g_hat, double eps, const HermitianMatrix& Q);

}  // namespace cogbeam

#endif  // COGBEAM_MSE_H_
