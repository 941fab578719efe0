#ifndef COGBEAM_SDP_H_
#define COGBEAM_SDP_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogbeam/matrix_core.h"

namespace cogbeam {

// One LMI block: F0 + sum_i x_i F_i >= 0 (real symmetric, size x size).
// Only variables with a nonzero coefficient appear in `terms`; indices are
// unique but need not be sorted.
struct SdpBlock {
  Index size = 0;
  RealMatrix F0;
  std::vector<std::pair<int, RealMatrix>> terms;
};

// a . x <= b
struct LinearConstraint {
  RealVector a;
  double b = 0.0;
  bool want_dual = false;
};

// minimize c . x  subject to all blocks PSD and all linear rows satisfied.
struct SdpProblem {
  int n = 0;
  RealVector c;
  std::vector<SdpBlock> blocks;
  std::vector<LinearConstraint> linear;

  // Throws kShapeMismatch / kInconsistentSpec on malformed data.
  void Validate() const;
};

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter, kNumericalBreakdown };

std::string_view SdpStatusName(SdpStatus status);

struct SdpOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iter = 200;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kMaxIter;
  RealVector x;
  std::vector<RealMatrix> block_duals;  // Z_b, one per block
  RealVector linear_duals;              // lambda_j >= 0, one per linear row
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;                     // relative duality gap
  int iterations = 0;
};

// Infeasible-start primal-dual path following (HKM direction, Mehrotra
// predictor-corrector). Never throws for solver outcomes; inspect status.
SdpSolution Solve(const SdpProblem& p, const SdpOptions& opts = {});

struct CertificateReport {
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  double complementarity = 0.0;
  double gap = 0.0;
};

// Recomputes all residuals from (x, duals) alone. Throws kCertificateFailure
// naming the first residual above 10*tol.
CertificateReport CheckCertificate(const SdpProblem& p, const SdpSolution& sol,
                                   double tol = 1e-8);

// Line-oriented text dump:
//   cogbeam-sdp 1
//   n <n>
//   c <c_1> ... <c_n>
//   block <size> <nnz>         followed by nnz lines "<var> <row> <col> <value>"
//                              (var 0 is F0, var i+1 is x_i; upper triangle only)
//   linear <b> <want_dual> <nnz> followed by nnz lines "<var> <value>"
//   end
std::string DumpSdp(const SdpProblem& p);
SdpProblem ParseSdp(std::string_view text);

}  // namespace cogbeam

#endif  // COGBEAM_SDP_H_
