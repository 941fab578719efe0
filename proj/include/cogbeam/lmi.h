#ifndef COGBEAM_LMI_H_
#define COGBEAM_LMI_H_

#include <map>
#include <optional>
#include <vector>

#include "cogbeam/matrix_core.h"
#include "cogbeam/sdp.h"

namespace cogbeam {

// Complex matrix affine in real scalar variables: constant + sum_v x_v C_v.
struct AffineMatrix {
  ComplexMatrix constant;
  std::map<int, ComplexMatrix> terms;

  AffineMatrix() = default;
  AffineMatrix(Index rows, Index cols) : constant(ComplexMatrix::Zero(rows, cols)) {}
  static AffineMatrix Constant(const ComplexMatrix& m);

  Index rows() const { return constant.rows(); }
  Index cols() const { return constant.cols(); }
  ComplexMatrix Evaluate(const RealVector& x) const;
};

AffineMatrix operator+(const AffineMatrix& a, const AffineMatrix& b);
AffineMatrix operator-(const AffineMatrix& a, const AffineMatrix& b);
AffineMatrix operator-(const AffineMatrix& a);
AffineMatrix operator*(double s, const AffineMatrix& a);
// L * X * R for constant L, R.
AffineMatrix Sandwich(const ComplexMatrix& L, const AffineMatrix& X, const ComplexMatrix& R);
AffineMatrix AdjointOf(const AffineMatrix& a);
AffineMatrix KronIdentity(Index n, const AffineMatrix& a);  // I_n (x) a
AffineMatrix VecOf(const AffineMatrix& a);
AffineMatrix TraceOf(const AffineMatrix& a);                // 1x1
AffineMatrix Block2x2(const AffineMatrix& a, const AffineMatrix& b, const AffineMatrix& c,
                      const AffineMatrix& d);

// Allocates real scalar variables. A Hermitian m x m variable takes m^2
// scalars: the m real diagonal entries first, then (re, im) per strictly
// upper entry in column order.
class VariableSpace {
 public:
  int size() const { return n_; }
  AffineMatrix AddScalar();
  AffineMatrix AddHermitian(Index dim, int* offset = nullptr);

 private:
  int n_ = 0;
};

HermitianMatrix HermitianFromParams(const RealVector& x, int offset, Index dim);

// Hermitian expression >= 0 as a real SDP block. Expressions with no
// imaginary part anywhere are passed through unchanged; others go through
// RealEmbedding, which doubles every eigenvalue's multiplicity.
SdpBlock ToSdpBlock(const AffineMatrix& hermitian);

// Dual of a block produced by ToSdpBlock, mapped back to the complex
// domain. For an embedded block [[Z11, Z12], [Z21, Z22]] this is
// Zc = (Z11 + Z22) + i (Z21 - Z12), so Re Tr{A Zc} = <embed(A), Z> for every
// Hermitian A and Zc >= 0 whenever Z >= 0.
HermitianMatrix HermitianDual(const RealMatrix& Z, Index dim, bool embedded);

struct RobustConstraintSpec {
  ComplexMatrix G_hat;  // L x M_k
  double eps = 0.0;
  double iota = 0.0;    // watts
};

// [[theta I - I_L (x) Q, -vec(Q G^H)], [-vec(Q G^H)^H, limit - eps^2 theta - Tr{G Q G^H}]]
AffineMatrix SProcedureLmi(const ComplexMatrix& G_hat, double eps, const AffineMatrix& Q,
                           const AffineMatrix& theta, const AffineMatrix& limit);
// [[H Q H^H + R, R^{1/2}], [R^{1/2}, T]]
AffineMatrix MseEpigraphLmi(const ComplexMatrix& H, const HermitianMatrix& R_half,
                            const AffineMatrix& Q, const AffineMatrix& T);
// [[I, Q - Q_prev], [Q - Q_prev, Y]]
AffineMatrix ProximalLmi(const AffineMatrix& Q, const HermitianMatrix& prev_Q, const AffineMatrix& Y);

enum class SubproblemMode {
  kPlain,      // min Tr T - Re Tr{D Q}
  kProximal,   // ... + (1/(2 tau)) ||Q - Q_prev||_F^2
  kBudgeted,   // plain objective, worst-case interference <= t_p <= iota_p
  kLinear,     // max Re Tr{D Q} over the feasible set (no MSE block)
};

struct SubproblemSpec {
  int link = 0;
  SubproblemMode mode = SubproblemMode::kPlain;
  HermitianMatrix D{0};
  std::optional<ComplexMatrix> H_kk;
  std::optional<HermitianMatrix> R_half;
  double p_max = 0.0;
  std::vector<RobustConstraintSpec> robust;
  std::optional<HermitianMatrix> prev_Q;
  std::optional<double> tau;
  // Normalization of interference rows; 0 picks iota (or a channel-based
  // fallback when iota == 0).
  double interference_scale = 0.0;
};

struct AssembledSubproblem {
  SdpProblem problem;
  SubproblemMode mode = SubproblemMode::kPlain;
  Index M = 0;
  Index N = 0;
  double p_max = 0.0;
  int q_offset = 0;
  int t_offset = -1;                  // MSE epigraph variable
  int y_offset = -1;                  // proximal variable
  std::vector<int> theta_var;         // per PU, -1 when eps == 0
  std::vector<int> budget_var;        // per PU (budgeted mode)
  std::vector<int> budget_row;        // linear row index of t_p <= iota_p
  std::vector<double> interference_scale;
};

// Throws kInconsistentSpec naming the missing field.
AssembledSubproblem Assemble(const SubproblemSpec& spec);

struct SubproblemResult {
  HermitianMatrix Q{0};               // watts
  double objective = 0.0;             // in original units
  std::vector<double> theta;         // S-procedure multipliers, normalized units
  std::vector<double> t;              // watts
  std::vector<double> lambda;         // 1/W, dual of t_p <= iota_p
};

SubproblemResult Extract(const AssembledSubproblem& a, const SdpSolution& sol);

struct SProcedureCheck {
  double margin = 0.0;  // max over theta of lambda_min of the normalized LMI
  double theta = 0.0;
  bool feasible = false;
};

// Feasibility of the S-procedure LMI for fixed Q, searched over theta.
SProcedureCheck SProcedureMargin(const ComplexMatrix& G_hat, double eps, const HermitianMatrix& Q,
                                 double iota);

}  // namespace cogbeam

#endif  // COGBEAM_LMI_H_
