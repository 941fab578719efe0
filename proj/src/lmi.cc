#include "cogbeam/lmi.h"

#include <algorithm>
#include <cmath>

#include "cogbeam/error.h"

namespace cogbeam {

namespace {

RealMatrix Embed(const ComplexMatrix& a) {
  const Index n = a.rows();
  RealMatrix r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = a.real();
  r.topRightCorner(n, n) = -a.imag();
  r.bottomLeftCorner(n, n) = a.imag();
  r.bottomRightCorner(n, n) = a.real();
  return 0.5 * (r + r.transpose());
}

RealMatrix SymReal(const ComplexMatrix& a) {
  const RealMatrix r = a.real();
  return 0.5 * (r + r.transpose());
}

template <typename F>
AffineMatrix MapTerms(const AffineMatrix& a, F f) {
  AffineMatrix out;
  out.constant = f(a.constant);
  for (const auto& [v, c] : a.terms) out.terms.emplace(v, f(c));
  return out;
}

void CheckShape(const AffineMatrix& a, const AffineMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "affine expression shapes differ");
  }
}

[[noreturn]] void Missing(const char* field) {
  throw Error(ErrorCode::kInconsistentSpec, std::string("subproblem spec is missing ") + field);
}

}  // namespace

AffineMatrix AffineMatrix::Constant(const ComplexMatrix& m) {
  AffineMatrix a;
  a.constant = m;
  return a;
}

ComplexMatrix AffineMatrix::Evaluate(const RealVector& x) const {
  ComplexMatrix m = constant;
  for (const auto& [v, c] : terms) m += x(v) * c;
  return m;
}

AffineMatrix operator+(const AffineMatrix& a, const AffineMatrix& b) {
  CheckShape(a, b);
  AffineMatrix out = a;
  out.constant += b.constant;
  for (const auto& [v, c] : b.terms) {
    auto it = out.terms.find(v);
    if (it == out.terms.end()) {
      out.terms.emplace(v, c);
    } else {
      it->second += c;
    }
  }
  return out;
}

AffineMatrix operator-(const AffineMatrix& a) {
  return MapTerms(a, [](const ComplexMatrix& m) -> ComplexMatrix { return -m; });
}

AffineMatrix operator-(const AffineMatrix& a, const AffineMatrix& b) { return a + (-b); }

AffineMatrix operator*(double s, const AffineMatrix& a) {
  return MapTerms(a, [s](const ComplexMatrix& m) -> ComplexMatrix { return s * m; });
}

AffineMatrix Sandwich(const ComplexMatrix& L, const AffineMatrix& X, const ComplexMatrix& R) {
  return MapTerms(X, [&](const ComplexMatrix& m) -> ComplexMatrix { return L * m * R; });
}

AffineMatrix AdjointOf(const AffineMatrix& a) {
  return MapTerms(a, [](const ComplexMatrix& m) -> ComplexMatrix { return m.adjoint(); });
}

AffineMatrix KronIdentity(Index n, const AffineMatrix& a) {
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  return MapTerms(a, [&](const ComplexMatrix& m) { return Kron(eye, m); });
}

AffineMatrix VecOf(const AffineMatrix& a) {
  return MapTerms(a, [](const ComplexMatrix& m) -> ComplexMatrix { return Vec(m); });
}

AffineMatrix TraceOf(const AffineMatrix& a) {
  return MapTerms(a, [](const ComplexMatrix& m) -> ComplexMatrix {
    return ComplexMatrix::Constant(1, 1, m.trace());
  });
}

AffineMatrix Block2x2(const AffineMatrix& a, const AffineMatrix& b, const AffineMatrix& c,
                      const AffineMatrix& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "block shapes do not tile");
  }
  const Index r0 = a.rows();
  const Index c0 = a.cols();
  const Index rows = r0 + c.rows();
  const Index cols = c0 + b.cols();
  AffineMatrix out(rows, cols);
  auto place = [&](const AffineMatrix& part, Index r, Index col) {
    out.constant.block(r, col, part.rows(), part.cols()) = part.constant;
    for (const auto& [v, m] : part.terms) {
      auto it = out.terms.find(v);
      if (it == out.terms.end()) it = out.terms.emplace(v, ComplexMatrix::Zero(rows, cols)).first;
      it->second.block(r, col, part.rows(), part.cols()) += m;
    }
  };
  place(a, 0, 0);
  place(b, 0, c0);
  place(c, r0, 0);
  place(d, r0, c0);
  return out;
}

AffineMatrix VariableSpace::AddScalar() {
  AffineMatrix a(1, 1);
  a.terms.emplace(n_++, ComplexMatrix::Ones(1, 1));
  return a;
}

AffineMatrix VariableSpace::AddHermitian(Index dim, int* offset) {
  if (offset) *offset = n_;
  AffineMatrix a(dim, dim);
  for (Index d = 0; d < dim; ++d) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    e(d, d) = 1.0;
    a.terms.emplace(n_++, e);
  }
  for (Index c = 0; c < dim; ++c) {
    for (Index r = 0; r < c; ++r) {
      ComplexMatrix re = ComplexMatrix::Zero(dim, dim);
      re(r, c) = 1.0;
      re(c, r) = 1.0;
      a.terms.emplace(n_++, re);
      ComplexMatrix im = ComplexMatrix::Zero(dim, dim);
      im(r, c) = Complex(0.0, 1.0);
      im(c, r) = Complex(0.0, -1.0);
      a.terms.emplace(n_++, im);
    }
  }
  return a;
}

HermitianMatrix HermitianFromParams(const RealVector& x, int offset, Index dim) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  int v = offset;
  for (Index d = 0; d < dim; ++d) m(d, d) = x(v++);
  for (Index c = 0; c < dim; ++c) {
    for (Index r = 0; r < c; ++r) {
      const Complex z(x(v), x(v + 1));
      v += 2;
      m(r, c) = z;
      m(c, r) = std::conj(z);
    }
  }
  return HermitianMatrix(m);
}

SdpBlock ToSdpBlock(const AffineMatrix& h) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::kShapeMismatch, "LMI expression must be square");
  bool real = h.constant.imag().cwiseAbs().maxCoeff() == 0.0;
  for (const auto& [v, m] : h.terms) real = real && m.imag().cwiseAbs().maxCoeff() == 0.0;
  SdpBlock b;
  b.size = real ? h.rows() : 2 * h.rows();
  b.F0 = real ? SymReal(h.constant) : Embed(h.constant);
  for (const auto& [v, m] : h.terms) {
    if (m.cwiseAbs().maxCoeff() == 0.0) continue;
    b.terms.emplace_back(v, real ? SymReal(m) : Embed(m));
  }
  return b;
}

HermitianMatrix HermitianDual(const RealMatrix& Z, Index dim, bool embedded) {
  if (!embedded) return HermitianMatrix(ComplexMatrix(Z.cast<Complex>()));
  ComplexMatrix zc(dim, dim);
  zc.real() = Z.topLeftCorner(dim, dim) + Z.bottomRightCorner(dim, dim);
  zc.imag() = Z.bottomLeftCorner(dim, dim) - Z.topRightCorner(dim, dim);
  return HermitianMatrix(zc);
}

AffineMatrix SProcedureLmi(const ComplexMatrix& G_hat, double eps, const AffineMatrix& Q,
                           const AffineMatrix& theta, const AffineMatrix& limit) {
  const Index L = G_hat.rows();
  const Index M = G_hat.cols();
  const Index LM = L * M;
  const ComplexMatrix eye = ComplexMatrix::Identity(LM, LM);
  // theta * I_{LM}: theta is 1x1, so map its coefficients onto the identity.
  AffineMatrix theta_eye = MapTerms(theta, [&](const ComplexMatrix& m) -> ComplexMatrix {
    return m(0, 0) * eye;
  });
  const AffineMatrix tl = theta_eye - KronIdentity(L, Q);
  const AffineMatrix off = -VecOf(Sandwich(ComplexMatrix::Identity(M, M), Q, G_hat.adjoint()));
  const AffineMatrix corner =
      limit - (eps * eps) * theta - TraceOf(Sandwich(G_hat, Q, G_hat.adjoint()));
  return Block2x2(tl, off, AdjointOf(off), corner);
}

AffineMatrix MseEpigraphLmi(const ComplexMatrix& H, const HermitianMatrix& R_half,
                            const AffineMatrix& Q, const AffineMatrix& T) {
  const ComplexMatrix r = R_half.matrix() * R_half.matrix();
  const AffineMatrix tl = Sandwich(H, Q, H.adjoint()) + AffineMatrix::Constant(r);
  const AffineMatrix off = AffineMatrix::Constant(R_half.matrix());
  return Block2x2(tl, off, off, T);
}

AffineMatrix ProximalLmi(const AffineMatrix& Q, const HermitianMatrix& prev_Q, const AffineMatrix& Y) {
  const Index m = prev_Q.dim();
  const AffineMatrix delta = Q - AffineMatrix::Constant(prev_Q.matrix());
  return Block2x2(AffineMatrix::Constant(ComplexMatrix::Identity(m, m)), delta, delta, Y);
}

AssembledSubproblem Assemble(const SubproblemSpec& spec) {
  const bool uses_mse = spec.mode != SubproblemMode::kLinear;
  if (!(spec.p_max > 0.0)) Missing("p_max > 0");
  const Index M = spec.D.dim();
  if (M < 1) Missing("D_k");
  if (uses_mse && !spec.H_kk) Missing("H_kk");
  if (uses_mse && !spec.R_half) Missing("R_half");
  if (spec.mode == SubproblemMode::kProximal) {
    if (!spec.prev_Q) Missing("prev_Q");
    if (!spec.tau || !(*spec.tau > 0.0)) Missing("tau > 0");
  }
  if (uses_mse && (spec.H_kk->cols() != M || spec.R_half->dim() != spec.H_kk->rows())) {
    throw Error(ErrorCode::kShapeMismatch, "H_kk / R_half / D_k dimensions disagree");
  }
  for (const auto& rc : spec.robust) {
    if (rc.G_hat.cols() != M) throw Error(ErrorCode::kShapeMismatch, "G_hat columns != M_k");
    if (rc.eps < 0.0 || rc.iota < 0.0) Missing("eps >= 0 and iota >= 0");
  }

  const double p = spec.p_max;
  AssembledSubproblem a;
  a.mode = spec.mode;
  a.M = M;
  a.p_max = p;
  VariableSpace vars;
  const AffineMatrix Q = vars.AddHermitian(M, &a.q_offset);
  AffineMatrix T;
  AffineMatrix Y;
  ComplexMatrix Hs;
  HermitianMatrix Rs_half(0);
  if (uses_mse) {
    a.N = spec.H_kk->rows();
    T = vars.AddHermitian(a.N, &a.t_offset);
    // Receiver-side normalization by the largest eigenvalue of R.
    const double s_r = std::max(MaxEigenvalue(*spec.R_half), 1e-300);
    const double s_r2 = s_r * s_r;
    Hs = *spec.H_kk * std::sqrt(p / s_r2);
    Rs_half = *spec.R_half * (1.0 / s_r);
  }
  if (spec.mode == SubproblemMode::kProximal) Y = vars.AddHermitian(M, &a.y_offset);

  std::vector<AffineMatrix> budget_t;
  for (std::size_t pu = 0; pu < spec.robust.size(); ++pu) {
    const auto& rc = spec.robust[pu];
    double s = spec.interference_scale;
    if (!(s > 0.0)) s = rc.iota;
    if (!(s > 0.0)) s = std::max(p * rc.G_hat.squaredNorm() * (1.0 + rc.eps), 1e-300);
    a.interference_scale.push_back(s);
    a.theta_var.push_back(rc.eps > 0.0 ? vars.size() : -1);
    if (rc.eps > 0.0) vars.AddScalar();
    if (spec.mode == SubproblemMode::kBudgeted) {
      a.budget_var.push_back(vars.size());
      budget_t.push_back(vars.AddScalar());
    }
  }

  SdpProblem& prob = a.problem;
  prob.n = vars.size();
  prob.c = RealVector::Zero(prob.n);

  // Objective: Tr T - Re Tr{D Q} (+ (1/(2 tau)) Tr Y), Q = p Q'.
  for (const auto& [v, m] : Q.terms) {
    const double d = (spec.D.matrix() * m).trace().real();
    prob.c(v) = -p * d;
  }
  if (uses_mse) {
    for (Index d = 0; d < a.N; ++d) prob.c(a.t_offset + static_cast<int>(d)) = 1.0;
  }
  if (spec.mode == SubproblemMode::kProximal) {
    for (Index d = 0; d < M; ++d) prob.c(a.y_offset + static_cast<int>(d)) = p * p / (2.0 * *spec.tau);
  }

  prob.blocks.push_back(ToSdpBlock(Q));
  if (uses_mse) prob.blocks.push_back(ToSdpBlock(MseEpigraphLmi(Hs, Rs_half, Q, T)));
  if (spec.mode == SubproblemMode::kProximal) {
    prob.blocks.push_back(ToSdpBlock(ProximalLmi(Q, *spec.prev_Q * (1.0 / p), Y)));
  }

  auto linear_row = [&](const AffineMatrix& expr, double rhs, bool want_dual) {
    // Re(expr) <= rhs for a 1x1 expression.
    LinearConstraint row;
    row.a = RealVector::Zero(prob.n);
    for (const auto& [v, m] : expr.terms) row.a(v) = m(0, 0).real();
    row.b = rhs - expr.constant(0, 0).real();
    row.want_dual = want_dual;
    prob.linear.push_back(std::move(row));
    return static_cast<int>(prob.linear.size()) - 1;
  };

  linear_row(TraceOf(Q), 1.0, false);

  for (std::size_t pu = 0; pu < spec.robust.size(); ++pu) {
    const auto& rc = spec.robust[pu];
    const double s = a.interference_scale[pu];
    const double g = std::sqrt(p / s);
    const ComplexMatrix Gs = rc.G_hat * g;
    const double eps_s = rc.eps * g;
    const double iota_s = rc.iota / s;
    AffineMatrix limit = AffineMatrix::Constant(ComplexMatrix::Constant(1, 1, iota_s));
    if (spec.mode == SubproblemMode::kBudgeted) limit = budget_t[pu];
    if (rc.eps > 0.0) {
      AffineMatrix theta(1, 1);
      theta.terms.emplace(a.theta_var[pu], ComplexMatrix::Ones(1, 1));
      prob.blocks.push_back(ToSdpBlock(SProcedureLmi(Gs, eps_s, Q, theta, limit)));
    } else {
      linear_row(TraceOf(Sandwich(Gs, Q, Gs.adjoint())) - limit, 0.0, false);
    }
    if (spec.mode == SubproblemMode::kBudgeted) {
      a.budget_row.push_back(linear_row(budget_t[pu], iota_s, true));
    }
  }
  return a;
}

SubproblemResult Extract(const AssembledSubproblem& a, const SdpSolution& sol) {
  SubproblemResult r;
  r.Q = HermitianFromParams(sol.x, a.q_offset, a.M) * a.p_max;
  r.objective = sol.primal_obj;
  for (std::size_t pu = 0; pu < a.theta_var.size(); ++pu) {
    r.theta.push_back(a.theta_var[pu] >= 0 ? sol.x(a.theta_var[pu]) : 0.0);
  }
  for (std::size_t pu = 0; pu < a.budget_var.size(); ++pu) {
    const double s = a.interference_scale[pu];
    r.t.push_back(sol.x(a.budget_var[pu]) * s);
    r.lambda.push_back(sol.linear_duals(a.budget_row[pu]) / s);
  }
  return r;
}

SProcedureCheck SProcedureMargin(const ComplexMatrix& G_hat, double eps, const HermitianMatrix& Q,
                                 double iota) {
  const Index L = G_hat.rows();
  const Index M = G_hat.cols();
  const Index LM = L * M;
  const double q_s = std::max(MaxEigenvalue(Q), 1e-300);
  double s_i = iota;
  if (!(s_i > 0.0)) s_i = std::max(q_s * G_hat.squaredNorm() * (1.0 + eps), 1e-300);
  const double g = std::sqrt(q_s / s_i);
  const ComplexMatrix Gs = G_hat * g;
  const double es = eps * g;
  const double is = iota / s_i;
  const ComplexMatrix Qs = Q.matrix() / q_s;

  const ComplexMatrix kq = Kron(ComplexMatrix::Identity(L, L), Qs);
  const ComplexVector b = Vec(Qs * Gs.adjoint());
  const double c = (Gs * Qs * Gs.adjoint()).trace().real();
  auto lmin = [&](double theta) {
    ComplexMatrix m(LM + 1, LM + 1);
    m.topLeftCorner(LM, LM) = theta * ComplexMatrix::Identity(LM, LM) - kq;
    m.topRightCorner(LM, 1) = -b;
    m.bottomLeftCorner(1, LM) = -b.adjoint();
    m(LM, LM) = is - es * es * theta - c;
    return MinEigenvalue(HermitianMatrix(m));
  };

  const double lo0 = MaxEigenvalue(HermitianMatrix(Qs));
  double hi0 = lo0;
  if (es > 0.0) hi0 = std::max(lo0, (is - c) / (es * es));
  SProcedureCheck out;
  if (es == 0.0) {
    // Nominal check; the LMI reduces to a trace inequality for large theta.
    out.theta = lo0;
    out.margin = is - c;
    out.feasible = out.margin >= 0.0;
    return out;
  }
  // lambda_min is concave in theta: golden-section search.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = lo0;
  double hi = hi0;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = lmin(x1);
  double f2 = lmin(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = lmin(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = lmin(x1);
    }
  }
  out.theta = 0.5 * (lo + hi);
  out.margin = lmin(out.theta);
  for (double t : {lo0, hi0}) {
    const double v = lmin(t);
    if (v > out.margin) {
      out.margin = v;
      out.theta = t;
    }
  }
  out.theta *= q_s;
  out.feasible = out.margin >= -1e-12;
  return out;
}

}  // namespace cogbeam
