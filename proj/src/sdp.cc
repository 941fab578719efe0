#include "cogbeam/sdp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cogbeam/error.h"

namespace cogbeam {

namespace {

// Internal view: linear rows become 1x1 blocks b - a.x >= 0.
struct WorkBlock {
  Index size = 0;
  RealMatrix F0;
  std::vector<int> vars;
  std::vector<RealMatrix> F;
};

std::vector<WorkBlock> Flatten(const SdpProblem& p) {
  std::vector<WorkBlock> out;
  out.reserve(p.blocks.size() + p.linear.size());
  for (const auto& b : p.blocks) {
    WorkBlock w;
    w.size = b.size;
    w.F0 = b.F0;
    for (const auto& [var, mat] : b.terms) {
      w.vars.push_back(var);
      w.F.push_back(mat);
    }
    out.push_back(std::move(w));
  }
  for (const auto& row : p.linear) {
    WorkBlock w;
    w.size = 1;
    w.F0 = RealMatrix::Constant(1, 1, row.b);
    for (int i = 0; i < p.n; ++i) {
      if (row.a(i) != 0.0) {
        w.vars.push_back(i);
        w.F.push_back(RealMatrix::Constant(1, 1, -row.a(i)));
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

double Inner(const RealMatrix& a, const RealMatrix& b) { return a.cwiseProduct(b).sum(); }

RealMatrix Sym(const RealMatrix& a) { return 0.5 * (a + a.transpose()); }

RealMatrix Affine(const WorkBlock& w, const RealVector& x) {
  RealMatrix s = w.F0;
  for (std::size_t t = 0; t < w.vars.size(); ++t) s += x(w.vars[t]) * w.F[t];
  return s;
}

RealMatrix AffineNoConst(const WorkBlock& w, const RealVector& dx) {
  RealMatrix s = RealMatrix::Zero(w.size, w.size);
  for (std::size_t t = 0; t < w.vars.size(); ++t) s += dx(w.vars[t]) * w.F[t];
  return s;
}

RealVector Adjoint(const std::vector<WorkBlock>& wb, const std::vector<RealMatrix>& Z, int n) {
  RealVector out = RealVector::Zero(n);
  for (std::size_t b = 0; b < wb.size(); ++b) {
    for (std::size_t t = 0; t < wb[b].vars.size(); ++t) out(wb[b].vars[t]) += Inner(wb[b].F[t], Z[b]);
  }
  return out;
}

// Largest alpha in (0, inf] with X + alpha dX >= 0, given X = L L^T.
double MaxStep(const Eigen::LLT<RealMatrix>& llt, const RealMatrix& dX) {
  const RealMatrix& L = llt.matrixL();
  RealMatrix t = L.triangularView<Eigen::Lower>().solve(dX);
  t = L.triangularView<Eigen::Lower>().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(Sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double FrobSum(const std::vector<RealMatrix>& m) {
  double s = 0.0;
  for (const auto& a : m) s += a.squaredNorm();
  return std::sqrt(s);
}

}  // namespace

std::string_view SdpStatusName(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "Optimal";
    case SdpStatus::kInfeasible: return "Infeasible";
    case SdpStatus::kUnbounded: return "Unbounded";
    case SdpStatus::kMaxIter: return "MaxIter";
    case SdpStatus::kNumericalBreakdown: return "NumericalBreakdown";
  }
  return "?";
}

void SdpProblem::Validate() const {
  if (n < 0) throw Error(ErrorCode::kInconsistentSpec, "negative variable count");
  if (c.size() != n) throw Error(ErrorCode::kShapeMismatch, "objective length != n");
  for (const auto& b : blocks) {
    if (b.size < 1 || b.F0.rows() != b.size || b.F0.cols() != b.size) {
      throw Error(ErrorCode::kShapeMismatch, "block F0 shape");
    }
    if ((b.F0 - b.F0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + b.F0.cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::kInconsistentSpec, "block F0 not symmetric");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& [var, mat] : b.terms) {
      if (var < 0 || var >= n) throw Error(ErrorCode::kShapeMismatch, "block variable index out of range");
      if (seen[static_cast<std::size_t>(var)]) throw Error(ErrorCode::kInconsistentSpec, "duplicate block term");
      seen[static_cast<std::size_t>(var)] = true;
      if (mat.rows() != b.size || mat.cols() != b.size) throw Error(ErrorCode::kShapeMismatch, "block F_i shape");
      if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + mat.cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::kInconsistentSpec, "block F_i not symmetric");
      }
    }
  }
  for (const auto& row : linear) {
    if (row.a.size() != n) throw Error(ErrorCode::kShapeMismatch, "linear row length != n");
  }
}

SdpSolution Solve(const SdpProblem& p, const SdpOptions& opts) {
  p.Validate();
  const int n = p.n;
  const std::vector<WorkBlock> wb = Flatten(p);
  const std::size_t nb = wb.size();

  double total_dim = 0.0;
  double f0_norm = 0.0;
  for (const auto& w : wb) {
    total_dim += static_cast<double>(w.size);
    f0_norm += w.F0.squaredNorm();
  }
  f0_norm = std::sqrt(f0_norm);
  const double c_norm = p.c.norm();

  RealVector x = RealVector::Zero(n);
  std::vector<RealMatrix> S(nb), Z(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& w = wb[b];
    const double s = static_cast<double>(w.size);
    double fmax = w.F0.norm();
    double zfac = 0.0;
    for (std::size_t t = 0; t < w.vars.size(); ++t) {
      const double fn = w.F[t].norm();
      fmax = std::max(fmax, fn);
      zfac = std::max(zfac, (1.0 + std::abs(p.c(w.vars[t]))) / (1.0 + fn));
    }
    const double rs = std::max({10.0, std::sqrt(s), fmax});
    const double rz = std::max({10.0, std::sqrt(s), s * zfac});
    S[b] = rs * RealMatrix::Identity(w.size, w.size);
    Z[b] = rz * RealMatrix::Identity(w.size, w.size);
  }

  SdpSolution sol;
  sol.status = SdpStatus::kMaxIter;
  auto finish = [&](SdpStatus status, int iters) {
    sol.status = status;
    sol.x = x;
    sol.iterations = iters;
    sol.primal_obj = p.c.dot(x);
    double d = 0.0;
    for (std::size_t b = 0; b < nb; ++b) d -= Inner(wb[b].F0, Z[b]);
    sol.dual_obj = d;
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj) / (1.0 + std::abs(sol.primal_obj) + std::abs(d));
    sol.block_duals.assign(Z.begin(), Z.begin() + static_cast<long>(p.blocks.size()));
    sol.linear_duals = RealVector::Zero(static_cast<Index>(p.linear.size()));
    for (std::size_t j = 0; j < p.linear.size(); ++j) sol.linear_duals(static_cast<Index>(j)) = Z[p.blocks.size() + j](0, 0);
    return sol;
  };

  std::vector<RealMatrix> Rp(nb), Sinv(nb), dSa(nb), dZa(nb), dS(nb), dZ(nb);
  std::vector<Eigen::LLT<RealMatrix>> Sllt(nb), Zllt(nb);
  for (int it = 0; it < opts.max_iter; ++it) {
    for (std::size_t b = 0; b < nb; ++b) Rp[b] = Affine(wb[b], x) - S[b];
    const RealVector rd = p.c - Adjoint(wb, Z, n);
    const double pobj = p.c.dot(x);
    double dobj = 0.0;
    double sz = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      dobj -= Inner(wb[b].F0, Z[b]);
      sz += Inner(S[b], Z[b]);
    }
    const double mu = sz / total_dim;
    const double pinf = FrobSum(Rp) / (1.0 + f0_norm);
    const double dinf = rd.norm() / (1.0 + c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double relgap = std::abs(pobj - dobj) / denom;
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      return finish(SdpStatus::kNumericalBreakdown, it);
    }
    if (pinf <= opts.tol_feas && dinf <= opts.tol_feas && relgap <= opts.tol_gap &&
        sz / denom <= opts.tol_gap) {
      return finish(SdpStatus::kOptimal, it);
    }
    // Infeasibility: Z approaches a ray with A(Z) ~ 0 and -<F0, Z> > 0.
    if (dobj > 0.0) {
      const RealVector az = Adjoint(wb, Z, n);
      if (az.norm() <= 1e-8 * dobj && dobj > 1e6) return finish(SdpStatus::kInfeasible, it);
    }
    if (pobj < 0.0 && x.norm() > 1e10 && pinf <= 1e-6) return finish(SdpStatus::kUnbounded, it);

    // Schur complement M_ij = <F_i, Z F_j S^-1>.
    RealMatrix M = RealMatrix::Zero(n, n);
    for (std::size_t b = 0; b < nb; ++b) {
      Sllt[b].compute(S[b]);
      Zllt[b].compute(Z[b]);
      if (Sllt[b].info() != Eigen::Success || Zllt[b].info() != Eigen::Success) {
        return finish(SdpStatus::kNumericalBreakdown, it);
      }
      Sinv[b] = Sym(Sllt[b].solve(RealMatrix::Identity(wb[b].size, wb[b].size)));
      const auto& w = wb[b];
      for (std::size_t tj = 0; tj < w.vars.size(); ++tj) {
        const RealMatrix g = Z[b] * w.F[tj] * Sinv[b];
        for (std::size_t ti = 0; ti < w.vars.size(); ++ti) {
          M(w.vars[ti], w.vars[tj]) += Inner(w.F[ti], g);
        }
      }
    }
    M = Sym(M);
    Eigen::LDLT<RealMatrix> ldlt(M);
    if (ldlt.info() != Eigen::Success) return finish(SdpStatus::kNumericalBreakdown, it);

    // rhs_i = <F_i, W> - rd_i with W = K S^-1 - Z - Z Rp S^-1.
    auto direction = [&](const std::vector<RealMatrix>& K, std::vector<RealMatrix>& dSo,
                         std::vector<RealMatrix>& dZo) {
      RealVector rhs = -rd;
      for (std::size_t b = 0; b < nb; ++b) {
        const RealMatrix W = K[b] * Sinv[b] - Z[b] - Z[b] * Rp[b] * Sinv[b];
        const auto& w = wb[b];
        for (std::size_t t = 0; t < w.vars.size(); ++t) rhs(w.vars[t]) += Inner(w.F[t], W);
      }
      const RealVector dx = ldlt.solve(rhs);
      for (std::size_t b = 0; b < nb; ++b) {
        dSo[b] = Sym(Rp[b] + AffineNoConst(wb[b], dx));
        dZo[b] = Sym(K[b] * Sinv[b] - Z[b] - Z[b] * dSo[b] * Sinv[b]);
      }
      return dx;
    };
    auto steps = [&](const std::vector<RealMatrix>& dSo, const std::vector<RealMatrix>& dZo) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, MaxStep(Sllt[b], dSo[b]));
        ad = std::min(ad, MaxStep(Zllt[b], dZo[b]));
      }
      return std::pair<double, double>(ap, ad);
    };

    std::vector<RealMatrix> K(nb);
    for (std::size_t b = 0; b < nb; ++b) K[b] = RealMatrix::Zero(wb[b].size, wb[b].size);
    direction(K, dSa, dZa);
    auto [apa, ada] = steps(dSa, dZa);
    apa = std::min(1.0, apa);
    ada = std::min(1.0, ada);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mu_aff += Inner(S[b] + apa * dSa[b], Z[b] + ada * dZa[b]);
    mu_aff /= total_dim;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    for (std::size_t b = 0; b < nb; ++b) {
      K[b] = sigma * mu * RealMatrix::Identity(wb[b].size, wb[b].size) - dZa[b] * dSa[b];
    }
    const RealVector dx = direction(K, dS, dZ);
    auto [ap, ad] = steps(dS, dZ);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);
    if (!dx.allFinite()) return finish(SdpStatus::kNumericalBreakdown, it);
    x += ap * dx;
    for (std::size_t b = 0; b < nb; ++b) {
      S[b] += ap * dS[b];
      Z[b] += ad * dZ[b];
    }
  }
  return finish(SdpStatus::kMaxIter, opts.max_iter);
}

CertificateReport CheckCertificate(const SdpProblem& p, const SdpSolution& sol, double tol) {
  const std::vector<WorkBlock> wb = Flatten(p);
  if (sol.x.size() != p.n || sol.block_duals.size() != p.blocks.size() ||
      sol.linear_duals.size() != static_cast<Index>(p.linear.size())) {
    throw Error(ErrorCode::kCertificateFailure, "solution shape does not match problem");
  }
  std::vector<RealMatrix> Z(sol.block_duals);
  for (Index j = 0; j < sol.linear_duals.size(); ++j) Z.push_back(RealMatrix::Constant(1, 1, sol.linear_duals(j)));

  CertificateReport rep;
  double f0_norm = 0.0;
  double sz = 0.0;
  double dobj = 0.0;
  for (std::size_t b = 0; b < wb.size(); ++b) {
    const RealMatrix s = Sym(Affine(wb[b], sol.x));
    f0_norm += wb[b].F0.squaredNorm();
    const double smin = SymmetricEigenvalues(s).minCoeff();
    const double zmin = SymmetricEigenvalues(Sym(Z[b])).minCoeff();
    rep.primal_infeas = std::max(rep.primal_infeas, -smin);
    rep.dual_infeas = std::max(rep.dual_infeas, -zmin);
    sz += Inner(s, Z[b]);
    dobj -= Inner(wb[b].F0, Z[b]);
  }
  f0_norm = std::sqrt(f0_norm);
  rep.primal_infeas = std::max(0.0, rep.primal_infeas) / (1.0 + f0_norm);
  const RealVector rd = p.c - Adjoint(wb, Z, p.n);
  rep.dual_infeas = std::max(std::max(0.0, rep.dual_infeas), rd.norm() / (1.0 + p.c.norm()));
  const double pobj = p.c.dot(sol.x);
  const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
  rep.complementarity = std::abs(sz) / denom;
  rep.gap = std::abs(pobj - dobj) / denom;

  const double lim = 10.0 * tol;
  auto fail = [](const char* what, double v) {
    std::ostringstream msg;
    msg << what << " residual " << v << " exceeds limit";
    throw Error(ErrorCode::kCertificateFailure, msg.str());
  };
  if (rep.primal_infeas > lim) fail("primal feasibility", rep.primal_infeas);
  if (rep.dual_infeas > lim) fail("dual feasibility", rep.dual_infeas);
  if (rep.complementarity > lim) fail("complementarity", rep.complementarity);
  if (rep.gap > lim) fail("duality gap", rep.gap);
  return rep;
}

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void ParseFail(int line, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ": " << what;
  throw Error(ErrorCode::kParseError, msg.str());
}

}  // namespace

std::string DumpSdp(const SdpProblem& p) {
  std::ostringstream out;
  out << "cogbeam-sdp 1\n";
  out << "n " << p.n << "\n";
  out << "c";
  for (int i = 0; i < p.n; ++i) out << ' ' << Num(p.c(i));
  out << "\n";
  for (const auto& b : p.blocks) {
    std::vector<std::string> lines;
    auto emit = [&](int var, const RealMatrix& m) {
      for (Index c = 0; c < b.size; ++c) {
        for (Index r = 0; r <= c; ++r) {
          if (m(r, c) != 0.0) {
            lines.push_back(std::to_string(var) + " " + std::to_string(r) + " " + std::to_string(c) +
                            " " + Num(m(r, c)));
          }
        }
      }
    };
    emit(0, b.F0);
    for (const auto& [var, mat] : b.terms) emit(var + 1, mat);
    out << "block " << b.size << ' ' << lines.size() << "\n";
    for (const auto& l : lines) out << l << "\n";
  }
  for (const auto& row : p.linear) {
    int nnz = 0;
    for (int i = 0; i < p.n; ++i) nnz += row.a(i) != 0.0;
    out << "linear " << Num(row.b) << ' ' << (row.want_dual ? 1 : 0) << ' ' << nnz << "\n";
    for (int i = 0; i < p.n; ++i) {
      if (row.a(i) != 0.0) out << i << ' ' << Num(row.a(i)) << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

SdpProblem ParseSdp(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty()) return std::istringstream(line);
    }
    ParseFail(lineno, "unexpected end of input");
  };
  SdpProblem p;
  {
    auto ls = next();
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != "cogbeam-sdp" || version != 1) ParseFail(lineno, "bad header");
  }
  {
    auto ls = next();
    std::string tag;
    if (!(ls >> tag >> p.n) || tag != "n" || p.n < 0) ParseFail(lineno, "expected 'n <count>'");
  }
  {
    auto ls = next();
    std::string tag;
    if (!(ls >> tag) || tag != "c") ParseFail(lineno, "expected objective line");
    p.c = RealVector::Zero(p.n);
    for (int i = 0; i < p.n; ++i) {
      if (!(ls >> p.c(i))) ParseFail(lineno, "short objective line");
    }
  }
  while (true) {
    auto ls = next();
    std::string tag;
    ls >> tag;
    if (tag == "end") break;
    if (tag == "block") {
      SdpBlock b;
      long nnz = 0;
      if (!(ls >> b.size >> nnz) || b.size < 1 || nnz < 0) ParseFail(lineno, "bad block header");
      b.F0 = RealMatrix::Zero(b.size, b.size);
      std::vector<int> order;
      std::vector<RealMatrix> mats(static_cast<std::size_t>(p.n));
      std::vector<bool> used(static_cast<std::size_t>(p.n), false);
      for (long e = 0; e < nnz; ++e) {
        auto es = next();
        int var = 0;
        Index r = 0, c = 0;
        double v = 0.0;
        if (!(es >> var >> r >> c >> v) || var < 0 || var > p.n || r < 0 || c < 0 || r >= b.size ||
            c >= b.size) {
          ParseFail(lineno, "bad block entry");
        }
        RealMatrix* m = &b.F0;
        if (var > 0) {
          const auto idx = static_cast<std::size_t>(var - 1);
          if (!used[idx]) {
            used[idx] = true;
            mats[idx] = RealMatrix::Zero(b.size, b.size);
            order.push_back(var - 1);
          }
          m = &mats[idx];
        }
        (*m)(r, c) = v;
        (*m)(c, r) = v;
      }
      for (int var : order) b.terms.emplace_back(var, mats[static_cast<std::size_t>(var)]);
      p.blocks.push_back(std::move(b));
    } else if (tag == "linear") {
      LinearConstraint row;
      int want = 0;
      long nnz = 0;
      if (!(ls >> row.b >> want >> nnz) || nnz < 0) ParseFail(lineno, "bad linear header");
      row.want_dual = want != 0;
      row.a = RealVector::Zero(p.n);
      for (long e = 0; e < nnz; ++e) {
        auto es = next();
        int var = 0;
        double v = 0.0;
        if (!(es >> var >> v) || var < 0 || var >= p.n) ParseFail(lineno, "bad linear entry");
        row.a(var) = v;
      }
      p.linear.push_back(std::move(row));
    } else {
      ParseFail(lineno, "unknown record '" + tag + "'");
    }
  }
  p.Validate();
  return p;
}

}  // namespace cogbeam
