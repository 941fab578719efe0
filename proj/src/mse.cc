#include "cogbeam/mse.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogbeam/error.h"

namespace cogbeam {

namespace {

HermitianMatrix Congruence(const ComplexMatrix& h, const HermitianMatrix& q) {
  return HermitianMatrix(ComplexMatrix(h * q.matrix() * h.adjoint()));
}

Eigen::LLT<ComplexMatrix> Factor(const HermitianMatrix& a, int k) {
  Eigen::LLT<ComplexMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "received covariance of link " << k << " is not positive definite";
    throw Error(ErrorCode::kSingularSystem, msg.str());
  }
  return llt;
}

}  // namespace

CovarianceProfile CovarianceProfile::Zero(const ChannelSet& ch) {
  CovarianceProfile prof;
  for (int k = 0; k < ch.num_links; ++k) prof.Q.emplace_back(ch.M(k));
  return prof;
}

HermitianMatrix InterferenceCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                       int k) {
  const int n = ch.N(k);
  ComplexMatrix r = ch.sigma2[k] * ComplexMatrix::Identity(n, n);
  for (int i = 0; i < ch.num_links; ++i) {
    if (i == k) continue;
    r += ch.H[k][i] * Q[i].matrix() * ch.H[k][i].adjoint();
  }
  return HermitianMatrix(r);
}

HermitianMatrix ReceivedCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                   int k) {
  const int n = ch.N(k);
  ComplexMatrix b = ch.sigma2[k] * ComplexMatrix::Identity(n, n);
  for (int i = 0; i < ch.num_links; ++i) {
    b += ch.H[k][i] * Q[i].matrix() * ch.H[k][i].adjoint();
  }
  return HermitianMatrix(b);
}

HermitianMatrix SignalCovariance(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                 int k) {
  return Congruence(ch.H[k][k], Q[k]);
}

double LinkUtility(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k) {
  const HermitianMatrix v = SignalCovariance(ch, Q, k);
  const HermitianMatrix a = ReceivedCovariance(ch, Q, k);
  const auto llt = Factor(a, k);
  return llt.solve(v.matrix()).trace().real();
}

UtilityReport Utility(const ChannelSet& ch, const CovarianceProfile& prof) {
  UtilityReport rep;
  for (int k = 0; k < ch.num_links; ++k) {
    HermitianMatrix r = InterferenceCovariance(ch, prof.Q, k);
    HermitianMatrix v = SignalCovariance(ch, prof.Q, k);
    HermitianMatrix a = r + v;
    const auto llt = Factor(a, k);
    const double u = llt.solve(v.matrix()).trace().real();
    rep.u.push_back(u);
    rep.sum_u += u;
    rep.sum_mse += ch.M(k) - u;
    rep.A.push_back(std::move(a));
    rep.R.push_back(std::move(r));
  }
  return rep;
}

std::vector<ComplexMatrix> OptimalReceiver(const ChannelSet& ch, const CovarianceProfile& prof) {
  std::vector<ComplexMatrix> W;
  for (int k = 0; k < ch.num_links; ++k) {
    if (!(ch.sigma2[k] > 0.0)) throw Error(ErrorCode::kSingularSystem, "noise power must be positive");
    const HermitianMatrix a = ReceivedCovariance(ch, prof.Q, k);
    const HermitianMatrix f = HermitianSqrt(prof.Q[k]);
    const auto llt = Factor(a, k);
    // W = F^H H^H A^-1  <=>  W^H = A^-1 H F.
    const ComplexMatrix wh = llt.solve(ch.H[k][k] * f.matrix());
    W.push_back(wh.adjoint());
  }
  return W;
}

void AttachOptimalReceiver(const ChannelSet& ch, CovarianceProfile& prof) {
  prof.W = OptimalReceiver(ch, prof);
}

HermitianMatrix MseMatrix(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                          const ComplexMatrix& W, int k) {
  const HermitianMatrix a = ReceivedCovariance(ch, Q, k);
  const ComplexMatrix f = HermitianSqrt(Q[k]).matrix();
  const ComplexMatrix whf = W * ch.H[k][k] * f;
  const Index m = ch.M(k);
  ComplexMatrix e = W * a.matrix() * W.adjoint() - whf - whf.adjoint() +
                    ComplexMatrix::Identity(m, m);
  return HermitianMatrix(e);
}

HermitianMatrix MseMatrix(const ChannelSet& ch, const CovarianceProfile& prof, int k) {
  if (!prof.W) throw Error(ErrorCode::kMissingReceiver, "profile has no receive filters");
  return MseMatrix(ch, prof.Q, (*prof.W)[k], k);
}

HermitianMatrix GradientTerm(const ComplexMatrix& H_jk, const HermitianMatrix& B_j,
                             const HermitianMatrix& V_j) {
  Eigen::LLT<ComplexMatrix> llt(B_j.matrix());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularSystem, "B_j is not positive definite");
  }
  const ComplexMatrix x = llt.solve(H_jk);
  return HermitianMatrix(ComplexMatrix(-(x.adjoint() * V_j.matrix() * x)));
}

HermitianMatrix GradientD(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k,
                          double neighbor_threshold) {
  ComplexMatrix d = ComplexMatrix::Zero(ch.M(k), ch.M(k));
  for (int j = 0; j < ch.num_links; ++j) {
    if (j == k) continue;
    if (ch.H[j][k].squaredNorm() < neighbor_threshold) continue;
    const HermitianMatrix b = ReceivedCovariance(ch, Q, j);
    const HermitianMatrix v = SignalCovariance(ch, Q, j);
    d += GradientTerm(ch.H[j][k], b, v).matrix();
  }
  return HermitianMatrix(d);
}

HermitianMatrix OwnUtilityGradient(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                   int k) {
  const HermitianMatrix a = ReceivedCovariance(ch, Q, k);
  const HermitianMatrix r = InterferenceCovariance(ch, Q, k);
  const auto llt = Factor(a, k);
  const ComplexMatrix x = llt.solve(ch.H[k][k]);
  return HermitianMatrix(ComplexMatrix(x.adjoint() * r.matrix() * x));
}

double Interference(const ChannelSet& ch, const HermitianMatrix& Q_k, int pu, int k,
                    bool use_true) {
  if (use_true && !ch.G_true) {
    throw Error(ErrorCode::kMissingTrueChannel, "channel set carries no realized PU channels");
  }
  const ComplexMatrix& g = use_true ? (*ch.G_true)[pu][k] : ch.G_hat[pu][k];
  return (g * Q_k.matrix() * g.adjoint()).trace().real();
}

WorstCase WorstCaseInterference(const ComplexMatrix& g_hat, double eps, const HermitianMatrix& Q) {
  const Index L = g_hat.rows();
  const Index M = g_hat.cols();
  WorstCase out;
  out.delta_g = ComplexMatrix::Zero(L, M);
  const double nominal = (g_hat * Q.matrix() * g_hat.adjoint()).trace().real();
  if (eps <= 0.0) {
    out.value = nominal;
    return out;
  }
  // In g = vec(dG^H): objective g^H A g + 2 Re(b^H g) + c.
  const ComplexMatrix A = Kron(ComplexMatrix::Identity(L, L), Q.matrix());
  const ComplexVector b = Vec(Q.matrix() * g_hat.adjoint());
  const HermitianEigen eig = HermitianEig(HermitianMatrix(A));
  const Index n = A.rows();
  const ComplexVector beta = eig.vectors.adjoint() * b;
  const double lmax = eig.values(0);
  const double bnorm = b.norm();
  const double scale = std::max({std::abs(lmax), bnorm / eps, 1e-300});

  auto g_of = [&](double mu, bool skip_top) {
    ComplexVector g = ComplexVector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      const double gap = mu - eig.values(i);
      if (skip_top && gap <= 1e-12 * scale) continue;
      g += (beta(i) / gap) * eig.vectors.col(i);
    }
    return g;
  };

  // Hard case: b has no component along the top eigenspace and the
  // remaining stationary vector fits strictly inside the ball.
  double top_weight = 0.0;
  for (Index i = 0; i < n; ++i) {
    if (lmax - eig.values(i) <= 1e-12 * scale) top_weight += std::norm(beta(i));
  }
  ComplexVector g;
  bool solved = false;
  if (top_weight <= 1e-28 * scale * scale * eps * eps) {
    const ComplexVector g0 = g_of(lmax, true);
    const double g0n = g0.norm();
    if (g0n <= eps) {
      g = g0 + std::sqrt(std::max(0.0, eps * eps - g0n * g0n)) * eig.vectors.col(0);
      solved = true;
    }
  }
  if (!solved) {
    auto excess = [&](double mu) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double gap = mu - eig.values(i);
        s += std::norm(beta(i)) / (gap * gap);
      }
      return s - eps * eps;
    };
    double lo = lmax;
    double hi = lmax + bnorm / eps;
    for (int it = 0; it < 400 && hi - lo > 1e-15 * scale; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (excess(mid) > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    g = g_of(hi, false);
    const double gn = g.norm();
    if (gn > 0.0) g *= eps / gn;
  }
  const double value = g.dot(A * g).real() + 2.0 * b.dot(g).real() + nominal;
  out.value = std::max(value, nominal);
  out.delta_g = Unvec(g, M, L).adjoint();
  return out;
}

}  // namespace cogbeam
