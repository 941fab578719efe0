#include "cogbeam/check.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cogbeam/allocator.h"
#include "cogbeam/bca.h"
#include "cogbeam/channel_io.h"
#include "cogbeam/error.h"
#include "cogbeam/harness.h"
#include "cogbeam/lmi.h"
#include "cogbeam/sdp.h"

namespace cogbeam {
namespace {

double OthersUtility(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k) {
  double f = 0.0;
  for (int j = 0; j < ch.num_links; ++j) {
    if (j != k) f += LinkUtility(ch, Q, j);
  }
  return f;
}

HermitianMatrix RandomPsdScaled(Rng& rng, Index dim, double trace) {
  const ComplexMatrix a = RandomComplexGaussian(rng, dim, dim, 1.0);
  ComplexMatrix q = a * a.adjoint();
  q *= trace / q.trace().real();
  return HermitianMatrix(q);
}

std::string Num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

CheckResult SdpCertificates(const std::vector<ChannelSet>& fixtures) {
  CheckResult r{"sdp_certificate", true, ""};
  int solved = 0;
  double worst = 0.0;
  for (const auto& ch : fixtures) {
    const CovarianceProfile zero = CovarianceProfile::Zero(ch);
    const Budgets budgets = EqualSplitBudgets(ch.num_pu, ch.num_links, 4e-7);
    for (int k = 0; k < ch.num_links; ++k) {
      SubproblemSpec spec;
      spec.link = k;
      spec.mode = SubproblemMode::kPlain;
      spec.D = GradientD(ch, zero.Q, k);
      spec.H_kk = ch.H[k][k];
      spec.R_half = HermitianSqrt(InterferenceCovariance(ch, zero.Q, k));
      spec.p_max = ch.p_max[k];
      for (int p = 0; p < ch.num_pu; ++p) spec.robust.push_back({ch.G_hat[p][k], ch.eps[p][k], budgets[p][k]});
      const AssembledSubproblem a = Assemble(spec);
      const SdpSolution sol = Solve(a.problem, SdpOptions{1e-9, 1e-9, 200});
      if (sol.status != SdpStatus::kOptimal) {
        r.passed = false;
        r.detail = "status " + std::string(SdpStatusName(sol.status));
        return r;
      }
      try {
        const CertificateReport rep = CheckCertificate(a.problem, sol, 1e-8);
        worst = std::max({worst, rep.primal_infeas, rep.dual_infeas, rep.complementarity});
      } catch (const Error& e) {
        r.passed = false;
        r.detail = e.what();
        return r;
      }
      ++solved;
    }
  }
  r.detail = std::to_string(solved) + " subproblems certified, worst residual " + Num(worst);
  return r;
}

CheckResult SProcedureAgreement(Rng& rng, int count) {
  CheckResult r{"s_procedure", true, ""};
  int disagree = 0;
  for (int i = 0; i < count; ++i) {
    const Index m = 1 + static_cast<Index>(rng.Uniform() * 3);
    const Index l = 1 + static_cast<Index>(rng.Uniform() * 3);
    const ComplexMatrix g = RandomComplexGaussian(rng, l, m, 1.0);
    const HermitianMatrix q = RandomPsdScaled(rng, m, rng.Uniform(0.1, 2.0));
    const double eps = rng.Uniform(0.0, 0.5) * g.norm();
    const double wc = WorstCaseInterference(g, eps, q).value;
    const double iota = wc * rng.Uniform(0.5, 1.5);
    const bool lmi = SProcedureMargin(g, eps, q, iota).feasible;
    const bool direct = wc <= iota;
    if (lmi != direct && std::abs(wc - iota) > 1e-7 * std::max(wc, iota)) ++disagree;
  }
  r.passed = disagree == 0;
  r.detail = std::to_string(disagree) + " of " + std::to_string(count) + " triples disagree outside the boundary band";
  return r;
}

CheckResult GradientCheck(Rng& rng, int count, std::uint64_t seed) {
  CheckResult r{"gradient_fd", true, ""};
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const ChannelSet ch = RandomSmallInstance(rng, 3, 3, seed + static_cast<std::uint64_t>(i));
    const auto Q = RandomProfile(rng, ch);
    for (int k = 0; k < ch.num_links; ++k) worst = std::max(worst, GradientRelativeError(ch, Q, k));
  }
  r.passed = worst <= 1e-5;
  r.detail = "max relative error " + Num(worst);
  return r;
}

CheckResult MseIdentity(Rng& rng, int count, std::uint64_t seed) {
  CheckResult r{"mse_identity", true, ""};
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const ChannelSet ch = RandomSmallInstance(rng, 3, 3, seed + 1000 + static_cast<std::uint64_t>(i));
    CovarianceProfile prof;
    prof.Q = RandomProfile(rng, ch);
    AttachOptimalReceiver(ch, prof);
    const UtilityReport rep = Utility(ch, prof);
    for (int k = 0; k < ch.num_links; ++k) {
      const double tr = MseMatrix(ch, prof, k).trace();
      worst = std::max(worst, std::abs(tr - (ch.M(k) - rep.u[k])));
    }
  }
  r.passed = worst <= 1e-9;
  r.detail = "max |Tr E - (M - u)| " + Num(worst);
  return r;
}

CheckResult SimplexProjection(Rng& rng, int count) {
  CheckResult r{"simplex_projection", true, ""};
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const int n = 1 + static_cast<int>(rng.Uniform() * 6);
    const double cap = rng.Uniform(0.1, 2.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.Normal();
    const std::vector<double> x = ProjectSimplex(v, cap);
    // Optimality: x - v = -mu on the support, >= -mu off it, mu >= 0 and
    // mu (cap - sum x) = 0.
    double sum = 0.0;
    double mu = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      sum += x[j];
      worst = std::max(worst, -x[j]);
      if (x[j] > 0.0) mu = std::max(mu, v[j] - x[j]);
    }
    worst = std::max(worst, sum - cap);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] > 0.0) worst = std::max(worst, std::abs(v[j] - x[j] - mu));
      else worst = std::max(worst, v[j] - mu);
    }
    worst = std::max(worst, mu * std::abs(cap - sum));
  }
  r.passed = worst <= 1e-12;
  r.detail = "max optimality residual " + Num(worst);
  return r;
}

CheckResult BcaInvariants(const std::vector<ChannelSet>& fixtures) {
  CheckResult r{"bca_invariants", true, ""};
  double drop = 0.0;
  double excess = 0.0;
  for (const auto& ch : fixtures) {
    const Budgets budgets = EqualSplitBudgets(ch.num_pu, ch.num_links, 4e-7);
    const BcaResult res = RunCentralized(ch, budgets, BcaOptions{});
    for (std::size_t n = 1; n < res.trace.cycles.size(); ++n) {
      drop = std::max(drop, res.trace.cycles[n - 1].sum_utility - res.trace.cycles[n].sum_utility);
    }
    for (int p = 0; p < ch.num_pu; ++p) {
      for (int k = 0; k < ch.num_links; ++k) {
        const double wc = LinkInterference(ch, res.profile.Q[k], p, k, true);
        excess = std::max(excess, wc / budgets[p][k] - 1.0);
      }
    }
  }
  r.passed = drop <= 1e-8 && excess <= 1e-6;
  r.detail = "max utility drop " + Num(drop) + ", max relative excess " + Num(excess);
  return r;
}

}  // namespace

ChannelSet RandomSmallInstance(Rng& rng, int max_links, int max_dim, std::uint64_t seed) {
  auto pick = [&](int hi) { return 1 + std::min(hi - 1, static_cast<int>(rng.Uniform() * hi)); };
  NetworkConfig cfg;
  cfg.num_links = pick(max_links);
  cfg.tx_antennas.clear();
  cfg.rx_antennas.clear();
  for (int k = 0; k < cfg.num_links; ++k) {
    cfg.tx_antennas.push_back(pick(max_dim));
    cfg.rx_antennas.push_back(pick(max_dim));
  }
  cfg.pu_antennas = {pick(max_dim)};
  cfg.seed = seed;
  return Generate(cfg, 0);
}

std::vector<HermitianMatrix> RandomProfile(Rng& rng, const ChannelSet& ch) {
  std::vector<HermitianMatrix> Q;
  for (int k = 0; k < ch.num_links; ++k) {
    Q.push_back(RandomPsdScaled(rng, ch.M(k), ch.p_max[k] * rng.Uniform(0.05, 1.0)));
  }
  return Q;
}

ComplexMatrix FiniteDifferenceGradient(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q,
                                       int k, double h) {
  const Index m = ch.M(k);
  ComplexMatrix fd = ComplexMatrix::Zero(m, m);
  auto directional = [&](const ComplexMatrix& e) {
    std::vector<HermitianMatrix> plus = Q;
    std::vector<HermitianMatrix> minus = Q;
    plus[k] = HermitianMatrix(ComplexMatrix(Q[k].matrix() + h * e));
    minus[k] = HermitianMatrix(ComplexMatrix(Q[k].matrix() - h * e));
    return (OthersUtility(ch, plus, k) - OthersUtility(ch, minus, k)) / (2.0 * h);
  };
  for (Index a = 0; a < m; ++a) {
    ComplexMatrix e = ComplexMatrix::Zero(m, m);
    e(a, a) = 1.0;
    fd(a, a) = directional(e);
    for (Index b = a + 1; b < m; ++b) {
      // Re Tr{D (E_ab + E_ba)} = 2 Re D_ab, Re Tr{D i(E_ab - E_ba)} = 2 Im D_ab.
      ComplexMatrix sym = ComplexMatrix::Zero(m, m);
      sym(a, b) = 1.0;
      sym(b, a) = 1.0;
      ComplexMatrix anti = ComplexMatrix::Zero(m, m);
      anti(a, b) = Complex(0.0, 1.0);
      anti(b, a) = Complex(0.0, -1.0);
      const Complex d(0.5 * directional(sym), 0.5 * directional(anti));
      fd(a, b) = d;
      fd(b, a) = std::conj(d);
    }
  }
  return fd;
}

double GradientRelativeError(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k) {
  const ComplexMatrix d = GradientD(ch, Q, k).matrix();
  const double scale = d.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    // No other receivers: f_k is constant and the FD gradient must vanish.
    return FiniteDifferenceGradient(ch, Q, k, 1e-5 * ch.p_max[k]).cwiseAbs().maxCoeff();
  }
  const ComplexMatrix fd = FiniteDifferenceGradient(ch, Q, k, 1e-5 * ch.p_max[k]);
  return (fd - d).cwiseAbs().maxCoeff() / scale;
}

std::vector<CheckResult> RunChecks(const CheckOptions& opts) {
  std::vector<CheckResult> out;
  Rng rng = MakeStream(opts.seed, 0, StreamTag::kTest, 7);
  const int n = std::max(1, opts.instances);

  std::vector<ChannelSet> fixtures;
  if (opts.channels_file) {
    CheckResult io{"channel_fixture", true, ""};
    try {
      ChannelSet ch = ParseChannelSet(ReadFile(*opts.channels_file));
      ch.CheckShapes();
      io.detail = "K=" + std::to_string(ch.num_links) + " PUs=" + std::to_string(ch.num_pu);
      fixtures.push_back(std::move(ch));
    } catch (const Error& e) {
      io.passed = false;
      io.detail = e.what();
    }
    out.push_back(io);
  } else {
    NetworkConfig cfg;
    cfg.seed = opts.seed;
    for (std::uint64_t run = 0; run < 3; ++run) fixtures.push_back(Generate(cfg, run));
    CheckResult io{"channel_roundtrip", true, ""};
    for (const auto& ch : fixtures) {
      const std::string text = SerializeChannelSet(ch);
      if (SerializeChannelSet(ParseChannelSet(text)) != text) io.passed = false;
    }
    io.detail = std::to_string(fixtures.size()) + " generated fixtures";
    out.push_back(io);
  }

  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const Error& e) {
      out.push_back({name, false, e.what()});
    }
  };
  if (!fixtures.empty()) {
    guarded("sdp_certificate", [&] { return SdpCertificates(fixtures); });
    guarded("bca_invariants", [&] { return BcaInvariants(fixtures); });
  }
  guarded("s_procedure", [&] { return SProcedureAgreement(rng, 4 * n); });
  guarded("gradient_fd", [&] { return GradientCheck(rng, n, opts.seed); });
  guarded("mse_identity", [&] { return MseIdentity(rng, n, opts.seed); });
  guarded("simplex_projection", [&] { return SimplexProjection(rng, 10 * n); });
  if (opts.manifest_dir) {
    guarded("manifest", [&] {
      const auto bad = VerifyManifest(*opts.manifest_dir);
      CheckResult r{"manifest", bad.empty(), ""};
      r.detail = bad.empty() ? "all hashes match" : "mismatch: " + bad.front();
      return r;
    });
  }
  return out;
}

}  // namespace cogbeam
