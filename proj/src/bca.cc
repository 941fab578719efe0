#include "cogbeam/bca.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "cogbeam/error.h"

namespace cogbeam {

namespace {

double Surrogate(const ComplexMatrix& H, const HermitianMatrix& R, const HermitianMatrix& D,
                 const HermitianMatrix& Q) {
  const ComplexMatrix v = H * Q.matrix() * H.adjoint();
  const ComplexMatrix a = v + R.matrix();
  Eigen::LLT<ComplexMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::kSingularSystem, "surrogate covariance not PD");
  return llt.solve(v).trace().real() + (D.matrix() * Q.matrix()).trace().real();
}

bool Feasible(const ChannelSet& ch, const HermitianMatrix& Q, int k, const std::vector<double>& iota_k,
              bool robust) {
  if (Q.trace() > ch.p_max[k] * (1.0 + 1e-12)) return false;
  if (MinEigenvalue(Q) < -1e-12 * (1.0 + MaxEigenvalue(Q))) return false;
  for (int p = 0; p < ch.num_pu; ++p) {
    if (LinkInterference(ch, Q, p, k, robust) > iota_k[p] * (1.0 + 1e-12)) return false;
  }
  return true;
}

HermitianMatrix Polish(const ChannelSet& ch, const HermitianMatrix& cand, int k,
                       const std::vector<double>& iota_k, bool robust) {
  HermitianMatrix q = ProjectPsd(cand);
  double alpha = 1.0;
  const double tr = q.trace();
  if (tr > ch.p_max[k]) alpha = ch.p_max[k] / tr;
  for (int p = 0; p < ch.num_pu; ++p) {
    const double wc = LinkInterference(ch, q, p, k, robust);
    if (wc * alpha > iota_k[p]) alpha = wc > 0.0 ? iota_k[p] / wc : 0.0;
  }
  return alpha < 1.0 ? q * alpha : q;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> LinkBudgets(const Budgets& budgets, int k) {
  std::vector<double> out;
  for (const auto& row : budgets) out.push_back(row.at(static_cast<std::size_t>(k)));
  return out;
}

void CheckBudgets(const ChannelSet& ch, const Budgets& budgets) {
  if (static_cast<int>(budgets.size()) != ch.num_pu) {
    throw Error(ErrorCode::kShapeMismatch, "budgets must have one row per PU");
  }
  for (const auto& row : budgets) {
    if (static_cast<int>(row.size()) != ch.num_links) {
      throw Error(ErrorCode::kShapeMismatch, "budget row must have one entry per link");
    }
    for (double b : row) {
      if (!(b >= 0.0)) throw Error(ErrorCode::kRangeError, "budgets must be nonnegative");
    }
  }
}

using GradientFn = std::function<HermitianMatrix(const std::vector<HermitianMatrix>&, int, int)>;

IterationTrace RunLoop(const ChannelSet& ch, const Budgets& budgets, const BcaOptions& opts,
                       StopRule rule, std::vector<HermitianMatrix>& Q, const GradientFn& gradient) {
  const auto start = std::chrono::steady_clock::now();
  IterationTrace trace;
  CovarianceProfile prof;
  auto snap = [&](int cycle) {
    CycleRecord rec = Snapshot(ch, Q, cycle);
    if (opts.track_stationarity) {
      prof.Q = Q;
      rec.stationarity = StationarityResidual(ch, prof, budgets, opts.robust);
    }
    rec.wall_seconds = Seconds(start);
    return rec;
  };
  trace.cycles.push_back(snap(0));
  for (int n = 1; n <= opts.max_cycles; ++n) {
    int warnings = 0;
    double max_step = 0.0;
    for (int k = 0; k < ch.num_links; ++k) {
      const HermitianMatrix D = gradient(Q, k, n);
      const HermitianMatrix R = InterferenceCovariance(ch, Q, k);
      LinkOptions lo;
      lo.mode = opts.mode;
      lo.tau = opts.Tau(k);
      lo.robust = opts.robust;
      lo.sdp = opts.sdp;
      lo.cycle = n;
      LinkUpdate up = UpdateLink(ch, Q, k, D, R, LinkBudgets(budgets, k), lo);
      warnings += up.status != SdpStatus::kOptimal;
      max_step = std::max(max_step, (up.Q - Q[k]).frobenius_norm());
      Q[k] = std::move(up.Q);
    }
    CycleRecord rec = snap(n);
    rec.max_step = max_step;
    rec.solver_warnings = warnings;
    const CycleRecord& prev = trace.cycles.back();
    bool stop = false;
    if (rule == StopRule::kSumUtility) {
      stop = rec.sum_utility - prev.sum_utility < opts.upsilon;
    } else {
      stop = true;
      for (int k = 0; k < ch.num_links; ++k) stop = stop && std::abs(rec.u[k] - prev.u[k]) < opts.upsilon;
    }
    trace.cycles.push_back(std::move(rec));
    if (stop) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

}  // namespace

void Validate(const BcaOptions& opts, int num_links) {
  if (!(opts.upsilon > 0.0)) throw Error(ErrorCode::kInvalidConfig, "upsilon > 0 violated");
  if (opts.max_cycles < 1) throw Error(ErrorCode::kInvalidConfig, "max_cycles >= 1 violated");
  if (opts.tau.empty() || (opts.tau.size() != 1 && static_cast<int>(opts.tau.size()) != num_links)) {
    throw Error(ErrorCode::kInvalidConfig, "tau must have 1 or K entries");
  }
  if (opts.mode == BcaMode::kProximal) {
    for (double t : opts.tau) {
      if (!(t > 0.0)) throw Error(ErrorCode::kInvalidConfig, "tau > 0 violated in proximal mode");
    }
  }
  if (opts.neighbor_threshold < 0.0) throw Error(ErrorCode::kInvalidConfig, "neighbor_threshold >= 0 violated");
}

std::string IterationTrace::ToCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "cycle,sum_utility,sum_mse,max_step,stationarity,wall_s";
  const std::size_t K = cycles.empty() ? 0 : cycles.front().u.size();
  for (std::size_t k = 0; k < K; ++k) out << ",u_" << k;
  out << "\n";
  for (const auto& c : cycles) {
    out << c.cycle << ',' << c.sum_utility << ',' << c.sum_mse << ',' << c.max_step << ','
        << c.stationarity << ',' << c.wall_seconds;
    for (double u : c.u) out << ',' << u;
    out << "\n";
  }
  return out.str();
}

std::size_t MessageLog::Count(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(messages.begin(), messages.end(), [&](const Message& m) { return m.kind == kind; }));
}

std::string MessageLog::ToCsv() const {
  std::ostringstream out;
  out << "cycle,from,to,kind,bytes\n";
  for (const auto& m : messages) {
    out << m.cycle << ',' << m.from << ',' << m.to << ',' << m.kind << ',' << m.bytes << "\n";
  }
  return out.str();
}

double LinkInterference(const ChannelSet& ch, const HermitianMatrix& Q_k, int pu, int k, bool robust) {
  if (!robust) return Interference(ch, Q_k, pu, k, false);
  return WorstCaseInterference(ch.G_hat[pu][k], ch.eps[pu][k], Q_k).value;
}

LinkUpdate UpdateLink(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int k,
                      const HermitianMatrix& D_k, const HermitianMatrix& R_kk,
                      const std::vector<double>& iota_k, const LinkOptions& opts) {
  SubproblemSpec spec;
  spec.link = k;
  spec.mode = opts.budgeted ? SubproblemMode::kBudgeted
                            : (opts.mode == BcaMode::kProximal ? SubproblemMode::kProximal
                                                               : SubproblemMode::kPlain);
  spec.D = D_k;
  spec.H_kk = ch.H[k][k];
  spec.R_half = HermitianSqrt(R_kk);
  spec.p_max = ch.p_max[k];
  for (int p = 0; p < ch.num_pu; ++p) {
    spec.robust.push_back({ch.G_hat[p][k], opts.robust ? ch.eps[p][k] : 0.0, iota_k[p]});
  }
  if (spec.mode == SubproblemMode::kProximal) {
    spec.prev_Q = Q[k];
    spec.tau = opts.tau;
  }
  spec.interference_scale = opts.interference_scale;

  const AssembledSubproblem a = Assemble(spec);
  const SdpSolution sol = Solve(a.problem, opts.sdp);
  if (sol.status == SdpStatus::kInfeasible || sol.status == SdpStatus::kUnbounded) {
    std::ostringstream msg;
    msg << "cycle " << opts.cycle << " link " << k << ": subproblem " << SdpStatusName(sol.status);
    throw Error(ErrorCode::kSolverFailure, msg.str());
  }
  LinkUpdate out;
  out.status = sol.status;
  const SubproblemResult res = Extract(a, sol);
  out.lambda = res.lambda;
  for (double& l : out.lambda) l = std::max(l, 0.0);

  HermitianMatrix cand = Polish(ch, res.Q, k, iota_k, opts.robust);
  const ComplexMatrix& H = ch.H[k][k];
  double prox = 0.0;
  if (spec.mode == SubproblemMode::kProximal) {
    const double d = (cand - Q[k]).frobenius_norm();
    prox = d * d / (2.0 * opts.tau);
  }
  const double new_score = Surrogate(H, R_kk, D_k, cand) - prox;
  const double old_score = Surrogate(H, R_kk, D_k, Q[k]);
  if (old_score >= new_score && Feasible(ch, Q[k], k, iota_k, opts.robust)) {
    out.Q = Q[k];
    out.kept_previous = true;
  } else {
    out.Q = std::move(cand);
  }
  return out;
}

CycleRecord Snapshot(const ChannelSet& ch, const std::vector<HermitianMatrix>& Q, int cycle) {
  CycleRecord rec;
  rec.cycle = cycle;
  CovarianceProfile prof;
  prof.Q = Q;
  const UtilityReport rep = Utility(ch, prof);
  rec.sum_utility = rep.sum_u;
  rec.sum_mse = rep.sum_mse;
  rec.u = rep.u;
  rec.nominal_interference.assign(ch.num_pu, std::vector<double>(ch.num_links, 0.0));
  rec.worst_case_interference = rec.nominal_interference;
  for (int p = 0; p < ch.num_pu; ++p) {
    for (int k = 0; k < ch.num_links; ++k) {
      rec.nominal_interference[p][k] = Interference(ch, Q[k], p, k, false);
      rec.worst_case_interference[p][k] = LinkInterference(ch, Q[k], p, k, true);
    }
  }
  return rec;
}

BcaResult RunCentralized(const ChannelSet& ch, const Budgets& budgets, const BcaOptions& opts) {
  ch.CheckShapes();
  CheckBudgets(ch, budgets);
  Validate(opts, ch.num_links);
  BcaResult out;
  out.profile = CovarianceProfile::Zero(ch);
  const GradientFn grad = [&](const std::vector<HermitianMatrix>& Q, int k, int) {
    return GradientD(ch, Q, k, opts.neighbor_threshold);
  };
  out.trace = RunLoop(ch, budgets, opts, opts.stop_rule.value_or(StopRule::kSumUtility), out.profile.Q, grad);
  AttachOptimalReceiver(ch, out.profile);
  return out;
}

DistributedResult RunDistributed(const ChannelSet& ch, const Budgets& budgets, const BcaOptions& opts) {
  ch.CheckShapes();
  CheckBudgets(ch, budgets);
  Validate(opts, ch.num_links);
  DistributedResult out;
  out.profile = CovarianceProfile::Zero(ch);
  // Node k knows only H_{j,k} towards its neighbors; receiver j broadcasts
  // its measured B_j and V_j, and node k combines them locally.
  const GradientFn grad = [&](const std::vector<HermitianMatrix>& Q, int k, int cycle) {
    ComplexMatrix d = ComplexMatrix::Zero(ch.M(k), ch.M(k));
    for (int j = 0; j < ch.num_links; ++j) {
      if (j == k) continue;
      if (ch.H[j][k].squaredNorm() < opts.neighbor_threshold) continue;
      const HermitianMatrix B = ReceivedCovariance(ch, Q, j);
      const HermitianMatrix V = SignalCovariance(ch, Q, j);
      const std::size_t n = static_cast<std::size_t>(ch.N(j));
      out.log.messages.push_back({cycle, j, k, "BV", 2 * n * n * sizeof(Complex)});
      d += GradientTerm(ch.H[j][k], B, V).matrix();
    }
    return HermitianMatrix(d);
  };
  out.trace = RunLoop(ch, budgets, opts, opts.stop_rule.value_or(StopRule::kPerLink), out.profile.Q, grad);
  AttachOptimalReceiver(ch, out.profile);
  return out;
}

double StationarityResidual(const ChannelSet& ch, const CovarianceProfile& prof, const Budgets& budgets,
                            bool robust) {
  CheckBudgets(ch, budgets);
  double worst = -1e300;
  for (int k = 0; k < ch.num_links; ++k) {
    const HermitianMatrix grad = OwnUtilityGradient(ch, prof.Q, k) + GradientD(ch, prof.Q, k);
    SubproblemSpec spec;
    spec.link = k;
    spec.mode = SubproblemMode::kLinear;
    spec.D = grad;
    spec.p_max = ch.p_max[k];
    for (int p = 0; p < ch.num_pu; ++p) {
      spec.robust.push_back({ch.G_hat[p][k], robust ? ch.eps[p][k] : 0.0, budgets[p][k]});
    }
    const AssembledSubproblem a = Assemble(spec);
    const SdpSolution sol = Solve(a.problem, SdpOptions{1e-10, 1e-10, 200});
    if (sol.status == SdpStatus::kInfeasible || sol.status == SdpStatus::kUnbounded) {
      throw Error(ErrorCode::kSolverFailure,
                  "stationarity subproblem for link " + std::to_string(k) + ": " +
                      std::string(SdpStatusName(sol.status)));
    }
    const double best = -sol.primal_obj;
    const double here = (grad.matrix() * prof.Q[k].matrix()).trace().real();
    worst = std::max(worst, best - here);
  }
  return worst;
}

std::vector<bool> RankCheck(const ChannelSet& ch) {
  std::vector<bool> out;
  for (int k = 0; k < ch.num_links; ++k) {
    const ComplexMatrix& h = ch.H[k][k];
    if (h.rows() < h.cols()) {
      out.push_back(false);
      continue;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(h);
    const auto& s = svd.singularValues();
    out.push_back(s(s.size() - 1) > 1e-10 * s(0));
  }
  return out;
}

}  // namespace cogbeam
