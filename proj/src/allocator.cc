#include "cogbeam/allocator.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "cogbeam/error.h"

namespace cogbeam {

std::vector<double> ProjectSimplex(const std::vector<double>& v, double iota_max) {
  if (!(iota_max > 0.0)) throw Error(ErrorCode::kRangeError, "iota_max must be positive");
  std::vector<double> clamp(v.size());
  std::transform(v.begin(), v.end(), clamp.begin(), [](double x) { return std::max(x, 0.0); });
  if (std::accumulate(clamp.begin(), clamp.end(), 0.0) <= iota_max) return clamp;
  // Threshold projection onto the face sum x = iota_max.
  std::vector<double> s(v);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cum += s[i];
    const double t = (cum - iota_max) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [&](double x) { return std::max(x - theta, 0.0); });
  // When |v| >> iota_max the subtraction above loses the low-order bits.
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (sum > iota_max) {
    for (double& x : out) x *= iota_max / sum;
  }
  return out;
}

double StepSize(const AllocatorOptions& opts, double iota_max, int ell) {
  const double s0 = opts.s0 > 0.0 ? opts.s0 : iota_max * iota_max;
  return s0 / std::sqrt(static_cast<double>(std::max(ell, 1)));
}

BudgetState MasterStep(const BudgetState& state, const Budgets& lambdas, double iota_max,
                       const AllocatorOptions& opts, double step_scale) {
  BudgetState next = state;
  next.ell = state.ell + 1;
  next.step = step_scale * StepSize(opts, iota_max, next.ell);
  next.lambda = lambdas;
  for (std::size_t p = 0; p < state.iota.size(); ++p) {
    std::vector<double> v = state.iota[p];
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double l = lambdas.at(p).at(k);
      if (l < -1e-10) throw Error(ErrorCode::kRangeError, "multipliers must be nonnegative");
      v[k] += next.step * std::max(l, 0.0);
    }
    next.iota[p] = ProjectSimplex(v, iota_max);
  }
  return next;
}

std::string AllocationResult::BudgetsCsv() const {
  std::ostringstream out;
  out.precision(17);
  out << "master_iter,pu,link,iota_w,lambda\n";
  for (const auto& m : masters) {
    for (std::size_t p = 0; p < m.iota.size(); ++p) {
      for (std::size_t k = 0; k < m.iota[p].size(); ++k) {
        out << m.ell << ',' << p << ',' << k << ',' << m.iota[p][k] << ',' << m.lambda[p][k] << "\n";
      }
    }
  }
  return out.str();
}

AllocationResult RunPrimalDecomposition(const ChannelSet& ch, double iota_max, const AllocatorOptions& opts) {
  if (!(iota_max > 0.0)) throw Error(ErrorCode::kRangeError, "iota_max must be positive");
  if (opts.max_masters < 1 || !(opts.upsilon > 0.0) || opts.max_backtracks < 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_masters >= 1, upsilon > 0, max_backtracks >= 0 required");
  }
  ch.CheckShapes();
  const int K = ch.num_links;
  const auto start = std::chrono::steady_clock::now();
  AllocationResult out;
  out.profile = CovarianceProfile::Zero(ch);
  out.state.iota = EqualSplitBudgets(ch.num_pu, K, iota_max);
  out.state.lambda.assign(ch.num_pu, std::vector<double>(K, 0.0));
  out.trace.cycles.push_back(Snapshot(ch, out.profile.Q, 0));

  struct Pass {
    std::vector<HermitianMatrix> Q;
    std::vector<CycleRecord> cycles;
    Budgets lambda;
  };
  // Inner BCA pass under fixed budgets, starting from the committed profile.
  auto inner_pass = [&](const Budgets& iota, int first_cycle) {
    Pass pass;
    pass.Q = out.profile.Q;
    pass.lambda.assign(ch.num_pu, std::vector<double>(K, 0.0));
    double last_u = out.trace.cycles.back().sum_utility;
    const int inner = opts.inner_to_convergence ? opts.max_inner_cycles : 1;
    for (int c = 0; c < inner; ++c) {
      const int cycle = first_cycle + c;
      int warnings = 0;
      double max_step = 0.0;
      for (int k = 0; k < K; ++k) {
        const HermitianMatrix D = GradientD(ch, pass.Q, k, opts.neighbor_threshold);
        const HermitianMatrix R = InterferenceCovariance(ch, pass.Q, k);
        LinkOptions lo;
        lo.budgeted = true;
        lo.robust = opts.robust;
        lo.interference_scale = iota_max / K;
        lo.sdp = opts.sdp;
        lo.cycle = cycle;
        std::vector<double> iota_k;
        for (int p = 0; p < ch.num_pu; ++p) iota_k.push_back(iota[p][k]);
        LinkUpdate up = UpdateLink(ch, pass.Q, k, D, R, iota_k, lo);
        warnings += up.status != SdpStatus::kOptimal;
        max_step = std::max(max_step, (up.Q - pass.Q[k]).frobenius_norm());
        pass.Q[k] = std::move(up.Q);
        for (int p = 0; p < ch.num_pu; ++p) pass.lambda[p][k] = up.lambda[p];
      }
      CycleRecord rec = Snapshot(ch, pass.Q, cycle);
      rec.max_step = max_step;
      rec.solver_warnings = warnings;
      rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double gain = rec.sum_utility - last_u;
      last_u = rec.sum_utility;
      pass.cycles.push_back(std::move(rec));
      if (gain < opts.upsilon) break;
    }
    return pass;
  };

  int stall = 0;
  std::vector<double> prev_u = out.trace.cycles.back().u;
  for (int ell = 1; ell <= opts.max_masters; ++ell) {
    const double u_before = out.trace.cycles.back().sum_utility;
    const int first_cycle = out.trace.completed_cycles() + 1;
    BudgetState trial = out.state;
    Pass pass;
    double scale = 1.0;
    for (int attempt = 0;; ++attempt) {
      if (ell > 1) trial = MasterStep(out.state, out.state.lambda, iota_max, opts, scale);
      pass = inner_pass(trial.iota, first_cycle);
      // Cluster head: multipliers up, budgets down.
      for (int k = 0; k < K; ++k) {
        out.log.messages.push_back({first_cycle, k, -1, "lambda", sizeof(double) * ch.num_pu});
        out.log.messages.push_back({first_cycle, -1, k, "iota", sizeof(double) * ch.num_pu});
      }
      const bool ascent = pass.cycles.back().sum_utility >= u_before;
      if (ell == 1 || ascent || scale == 0.0 || opts.max_backtracks == 0) break;
      ++out.backtracks;
      scale = attempt + 1 >= opts.max_backtracks ? 0.0 : 0.5 * scale;
    }
    out.profile.Q = std::move(pass.Q);
    for (auto& c : pass.cycles) out.trace.cycles.push_back(std::move(c));
    trial.lambda = pass.lambda;
    out.state = std::move(trial);
    const CycleRecord& now = out.trace.cycles.back();

    MasterRecord mr;
    mr.ell = ell;
    mr.iota = out.state.iota;
    mr.lambda = out.state.lambda;
    mr.sum_utility = now.sum_utility;
    mr.sum_mse = now.sum_mse;
    for (int p = 0; p < ch.num_pu; ++p) {
      double agg = 0.0;
      for (int k = 0; k < K; ++k) agg += LinkInterference(ch, out.profile.Q[k], p, k, opts.robust);
      mr.aggregate_worst_case.push_back(agg);
    }
    out.masters.push_back(std::move(mr));

    // Per-link utility change across master iterations.
    bool converged = ell > 1;
    for (int k = 0; k < K && converged; ++k) converged = std::abs(now.u[k] - prev_u[k]) < opts.upsilon;
    prev_u = now.u;

    bool all_zero = true;
    for (const auto& row : out.state.lambda) {
      for (double l : row) all_zero = all_zero && l <= 1e-12;
    }
    stall = all_zero ? stall + 1 : 0;
    if (converged) {
      out.converged = true;
      break;
    }
    if (stall >= opts.max_stall) {
      out.budget_collapse = true;
      break;
    }
  }
  out.trace.converged = out.converged;
  AttachOptimalReceiver(ch, out.profile);
  return out;
}

}  // namespace cogbeam
