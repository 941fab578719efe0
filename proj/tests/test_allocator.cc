#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "cogbeam/allocator.h"
#include "cogbeam/error.h"
#include "cogbeam/lmi.h"
#include "cogbeam/mse.h"
#include "cogbeam/rng.h"
#include "test_helpers.h"

using namespace cogbeam;
using cogbeam::testing::MaxAbs;

namespace {

double Dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Enumerates every support set with the sum constraint active or not and
// returns the closest feasible candidate.
std::vector<double> ProjectionOracle(const std::vector<double>& v, double cap) {
  const std::size_t n = v.size();
  std::vector<double> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    for (int active = 0; active < 2; ++active) {
      std::vector<double> x(n, 0.0);
      double sum_s = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          sum_s += v[i];
          ++count;
        }
      }
      const double mu = active && count > 0 ? (sum_s - cap) / count : 0.0;
      bool ok = true;
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) x[i] = v[i] - mu;
        if (x[i] < -1e-15) ok = false;
        total += x[i];
      }
      if (!ok || total > cap + 1e-12) continue;
      const double d = Dist(x, v);
      if (d < best_d) {
        best_d = d;
        best = x;
      }
    }
  }
  return best;
}

BudgetState StateOf(const Budgets& iota) {
  BudgetState s;
  s.iota = iota;
  s.lambda = Budgets(iota.size(), std::vector<double>(iota[0].size(), 0.0));
  return s;
}

ChannelSet BaselineInstance(std::uint64_t run) { return Generate(NetworkConfig{}, run); }

}  // namespace

TEST_CASE("projection examples") {
  const std::vector<double> feasible{0.2, 0.3, 0.1};
  CHECK(ProjectSimplex(feasible, 1.0) == feasible);
  const auto x = ProjectSimplex({2.0, 0.0}, 1.0);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.0));
  const auto clamp = ProjectSimplex({-1.0, 0.4}, 1.0);
  CHECK(clamp[0] == 0.0);
  CHECK(clamp[1] == 0.4);
}

TEST_CASE("projection matches the active-set oracle") {
  Rng rng = MakeStream(2, 0, StreamTag::kTest, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 6;
    const double cap = rng.Uniform(0.1, 3.0);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& e : v) e = rng.Uniform(-1.0, 2.0);
    const auto x = ProjectSimplex(v, cap);
    const auto oracle = ProjectionOracle(v, cap);
    REQUIRE(oracle.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - oracle[i]) <= 1e-9);
  }
}

TEST_CASE("projection is idempotent and non-expansive") {
  Rng rng = MakeStream(2, 0, StreamTag::kTest, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 6;
    const double cap = rng.Uniform(0.1, 3.0);
    std::vector<double> u(static_cast<std::size_t>(n));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      u[static_cast<std::size_t>(i)] = rng.Normal();
      v[static_cast<std::size_t>(i)] = rng.Normal();
    }
    const auto pu = ProjectSimplex(u, cap);
    const auto pv = ProjectSimplex(v, cap);
    CHECK(Dist(ProjectSimplex(pu, cap), pu) <= 1e-14);
    CHECK(Dist(pu, pv) <= Dist(u, v) + 1e-12);
  }
}

TEST_CASE("master step examples") {
  AllocatorOptions opts;
  opts.s0 = 0.1;
  const double cap = 1.0;
  const BudgetState interior = StateOf({{0.2, 0.3}});
  const BudgetState same = MasterStep(interior, {{0.0, 0.0}}, cap, opts);
  CHECK(same.iota == interior.iota);
  CHECK(same.ell == 1);

  const BudgetState moved = MasterStep(interior, {{1.0, 0.0}}, cap, opts);
  const double s = StepSize(opts, cap, 1);
  CHECK(s == doctest::Approx(0.1));
  CHECK(moved.iota[0][0] == doctest::Approx(0.2 + s));
  CHECK(moved.iota[0][1] == doctest::Approx(0.3));
  CHECK(StepSize(opts, cap, 4) == doctest::Approx(0.05));

  AllocatorOptions automatic;
  CHECK(StepSize(automatic, 4e-7, 1) == doctest::Approx(4e-7 * 4e-7));
}

TEST_CASE("random master sequences stay on the budget simplex") {
  Rng rng = MakeStream(2, 0, StreamTag::kTest, 5);
  AllocatorOptions opts;
  opts.s0 = 0.5;
  const double cap = 4e-7;
  BudgetState state = StateOf(EqualSplitBudgets(2, 4, cap));
  for (int ell = 0; ell < 200; ++ell) {
    Budgets lambdas(2, std::vector<double>(4));
    for (auto& row : lambdas) {
      for (double& l : row) l = rng.Uniform() < 0.3 ? 0.0 : rng.Uniform(0.0, 1e7);
    }
    state = MasterStep(state, lambdas, cap, opts);
    for (const auto& row : state.iota) {
      double sum = 0.0;
      for (double b : row) {
        CHECK(b >= 0.0);
        sum += b;
      }
      CHECK(sum <= cap + 1e-10 * cap);
    }
  }
}

TEST_CASE("single link receives the whole budget") {
  NetworkConfig cfg;
  cfg.num_links = 1;
  const ChannelSet ch = Generate(cfg, 2);
  const AllocationResult pd = RunPrimalDecomposition(ch, 4e-7, AllocatorOptions{});
  CHECK(pd.state.iota[0][0] == doctest::Approx(4e-7).epsilon(1e-12));
  const BcaResult bca = RunCentralized(ch, Budgets{{4e-7}}, BcaOptions{});
  const double u_pd = Utility(ch, pd.profile).sum_u;
  const double u_bca = Utility(ch, bca.profile).sum_u;
  CHECK(std::abs(u_pd - u_bca) <= 1e-8);
  CHECK((pd.profile.Q[0].matrix() - bca.profile.Q[0].matrix()).norm() <= 1e-4 * ch.p_max[0]);
}

namespace {

ChannelSet SymmetricPair(std::uint64_t run, bool coupled) {
  NetworkConfig cfg;
  cfg.num_links = 2;
  ChannelSet ch = Generate(cfg, run);
  ch.H[1][1] = ch.H[0][0];
  if (!coupled) ch.H[0][1].setZero();
  ch.H[1][0] = ch.H[0][1];
  ch.G_hat[0][1] = ch.G_hat[0][0];
  ch.eps[0][1] = ch.eps[0][0];
  (*ch.G_true)[0][1] = (*ch.G_true)[0][0];
  return ch;
}

}  // namespace

TEST_CASE("symmetric decoupled pair splits a binding budget evenly") {
  for (std::uint64_t run = 0; run < 3; ++run) {
    const ChannelSet ch = SymmetricPair(run, false);
    const double cap = 4e-8;
    const AllocationResult res = RunPrimalDecomposition(ch, cap, AllocatorOptions{});
    CHECK(res.masters.front().lambda[0][0] > 0.0);
    CHECK(std::abs(res.state.iota[0][0] - res.state.iota[0][1]) <= 1e-4 * cap);
  }
}

TEST_CASE("symmetric coupled pair may leave the even split when that pays") {
  // With strong cross-coupling and binding budgets, an uneven split can
  // beat the symmetric point; the allocator only has to ascend from it.
  const ChannelSet ch = SymmetricPair(4, true);
  const AllocationResult res = RunPrimalDecomposition(ch, 4e-7, AllocatorOptions{});
  const double even = res.masters.front().sum_utility;
  CHECK(res.masters.back().sum_utility >= even - 1e-8);
  double sum = 0.0;
  for (double b : res.state.iota[0]) sum += b;
  CHECK(sum <= 4e-7 * (1.0 + 1e-10));
}

TEST_CASE("primal decomposition stays feasible and ascends") {
  for (std::uint64_t run = 0; run < 3; ++run) {
    const ChannelSet ch = BaselineInstance(run);
    AllocatorOptions opts;
    opts.max_masters = 30;
    const AllocationResult res = RunPrimalDecomposition(ch, 4e-7, opts);
    for (const auto& m : res.masters) {
      double sum = 0.0;
      for (double b : m.iota[0]) sum += b;
      CHECK(sum <= 4e-7 * (1.0 + 1e-10));
      for (double w : m.aggregate_worst_case) CHECK(w <= 4e-7 * (1.0 + 1e-6));
      for (double l : m.lambda[0]) CHECK(l >= -1e-10);
    }
    for (const auto& c : res.trace.cycles) {
      double sum = 0.0;
      for (double w : c.worst_case_interference[0]) sum += w;
      CHECK(sum <= 4e-7 * (1.0 + 1e-6));
    }
    for (std::size_t n = 1; n < res.trace.cycles.size(); ++n) {
      CHECK(res.trace.cycles[n].sum_utility >= res.trace.cycles[n - 1].sum_utility - 1e-8);
    }
    CHECK(res.log.Count("lambda") == res.log.Count("iota"));
    CHECK(res.log.Count("lambda") >= 4 * res.masters.size());
    const std::string csv = res.BudgetsCsv();
    CHECK(csv.rfind("master_iter,pu,link,iota_w,lambda\n", 0) == 0);
  }
}

TEST_CASE("primal decomposition improves on the equal split") {
  int better = 0;
  const int runs = 6;
  for (int run = 0; run < runs; ++run) {
    const ChannelSet ch = BaselineInstance(50 + static_cast<std::uint64_t>(run));
    const double pd = RunPrimalDecomposition(ch, 4e-7, AllocatorOptions{}).trace.cycles.back().sum_mse;
    const double eq = RunCentralized(ch, EqualSplitBudgets(1, 4, 4e-7), BcaOptions{}).trace.cycles.back().sum_mse;
    if (pd <= eq + 1e-6) ++better;
  }
  CHECK(better >= 5);
}

TEST_CASE("budget multiplier predicts the subproblem sensitivity") {
  int tested = 0;
  for (std::uint64_t run = 0; run < 10; ++run) {
    const ChannelSet ch = BaselineInstance(200 + run);
    Rng rng = MakeStream(9, run, StreamTag::kTest, 8);
    std::vector<HermitianMatrix> Q;
    for (int k = 0; k < 4; ++k) Q.push_back(testing::RandomPsd(rng, 2, 0.3 * ch.p_max[k]));
    for (int k = 0; k < 4; ++k) {
      const double iota = 1e-7;
      const double delta = 1e-4 * 4e-7;
      auto solve = [&](double budget) {
        SubproblemSpec spec;
        spec.link = k;
        spec.mode = SubproblemMode::kBudgeted;
        spec.D = GradientD(ch, Q, k);
        spec.H_kk = ch.H[k][k];
        spec.R_half = HermitianSqrt(InterferenceCovariance(ch, Q, k));
        spec.p_max = ch.p_max[k];
        spec.robust.push_back({ch.G_hat[0][k], ch.eps[0][k], budget});
        spec.interference_scale = iota;
        const AssembledSubproblem a = Assemble(spec);
        const SdpSolution sol = Solve(a.problem, SdpOptions{1e-10, 1e-10, 300});
        REQUIRE(sol.status == SdpStatus::kOptimal);
        return Extract(a, sol);
      };
      const SubproblemResult base = solve(iota);
      const SubproblemResult more = solve(iota + delta);
      const double lambda = base.lambda[0];
      if (lambda * delta < 1e-6) continue;  // constraint not binding
      const double gain = base.objective - more.objective;
      CHECK(gain == doctest::Approx(lambda * delta).epsilon(0.2));
      ++tested;
    }
  }
  CHECK(tested >= 5);
}

TEST_CASE("allocator rejects a nonpositive total budget") {
  const ChannelSet ch = BaselineInstance(0);
  CHECK_THROWS_AS(RunPrimalDecomposition(ch, 0.0, AllocatorOptions{}), Error);
}
