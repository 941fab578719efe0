#include <doctest.h>

#include <cmath>

#include "cogbeam/error.h"
#include "cogbeam/rng.h"
#include "cogbeam/sdp.h"

namespace cogbeam {
namespace {

SdpProblem ScalarLowerBound() {
  // minimize x s.t. [x - 1] >= 0
  SdpProblem p;
  p.n = 1;
  p.c = RealVector::Ones(1);
  SdpBlock b;
  b.size = 1;
  b.F0 = RealMatrix::Constant(1, 1, -1.0);
  b.terms.emplace_back(0, RealMatrix::Ones(1, 1));
  p.blocks.push_back(b);
  return p;
}

// minimize <C, X> s.t. X >= 0, Tr X = 1 written as two inequalities.
SdpProblem MinEigenvalueProblem(const RealMatrix& C) {
  const Index s = C.rows();
  SdpProblem p;
  p.n = static_cast<int>(s * (s + 1) / 2);
  p.c = RealVector::Zero(p.n);
  SdpBlock b;
  b.size = s;
  b.F0 = RealMatrix::Zero(s, s);
  RealVector tr = RealVector::Zero(p.n);
  int v = 0;
  for (Index c = 0; c < s; ++c) {
    for (Index r = 0; r <= c; ++r, ++v) {
      RealMatrix e = RealMatrix::Zero(s, s);
      e(r, c) = 1.0;
      e(c, r) = 1.0;
      p.c(v) = C.cwiseProduct(e).sum();
      if (r == c) tr(v) = 1.0;
      b.terms.emplace_back(v, e);
    }
  }
  p.blocks.push_back(b);
  p.linear.push_back({tr, 1.0, false});
  p.linear.push_back({-tr, -1.0, false});
  return p;
}

RealMatrix RandomSymmetric(Rng& rng, Index s) {
  RealMatrix a(s, s);
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < s; ++j) a(i, j) = rng.Normal();
  }
  return 0.5 * (a + a.transpose());
}

TEST_CASE("scalar lower bound is attained") {
  const SdpSolution sol = Solve(ScalarLowerBound());
  REQUIRE(sol.status == SdpStatus::kOptimal);
  CHECK(std::abs(sol.x(0) - 1.0) <= 1e-7);
  CHECK(sol.block_duals[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("contradictory constraints are reported infeasible") {
  SdpProblem p = ScalarLowerBound();
  p.linear.push_back({RealVector::Ones(1), 0.0, false});
  const SdpSolution sol = Solve(p);
  CHECK(sol.status == SdpStatus::kInfeasible);
}

TEST_CASE("unbounded direction is reported") {
  SdpProblem p = ScalarLowerBound();
  p.c(0) = -1.0;
  const SdpSolution sol = Solve(p);
  CHECK(sol.status == SdpStatus::kUnbounded);
}

TEST_CASE("min eigenvalue family matches the eigen oracle") {
  Rng rng = MakeStream(11, 0, StreamTag::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const RealMatrix C = RandomSymmetric(rng, 4);
    const SdpProblem p = MinEigenvalueProblem(C);
    const SdpSolution sol = Solve(p);
    REQUIRE(sol.status == SdpStatus::kOptimal);
    const double lmin = SymmetricEigenvalues(C).minCoeff();
    CHECK(std::abs(sol.primal_obj - lmin) <= 1e-7);
    CHECK(sol.gap <= 1e-8);
    CHECK_NOTHROW(CheckCertificate(p, sol));
  }
}

TEST_CASE("corrupted solution fails the certificate") {
  const SdpProblem p = ScalarLowerBound();
  SdpSolution sol = Solve(p);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  sol.x(0) += 1e-3;
  try {
    CheckCertificate(p, sol);
    FAIL("expected certificate failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCertificateFailure);
  }
}

TEST_CASE("linear duals are nonnegative and match sensitivity") {
  // minimize -x s.t. x <= 2 and [x + 5] >= 0: dual of the row is 1.
  SdpProblem p;
  p.n = 1;
  p.c = -RealVector::Ones(1);
  SdpBlock b;
  b.size = 1;
  b.F0 = RealMatrix::Constant(1, 1, 5.0);
  b.terms.emplace_back(0, RealMatrix::Ones(1, 1));
  p.blocks.push_back(b);
  p.linear.push_back({RealVector::Ones(1), 2.0, true});
  const SdpSolution sol = Solve(p);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  CHECK(sol.x(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(sol.linear_duals(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("variable rescaling leaves the solution invariant") {
  Rng rng = MakeStream(12, 0, StreamTag::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const RealMatrix C = RandomSymmetric(rng, 3);
    SdpProblem p = MinEigenvalueProblem(C);
    const SdpSolution base = Solve(p);
    const int i = trial % p.n;
    const double s = 7.5;
    p.c(i) *= s;
    for (auto& [var, mat] : p.blocks[0].terms) {
      if (var == i) mat *= s;
    }
    for (auto& row : p.linear) row.a(i) *= s;
    const SdpSolution scaled = Solve(p);
    REQUIRE(scaled.status == SdpStatus::kOptimal);
    CHECK(std::abs(scaled.x(i) * s - base.x(i)) <= 1e-6);
    CHECK(std::abs(scaled.primal_obj - base.primal_obj) <= 1e-7);
  }
}

TEST_CASE("weak duality at the returned iterate") {
  Rng rng = MakeStream(13, 0, StreamTag::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    SdpOptions opts;
    opts.max_iter = 1 + trial % 8;
    const SdpProblem p = MinEigenvalueProblem(RandomSymmetric(rng, 3));
    const SdpSolution sol = Solve(p, opts);
    if (sol.status == SdpStatus::kOptimal) {
      CHECK(sol.primal_obj >= sol.dual_obj - 1e-12 * (1.0 + std::abs(sol.primal_obj)));
    }
  }
}

TEST_CASE("dump format round trips") {
  Rng rng = MakeStream(14, 0, StreamTag::kTest);
  SdpProblem p = MinEigenvalueProblem(RandomSymmetric(rng, 3));
  p.linear[0].want_dual = true;
  const std::string text = DumpSdp(p);
  const SdpProblem q = ParseSdp(text);
  CHECK(DumpSdp(q) == text);
  const SdpSolution a = Solve(p);
  const SdpSolution b = Solve(q);
  CHECK(a.x == b.x);
}

TEST_CASE("malformed dump is rejected with a line number") {
  try {
    ParseSdp("cogbeam-sdp 1\nn 1\nc 1\nblock 1 1\n0 0 5 1.0\nend\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
  }
}

}  // namespace
}  // namespace cogbeam
