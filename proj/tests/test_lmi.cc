#include <doctest.h>

#include <cmath>

#include "cogbeam/error.h"
#include "cogbeam/lmi.h"
#include "cogbeam/mse.h"
#include "test_helpers.h"

namespace cogbeam {
namespace {

using testing::MaxAbs;
using testing::RandomHermitian;
using testing::RandomPsd;

// min Tr T over T with a fixed Q plugged into the epigraph block.
double MinTraceT(const ComplexMatrix& H, const HermitianMatrix& R, const HermitianMatrix& Q) {
  VariableSpace vars;
  int t_off = 0;
  const AffineMatrix T = vars.AddHermitian(H.rows(), &t_off);
  SdpProblem p;
  p.n = vars.size();
  p.c = RealVector::Zero(p.n);
  for (Index d = 0; d < H.rows(); ++d) p.c(t_off + static_cast<int>(d)) = 1.0;
  p.blocks.push_back(
      ToSdpBlock(MseEpigraphLmi(H, HermitianSqrt(R), AffineMatrix::Constant(Q.matrix()), T)));
  const SdpSolution sol = Solve(p);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  return sol.primal_obj;
}

double MinTraceY(const HermitianMatrix& Q, const HermitianMatrix& prev) {
  VariableSpace vars;
  int y_off = 0;
  const AffineMatrix Y = vars.AddHermitian(Q.dim(), &y_off);
  SdpProblem p;
  p.n = vars.size();
  p.c = RealVector::Zero(p.n);
  for (Index d = 0; d < Q.dim(); ++d) p.c(y_off + static_cast<int>(d)) = 1.0;
  p.blocks.push_back(ToSdpBlock(ProximalLmi(AffineMatrix::Constant(Q.matrix()), prev, Y)));
  const SdpSolution sol = Solve(p);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  return sol.primal_obj;
}

TEST_CASE("hermitian parameterization round trips") {
  Rng rng = MakeStream(21, 0, StreamTag::kTest);
  const HermitianMatrix h = RandomHermitian(rng, 3);
  VariableSpace vars;
  const AffineMatrix q = vars.AddHermitian(3);
  CHECK(vars.size() == 9);
  RealVector x(9);
  int v = 0;
  for (Index d = 0; d < 3; ++d) x(v++) = h(d, d).real();
  for (Index c = 0; c < 3; ++c) {
    for (Index r = 0; r < c; ++r) {
      x(v++) = h(r, c).real();
      x(v++) = h(r, c).imag();
    }
  }
  CHECK(MaxAbs(q.Evaluate(x) - h.matrix()) < 1e-15);
  CHECK(MaxAbs(HermitianFromParams(x, 0, 3).matrix() - h.matrix()) < 1e-15);
}

TEST_CASE("embedded dual mapping preserves inner products") {
  Rng rng = MakeStream(22, 0, StreamTag::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = RandomHermitian(rng, 3);
    const HermitianMatrix zc = RandomPsd(rng, 3);
    const RealMatrix Z = RealEmbedding(zc);
    const HermitianMatrix back = HermitianDual(Z, 3, true);
    const double lhs = (a.matrix() * back.matrix()).trace().real();
    const double rhs = RealEmbedding(a).cwiseProduct(Z).sum();
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
    CHECK(MinEigenvalue(back) >= -1e-12);
  }
}

TEST_CASE("s-procedure with eps = 0 reduces to the nominal trace test") {
  Rng rng = MakeStream(23, 0, StreamTag::kTest);
  const ComplexMatrix g = RandomComplexGaussian(rng, 2, 2, 1.0);
  const HermitianMatrix q = RandomPsd(rng, 2);
  const double nominal = (g * q.matrix() * g.adjoint()).trace().real();
  CHECK(SProcedureMargin(g, 0.0, q, nominal * 1.01).feasible);
  CHECK_FALSE(SProcedureMargin(g, 0.0, q, nominal * 0.99).feasible);
}

TEST_CASE("s-procedure with Q = 0 is feasible at theta = 0") {
  Rng rng = MakeStream(24, 0, StreamTag::kTest);
  const ComplexMatrix g = RandomComplexGaussian(rng, 2, 3, 1.0);
  const SProcedureCheck chk = SProcedureMargin(g, 0.3, HermitianMatrix(3), 1.0);
  CHECK(chk.feasible);
  CHECK(chk.theta == doctest::Approx(0.0));
}

TEST_CASE("s-procedure feasibility agrees with the worst-case oracle") {
  Rng rng = MakeStream(25, 0, StreamTag::kTest);
  int disagreements_outside_band = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index L = 1 + trial % 3;
    const Index M = 1 + (trial / 3) % 3;
    const ComplexMatrix g = RandomComplexGaussian(rng, L, M, 1e-4);
    const HermitianMatrix q = RandomPsd(rng, M, 0.5, 1 + trial % static_cast<int>(M));
    const double eps = 0.3 * std::sqrt(rng.Uniform()) * g.norm();
    const double wc = WorstCaseInterference(g, eps, q).value;
    const double iota = wc * rng.Uniform(0.5, 1.5);
    const bool lmi = SProcedureMargin(g, eps, q, iota).feasible;
    const bool oracle = wc <= iota;
    if (lmi != oracle && std::abs(wc - iota) > 1e-7 * iota) ++disagreements_outside_band;
  }
  CHECK(disagreements_outside_band == 0);
}

TEST_CASE("s-procedure LMI block matches the margin helper at fixed theta") {
  Rng rng = MakeStream(26, 0, StreamTag::kTest);
  const ComplexMatrix g = RandomComplexGaussian(rng, 2, 2, 1.0);
  const HermitianMatrix q = RandomPsd(rng, 2);
  VariableSpace vars;
  const AffineMatrix Q = AffineMatrix::Constant(q.matrix());
  const AffineMatrix theta = vars.AddScalar();
  const AffineMatrix lmi =
      SProcedureLmi(g, 0.2, Q, theta, AffineMatrix::Constant(ComplexMatrix::Constant(1, 1, 3.0)));
  RealVector x(1);
  x(0) = 5.0;
  const ComplexMatrix m = lmi.Evaluate(x);
  CHECK(m.rows() == 5);
  CHECK(MaxAbs(m - m.adjoint()) < 1e-14);
  const double corner = 3.0 - 0.04 * 5.0 - (g * q.matrix() * g.adjoint()).trace().real();
  CHECK(m(4, 4).real() == doctest::Approx(corner));
}

TEST_CASE("mse epigraph at Q = 0 gives N") {
  Rng rng = MakeStream(27, 0, StreamTag::kTest);
  const ComplexMatrix h = RandomComplexGaussian(rng, 3, 2, 1.0);
  const HermitianMatrix r = RandomPsd(rng, 3, 1.0);
  CHECK(MinTraceT(h, r, HermitianMatrix(2)) == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("mse epigraph scalar case") {
  const double p = 2.5;
  const double t = MinTraceT(ComplexMatrix::Ones(1, 1), HermitianMatrix::Identity(1),
                             HermitianMatrix::Identity(1) * p);
  CHECK(t == doctest::Approx(1.0 / (1.0 + p)).epsilon(1e-7));
}

TEST_CASE("mse epigraph matches the direct inverse formula") {
  Rng rng = MakeStream(28, 0, StreamTag::kTest);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix h = RandomComplexGaussian(rng, 2, 2, 1.0);
    const HermitianMatrix r = RandomPsd(rng, 2) + HermitianMatrix::Identity(2) * 0.1;
    const HermitianMatrix q = RandomPsd(rng, 2);
    const ComplexMatrix a = h * q.matrix() * h.adjoint() + r.matrix();
    const double direct = (r.matrix() * a.inverse()).trace().real();
    CHECK(std::abs(MinTraceT(h, r, q) - direct) <= 1e-6);
  }
}

TEST_CASE("proximal block gives the squared distance") {
  Rng rng = MakeStream(29, 0, StreamTag::kTest);
  const HermitianMatrix q = RandomPsd(rng, 2);
  CHECK(std::abs(MinTraceY(q, q)) <= 1e-7);
  CHECK(MinTraceY(HermitianMatrix::Identity(1) * 3.0, HermitianMatrix::Identity(1) * 1.5) ==
        doctest::Approx(2.25).epsilon(1e-7));
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianMatrix a = RandomHermitian(rng, 2);
    const HermitianMatrix b = RandomHermitian(rng, 2);
    const double d2 = (a - b).frobenius_norm() * (a - b).frobenius_norm();
    CHECK(std::abs(MinTraceY(a, b) - d2) <= 1e-7 * (1.0 + d2));
  }
}

SubproblemSpec ScalarSpec(double h, double r, double d, double p_max) {
  SubproblemSpec s;
  s.D = HermitianMatrix::Identity(1) * d;
  s.H_kk = ComplexMatrix::Constant(1, 1, h);
  s.R_half = HermitianMatrix::Identity(1) * std::sqrt(r);
  s.p_max = p_max;
  return s;
}

TEST_CASE("single scalar link matches a grid search") {
  for (double d : {0.0, -0.3, -1.2, -4.0}) {
    const SubproblemSpec spec = ScalarSpec(1.3, 0.7, d, 2.0);
    const AssembledSubproblem a = Assemble(spec);
    const SdpSolution sol = Solve(a.problem);
    REQUIRE(sol.status == SdpStatus::kOptimal);
    const SubproblemResult res = Extract(a, sol);
    double best_q = 0.0;
    double best = 1e300;
    for (int i = 0; i <= 200000; ++i) {
      const double q = 2.0 * i / 200000.0;
      const double f = 0.7 / (1.69 * q + 0.7) - d * q;
      if (f < best) {
        best = f;
        best_q = q;
      }
    }
    CHECK(std::abs(res.Q(0, 0).real() - best_q) <= 1e-4);
    CHECK(std::abs(res.objective - best) <= 1e-7);
  }
}

TEST_CASE("zero budget forces Q = 0 in the scalar case") {
  SubproblemSpec spec = ScalarSpec(1.0, 1.0, 0.0, 1.0);
  spec.mode = SubproblemMode::kBudgeted;
  spec.robust.push_back({ComplexMatrix::Ones(1, 1), 0.1, 0.0});
  spec.interference_scale = 1.0;
  const AssembledSubproblem a = Assemble(spec);
  const SdpSolution sol = Solve(a.problem);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  CHECK(std::abs(Extract(a, sol).Q(0, 0).real()) <= 1e-7);
}

TEST_CASE("scalar robust constraint binds at the closed form") {
  const double g = 0.8;
  const double eps = 0.1;
  const double iota = 0.3;
  SubproblemSpec spec = ScalarSpec(1.0, 1.0, 0.0, 5.0);
  spec.robust.push_back({ComplexMatrix::Constant(1, 1, g), eps, iota});
  const AssembledSubproblem a = Assemble(spec);
  const SdpSolution sol = Solve(a.problem);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  const double expect = std::min(5.0, iota / ((g + eps) * (g + eps)));
  CHECK(Extract(a, sol).Q(0, 0).real() == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("large tau proximal solve reproduces the plain solve") {
  Rng rng = MakeStream(30, 0, StreamTag::kTest);
  SubproblemSpec spec;
  spec.H_kk = RandomComplexGaussian(rng, 2, 2, 1.0);
  spec.R_half = HermitianSqrt(RandomPsd(rng, 2) + HermitianMatrix::Identity(2) * 0.2);
  spec.D = HermitianMatrix(ComplexMatrix(-RandomPsd(rng, 2, 0.3).matrix()));
  spec.p_max = 1.0;
  spec.robust.push_back({RandomComplexGaussian(rng, 2, 2, 1.0), 0.2, 0.5});
  const AssembledSubproblem plain = Assemble(spec);
  const SubproblemResult a = Extract(plain, Solve(plain.problem));
  spec.mode = SubproblemMode::kProximal;
  spec.prev_Q = HermitianMatrix::Identity(2) * 0.25;
  spec.tau = 1e6;
  const AssembledSubproblem prox = Assemble(spec);
  const SubproblemResult b = Extract(prox, Solve(prox.problem));
  CHECK(MaxAbs(a.Q.matrix() - b.Q.matrix()) <= 1e-4);
}

TEST_CASE("assembled solution satisfies the objective identities") {
  Rng rng = MakeStream(31, 0, StreamTag::kTest);
  SubproblemSpec spec;
  const ComplexMatrix h = RandomComplexGaussian(rng, 2, 2, 1.0);
  const HermitianMatrix r = RandomPsd(rng, 2) + HermitianMatrix::Identity(2) * 0.2;
  spec.H_kk = h;
  spec.R_half = HermitianSqrt(r);
  spec.D = HermitianMatrix(ComplexMatrix(-RandomPsd(rng, 2, 0.3).matrix()));
  spec.p_max = 1.0;
  spec.mode = SubproblemMode::kProximal;
  spec.prev_Q = RandomPsd(rng, 2, 0.3);
  spec.tau = 0.1;
  const AssembledSubproblem a = Assemble(spec);
  const SdpSolution sol = Solve(a.problem);
  REQUIRE(sol.status == SdpStatus::kOptimal);
  const SubproblemResult res = Extract(a, sol);
  const ComplexMatrix A = h * res.Q.matrix() * h.adjoint() + r.matrix();
  const double trt = (r.matrix() * A.inverse()).trace().real();
  const double dist = (res.Q - *spec.prev_Q).frobenius_norm();
  const double expect = trt - (spec.D.matrix() * res.Q.matrix()).trace().real() + dist * dist / 0.2;
  CHECK(std::abs(res.objective - expect) <= 1e-6);
}

TEST_CASE("missing fields are named") {
  SubproblemSpec spec = ScalarSpec(1.0, 1.0, 0.0, 1.0);
  spec.mode = SubproblemMode::kProximal;
  try {
    Assemble(spec);
    FAIL("expected InconsistentSpec");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInconsistentSpec);
    CHECK(std::string(e.what()).find("prev_Q") != std::string::npos);
  }
  spec.mode = SubproblemMode::kPlain;
  spec.H_kk.reset();
  CHECK_THROWS_AS(Assemble(spec), Error);
}

TEST_CASE("assembled problems survive the dump format") {
  SubproblemSpec spec = ScalarSpec(1.0, 1.0, -0.2, 1.0);
  spec.mode = SubproblemMode::kBudgeted;
  spec.robust.push_back({ComplexMatrix::Ones(1, 1), 0.1, 0.4});
  const AssembledSubproblem a = Assemble(spec);
  const SdpProblem q = ParseSdp(DumpSdp(a.problem));
  CHECK(Solve(q).x == Solve(a.problem).x);
}

}  // namespace
}  // namespace cogbeam
