#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cogbeam/error.h"
#include "cogbeam/matrix_core.h"
#include "cogbeam/rng.h"
#include "test_helpers.h"

using namespace cogbeam;
using cogbeam::testing::MaxAbs;
using cogbeam::testing::RandomHermitian;
using cogbeam::testing::RandomPsd;

namespace {

Rng TestRng(std::uint32_t a) { return MakeStream(11, 0, StreamTag::kTest, a); }

}  // namespace

TEST_CASE("vec of a scalar is the scalar") {
  ComplexMatrix m(1, 1);
  m(0, 0) = Complex(2.0, -3.0);
  const ComplexVector v = Vec(m);
  REQUIRE(v.size() == 1);
  CHECK(v(0) == m(0, 0));
}

TEST_CASE("vec stacks columns") {
  ComplexMatrix m(2, 2);
  m << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);
  const ComplexVector v = Vec(m);
  CHECK(v(0) == Complex(1, 0));
  CHECK(v(1) == Complex(3, 0));
  CHECK(v(2) == Complex(2, 0));
  CHECK(v(3) == Complex(4, 0));
  CHECK(MaxAbs(Unvec(v, 2, 2) - m) == 0.0);
}

TEST_CASE("vec of a product matches an index loop") {
  Rng rng = TestRng(1);
  const ComplexMatrix q = RandomComplexGaussian(rng, 2, 2, 1.0);
  const ComplexMatrix g = RandomComplexGaussian(rng, 2, 2, 1.0);
  const ComplexMatrix prod = q.adjoint() * g.adjoint();
  const ComplexVector v = Vec(prod);
  int idx = 0;
  for (Index c = 0; c < 2; ++c) {
    for (Index r = 0; r < 2; ++r, ++idx) {
      Complex acc = 0.0;
      for (Index t = 0; t < 2; ++t) acc += std::conj(q(t, r)) * std::conj(g(c, t));
      CHECK(std::abs(v(idx) - acc) < 1e-14);
    }
  }
}

TEST_CASE("kron with identity factors") {
  ComplexMatrix q(1, 1);
  q(0, 0) = Complex(0.7, 0.0);
  const ComplexMatrix k = Kron(ComplexMatrix::Identity(2, 2), q);
  CHECK(MaxAbs(k - ComplexMatrix(0.7 * ComplexMatrix::Identity(2, 2))) == 0.0);

  Rng rng = TestRng(2);
  const ComplexMatrix a = RandomComplexGaussian(rng, 3, 2, 1.0);
  CHECK(MaxAbs(Kron(ComplexMatrix::Identity(1, 1), a) - a) == 0.0);
}

TEST_CASE("vec and kron trace identity") {
  Rng rng = TestRng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + trial % 4;
    const Index m = 1 + (trial / 4) % 3;
    const ComplexMatrix a = RandomComplexGaussian(rng, n, n, 1.0);
    const ComplexMatrix z = RandomComplexGaussian(rng, n, m, 1.0);
    const Complex lhs = (z.adjoint() * a * z).trace();
    const Complex rhs = (Vec(z).adjoint() * Kron(ComplexMatrix::Identity(m, m), a) * Vec(z))(0, 0);
    const double scale = a.norm() * z.squaredNorm();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
  }
}

TEST_CASE("hermitian construction keeps the hermitian part") {
  Rng rng = TestRng(4);
  const ComplexMatrix a = RandomComplexGaussian(rng, 3, 3, 1.0);
  const HermitianMatrix h(a);
  CHECK(MaxAbs(h.matrix() - h.matrix().adjoint()) == 0.0);
  CHECK(MaxAbs(h.matrix() - ComplexMatrix(0.5 * (a + a.adjoint()))) < 1e-15);
  for (Index i = 0; i < 3; ++i) CHECK(h(i, i).imag() == 0.0);
}

TEST_CASE("hermitian square root examples") {
  CHECK(MaxAbs(HermitianSqrt(HermitianMatrix::Identity(3)).matrix() - ComplexMatrix::Identity(3, 3)) < 1e-15);
  const HermitianMatrix d = HermitianMatrix::Diagonal(Eigen::Vector2d(4.0, 9.0));
  const HermitianMatrix s = HermitianSqrt(d);
  CHECK(std::abs(s(0, 0) - 2.0) < 1e-14);
  CHECK(std::abs(s(1, 1) - 3.0) < 1e-14);
  CHECK(std::abs(s(0, 1)) < 1e-14);
}

TEST_CASE("hermitian square root multiplies back") {
  Rng rng = TestRng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index dim = 1 + trial % 5;
    const HermitianMatrix p = RandomPsd(rng, dim, 1.0, trial % 3 == 0 ? 1 : dim);
    const HermitianMatrix s = HermitianSqrt(p);
    CHECK(MaxAbs(s.matrix() * s.matrix() - p.matrix()) <= 1e-10 * std::max(1.0, MaxAbs(p.matrix())));
    CHECK(MaxAbs(s.matrix() - s.matrix().adjoint()) == 0.0);
    CHECK(MinEigenvalue(s) >= -1e-12 * std::max(1.0, MaxEigenvalue(s)));
  }
}

TEST_CASE("square root of an indefinite matrix is rejected") {
  const HermitianMatrix d = HermitianMatrix::Diagonal(Eigen::Vector2d(1.0, -0.5));
  try {
    HermitianSqrt(d);
    FAIL("expected kNotPsd");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPsd);
  }
}

TEST_CASE("real embedding examples") {
  ComplexMatrix r(1, 1);
  r(0, 0) = 2.5;
  const RealMatrix e1 = RealEmbedding(HermitianMatrix(r));
  CHECK(e1.rows() == 2);
  CHECK(e1(0, 0) == 2.5);
  CHECK(e1(1, 1) == 2.5);
  CHECK(e1(0, 1) == 0.0);
  CHECK(e1(1, 0) == 0.0);

  CHECK((RealEmbedding(HermitianMatrix::Identity(3)) - RealMatrix::Identity(6, 6)).norm() == 0.0);

  ComplexMatrix j(2, 2);
  j << 0.0, Complex(0, 1), Complex(0, -1), 0.0;
  const RealVector ev = SymmetricEigenvalues(RealEmbedding(HermitianMatrix(j)));
  REQUIRE(ev.size() == 4);
  CHECK(ev(0) == doctest::Approx(1.0));
  CHECK(ev(1) == doctest::Approx(1.0));
  CHECK(ev(2) == doctest::Approx(-1.0));
  CHECK(ev(3) == doctest::Approx(-1.0));
}

TEST_CASE("real embedding doubles the spectrum") {
  Rng rng = TestRng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index dim = 1 + trial % 5;
    const HermitianMatrix h = RandomHermitian(rng, dim);
    const RealVector complex_ev = HermitianEig(h).values;
    const RealVector real_ev = SymmetricEigenvalues(RealEmbedding(h));
    for (Index i = 0; i < dim; ++i) {
      CHECK(std::abs(real_ev(2 * i) - complex_ev(i)) <= 1e-10);
      CHECK(std::abs(real_ev(2 * i + 1) - complex_ev(i)) <= 1e-10);
    }
    CHECK(MaxAbs(RealEmbeddingInverse(RealEmbedding(h)).matrix() - h.matrix()) == 0.0);
  }
}

TEST_CASE("eigendecomposition examples") {
  const HermitianEigen d = HermitianEig(HermitianMatrix::Diagonal(Eigen::Vector2d(1.0, 3.0)));
  CHECK(d.values(0) == doctest::Approx(3.0));
  CHECK(d.values(1) == doctest::Approx(1.0));
  const HermitianEigen id = HermitianEig(HermitianMatrix::Identity(4));
  for (Index i = 0; i < 4; ++i) CHECK(id.values(i) == doctest::Approx(1.0));
}

TEST_CASE("eigendecomposition reconstructs random hermitian matrices") {
  Rng rng = TestRng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const HermitianMatrix h = RandomHermitian(rng, 4);
    const HermitianEigen e = HermitianEig(h);
    const ComplexMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK(MaxAbs(rec - h.matrix()) <= 1e-10);
    CHECK(MaxAbs(e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(4, 4)) <= 1e-12);
    for (Index i = 1; i < 4; ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}

TEST_CASE("psd projection and test") {
  const HermitianMatrix d = HermitianMatrix::Diagonal(Eigen::Vector3d(2.0, -1.0, 0.5));
  const HermitianMatrix p = ProjectPsd(d);
  CHECK(p(0, 0).real() == doctest::Approx(2.0));
  CHECK(std::abs(p(1, 1)) < 1e-15);
  CHECK(p(2, 2).real() == doctest::Approx(0.5));
  CHECK_FALSE(IsPsd(d));
  CHECK(IsPsd(p));
  CHECK(IsPsd(HermitianMatrix::Diagonal(Eigen::Vector2d(1.0, -1e-12))));
  CHECK_FALSE(IsPsd(HermitianMatrix::Diagonal(Eigen::Vector2d(1.0, -1e-8))));
}
