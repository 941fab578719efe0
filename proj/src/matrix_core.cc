#include "cogbeam/matrix_core.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "cogbeam/error.h"

namespace cogbeam {

HermitianMatrix::HermitianMatrix(Index dim) : m_(ComplexMatrix::Zero(dim, dim)) {}

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Hermitian matrix must be square");
  }
  m_ = 0.5 * (m + m.adjoint());
  for (Index i = 0; i < m_.rows(); ++i) m_(i, i) = Complex(m_(i, i).real(), 0.0);
}

HermitianMatrix HermitianMatrix::Identity(Index dim) {
  return HermitianMatrix(ComplexMatrix(ComplexMatrix::Identity(dim, dim)));
}

HermitianMatrix HermitianMatrix::Diagonal(const RealVector& d) {
  ComplexMatrix m = ComplexMatrix::Zero(d.size(), d.size());
  for (Index i = 0; i < d.size(); ++i) m(i, i) = d(i);
  return HermitianMatrix(m);
}

HermitianMatrix HermitianMatrix::FromReal(const RealMatrix& m) {
  return HermitianMatrix(ComplexMatrix(m.cast<Complex>()));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  return HermitianMatrix(ComplexMatrix(m_ + o.m_));
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  return HermitianMatrix(ComplexMatrix(m_ - o.m_));
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  return HermitianMatrix(ComplexMatrix(s * m_));
}

ComplexVector Vec(const ComplexMatrix& m) {
  ComplexVector v(m.size());
  Index pos = 0;
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) v(pos++) = m(r, c);
  }
  return v;
}

ComplexMatrix Unvec(const ComplexVector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch, "unvec length mismatch");
  }
  ComplexMatrix m(rows, cols);
  Index pos = 0;
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = v(pos++);
  }
  return m;
}

ComplexMatrix Kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianEigen HermitianEig(const HermitianMatrix& m) {
  // Eigen's self-adjoint solver: Householder tridiagonalization followed by
  // implicit symmetric QL/QR sweeps.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kConvergenceFailure, "Hermitian eigensolver did not converge");
  }
  const Index n = m.dim();
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order.
  for (Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

RealVector SymmetricEigenvalues(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kConvergenceFailure, "symmetric eigensolver did not converge");
  }
  return solver.eigenvalues().reverse();
}

namespace {

HermitianMatrix Reassemble(const HermitianEigen& e, const RealVector& values) {
  ComplexMatrix m = e.vectors * values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  return HermitianMatrix(m);
}

}  // namespace

HermitianMatrix HermitianSqrt(const HermitianMatrix& m) {
  if (m.dim() == 0) return m;
  HermitianEigen e = HermitianEig(m);
  const double radius = e.values.cwiseAbs().maxCoeff();
  const double floor = -kPsdTolerance * radius;
  RealVector roots(e.values.size());
  for (Index i = 0; i < e.values.size(); ++i) {
    const double v = e.values(i);
    if (v < floor) {
      std::ostringstream msg;
      msg << "eigenvalue " << v << " below tolerance " << floor;
      throw Error(ErrorCode::kNotPsd, msg.str());
    }
    roots(i) = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return Reassemble(e, roots);
}

HermitianMatrix ProjectPsd(const HermitianMatrix& m) {
  if (m.dim() == 0) return m;
  HermitianEigen e = HermitianEig(m);
  if (e.values.minCoeff() >= 0.0) return m;
  return Reassemble(e, e.values.cwiseMax(0.0));
}

RealMatrix RealEmbedding(const HermitianMatrix& m) {
  const Index n = m.dim();
  RealMatrix r(2 * n, 2 * n);
  const RealMatrix re = m.matrix().real();
  const RealMatrix im = m.matrix().imag();
  r.topLeftCorner(n, n) = re;
  r.topRightCorner(n, n) = -im;
  r.bottomLeftCorner(n, n) = im;
  r.bottomRightCorner(n, n) = re;
  return r;
}

HermitianMatrix RealEmbeddingInverse(const RealMatrix& r) {
  const Index n = r.rows() / 2;
  const RealMatrix re = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
  const RealMatrix im = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
  ComplexMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(re(i, j), im(i, j));
  }
  return HermitianMatrix(m);
}

double MinEigenvalue(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double MaxEigenvalue(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(m.dim() - 1);
}

bool IsPsd(const HermitianMatrix& m, double rel_tol) {
  if (m.dim() == 0) return true;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double radius = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -rel_tol * radius;
}

}  // namespace cogbeam
