#ifndef COGBEAM_MATRIX_CORE_H_
#define COGBEAM_MATRIX_CORE_H_

#include <complex>

#include <Eigen/Dense>

namespace cogbeam {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative PSD tolerance (fraction of the spectral radius).
inline constexpr double kPsdTolerance = 1e-10;

// Dense Hermitian matrix. Construction from an arbitrary square matrix keeps
// its Hermitian part, so the stored entries always satisfy a(i,j) ==
// conj(a(j,i)) and the diagonal is exactly real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Index dim);
  explicit HermitianMatrix(const ComplexMatrix& m);

  static HermitianMatrix Identity(Index dim);
  static HermitianMatrix Diagonal(const RealVector& d);
  static HermitianMatrix FromReal(const RealMatrix& m);

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  ComplexMatrix m_;
};

struct HermitianEigen {
  RealVector values;       // descending
  ComplexMatrix vectors;   // columns are orthonormal eigenvectors
};

// Column-stacking vectorization.
ComplexVector Vec(const ComplexMatrix& m);

// Inverse of Vec for a rows x cols matrix.
ComplexMatrix Unvec(const ComplexVector& v, Index rows, Index cols);

ComplexMatrix Kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Throws kConvergenceFailure if the QL iteration does not converge.
HermitianEigen HermitianEig(const HermitianMatrix& m);

// Eigenvalues of a real symmetric matrix, descending.
RealVector SymmetricEigenvalues(const RealMatrix& m);

// PSD square root; eigenvalues down to -kPsdTolerance * spectral radius are
// clipped to zero, anything more negative throws kNotPsd.
HermitianMatrix HermitianSqrt(const HermitianMatrix& m);

// Projection onto the PSD cone (negative eigenvalues set to zero).
HermitianMatrix ProjectPsd(const HermitianMatrix& m);

// [[Re m, -Im m], [Im m, Re m]]; m >= 0 iff the result is >= 0.
RealMatrix RealEmbedding(const HermitianMatrix& m);

// Reads back the Hermitian matrix encoded in a 2n x 2n real matrix by
// averaging the two copies of the real and imaginary blocks.
HermitianMatrix RealEmbeddingInverse(const RealMatrix& r);

double MinEigenvalue(const HermitianMatrix& m);
double MaxEigenvalue(const HermitianMatrix& m);

bool IsPsd(const HermitianMatrix& m, double rel_tol = kPsdTolerance);

}  // namespace cogbeam

#endif  // COGBEAM_MATRIX_CORE_H_
