#include "eigenpool/matcore.hpp"

#include <cmath>
#include <string>

#include "eigenpool/errors.hpp"

namespace eigenpool {

double max_abs_asymmetry(const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

double orthonormality_error(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  const Matrix gram = x.transpose() * x;
  return (gram - Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
}

SymMatrix::SymMatrix(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw InvalidInput("SymMatrix: matrix is not square");
  if (m.size() > 0 && !m.allFinite()) throw InvalidInput("SymMatrix: non-finite entries");
  if (m.size() > 0) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (max_abs_asymmetry(m) > tol * scale) throw InvalidInput("SymMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zeros(int p) { return SymMatrix(Matrix::Zero(p, p)); }

SymMatrix SymMatrix::identity(int p) { return SymMatrix(Matrix::Identity(p, p)); }

OrthonormalMatrix::OrthonormalMatrix(const Matrix& x, double tol) : x_(x) {
  if (x.cols() > x.rows()) throw InvalidInput("OrthonormalMatrix: more columns than rows");
  if (x.size() > 0 && !x.allFinite()) throw InvalidInput("OrthonormalMatrix: non-finite entries");
  const double err = eigenpool::orthonormality_error(x);
  if (err > tol) {
    throw InvalidInput("OrthonormalMatrix: columns are not orthonormal (max |X^T X - I| = " +
                       std::to_string(err) + ")");
  }
}

OrthonormalMatrix OrthonormalMatrix::identity(int p) {
  return OrthonormalMatrix(Matrix::Identity(p, p), Unchecked{});
}

OrthonormalMatrix OrthonormalMatrix::orthonormalize(const Matrix& x) {
  if (x.cols() > x.rows()) throw InvalidInput("orthonormalize: more columns than rows");
  if (!x.allFinite()) throw InvalidInput("orthonormalize: non-finite entries");
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (r(j, j) == 0.0) throw InvalidInput("orthonormalize: rank-deficient input");
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return OrthonormalMatrix(std::move(q), Unchecked{});
}

double OrthonormalMatrix::orthonormality_error() const { return eigenpool::orthonormality_error(x_); }

OrthonormalMatrix OrthonormalMatrix::replace_pair(int j1, int j2, const Matrix& pair) const {
  if (pair.rows() != x_.rows() || pair.cols() != 2) throw InvalidInput("replace_pair: pair must be p x 2");
  Matrix out = x_;
  out.col(j1) = pair.col(0);
  out.col(j2) = pair.col(1);
  if (eigenpool::orthonormality_error(out) > kTolerance) return orthonormalize(out);
  return OrthonormalMatrix(std::move(out), Unchecked{});
}

SpectrumDiag::SpectrumDiag(const Vector& values) : v_(values) {
  if (!values.allFinite()) throw InvalidInput("SpectrumDiag: non-finite entries");
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(i - 1)) throw InvalidInput("SpectrumDiag: values are not non-increasing");
  }
}

bool SpectrumDiag::strictly_decreasing() const {
  for (Eigen::Index i = 1; i < v_.size(); ++i) {
    if (!(v_(i) < v_(i - 1))) return false;
  }
  return true;
}

bool SpectrumDiag::strictly_positive() const { return v_.size() == 0 || v_.minCoeff() > 0.0; }

void canonicalize_signs(Matrix& x) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (std::abs(x(i, j)) > best) {
        best = std::abs(x(i, j));
        arg = i;
      }
    }
    if (x(arg, j) < 0.0) x.col(j) = -x.col(j);
  }
}

EigenDecomposition sym_eig(const SymMatrix& m) {
  const int p = m.dim();
  if (p == 0) throw InvalidInput("sym_eig: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix());
  if (solver.info() != Eigen::Success) throw NumericalFailure("sym_eig: eigensolver did not converge");
  // The solver returns ascending order; reverse to non-increasing.
  Matrix vectors = solver.eigenvectors().rowwise().reverse();
  Vector values = solver.eigenvalues().reverse();
  canonicalize_signs(vectors);
  return {OrthonormalMatrix(vectors), SpectrumDiag(values)};
}

OrthonormalMatrix null_space(const OrthonormalMatrix& u, int j1, int j2) {
  const int p = u.rows();
  if (u.cols() != p) throw InvalidInput("null_space: input must be square");
  if (j1 == j2) throw InvalidInput("null_space: column indices must differ");
  if (j1 < 0 || j2 < 0 || j1 >= p || j2 >= p) throw InvalidInput("null_space: column index out of range");

  Matrix basis(p, 2);
  basis.col(0) = u.col(j1);
  basis.col(1) = u.col(j2);
  // Two passes of modified Gram-Schmidt against the retained columns.
  for (int pass = 0; pass < 2; ++pass) {
    for (int c = 0; c < 2; ++c) {
      for (int j = 0; j < p; ++j) {
        if (j == j1 || j == j2) continue;
        basis.col(c) -= u.col(j).dot(basis.col(c)) * u.col(j);
      }
      if (c == 1) basis.col(1) -= basis.col(0).dot(basis.col(1)) * basis.col(0);
      const double norm = basis.col(c).norm();
      if (!(norm > 1e-6)) throw InvalidInput("null_space: degenerate input");
      basis.col(c) /= norm;
    }
  }
  return OrthonormalMatrix(basis);
}

Matrix hadamard_square(const OrthonormalMatrix& x) { return x.matrix().array().square().matrix(); }

OrthonormalMatrix haar_orthonormal(int p, Rng& rng) {
  if (p < 1) throw InvalidInput("haar_orthonormal: dimension must be positive");
  Matrix g(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  }
  return OrthonormalMatrix::orthonormalize(g);
}

OrthonormalMatrix flip_columns(const OrthonormalMatrix& x, const Vector& signs) {
  if (signs.size() != x.cols()) throw InvalidInput("flip_columns: sign vector length mismatch");
  return OrthonormalMatrix(x.matrix() * signs.asDiagonal());
}

}  // namespace eigenpool
