#pragma once

#include <Eigen/Dense>

#include "eigenpool/random.hpp"

namespace eigenpool {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite symmetric p x p matrix. The input is symmetrized on construction,
/// so the stored value is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  // Rejects non-square or non-finite input and asymmetry above
  // `tol * max(1, max|m_ij|)`.
  explicit SymMatrix(const Matrix& m, double tol = 1e-8);

  static SymMatrix zeros(int p);
  static SymMatrix identity(int p);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// p x r matrix with orthonormal columns (U_k, V, null-space bases).
class OrthonormalMatrix {
 public:
  static constexpr double kTolerance = 1e-8;

  OrthonormalMatrix() = default;
  // Throws InvalidInput unless max|X^T X - I| <= tol.
  explicit OrthonormalMatrix(const Matrix& x, double tol = kTolerance);

  static OrthonormalMatrix identity(int p);
  // Householder QR with the sign of each R diagonal entry fixed positive, so
  // columns keep their direction when `x` is already close to orthonormal.
  static OrthonormalMatrix orthonormalize(const Matrix& x);

  int rows() const { return static_cast<int>(x_.rows()); }
  int cols() const { return static_cast<int>(x_.cols()); }
  const Matrix& matrix() const { return x_; }
  auto col(int j) const { return x_.col(j); }
  double operator()(int i, int j) const { return x_(i, j); }

  double orthonormality_error() const;

  // Replaces columns j1, j2 with the two columns of `pair`; re-orthonormalizes
  // if the result drifts past kTolerance.
  OrthonormalMatrix replace_pair(int j1, int j2, const Matrix& pair) const;

 private:
  struct Unchecked {};
  OrthonormalMatrix(Matrix x, Unchecked) : x_(std::move(x)) {}
  Matrix x_;
};

/// Non-increasing real vector (eigenvalues, diag(A), diag(B)).
class SpectrumDiag {
 public:
  SpectrumDiag() = default;
  explicit SpectrumDiag(const Vector& values);

  int size() const { return static_cast<int>(v_.size()); }
  const Vector& values() const { return v_; }
  double operator[](int i) const { return v_(i); }

  bool strictly_decreasing() const;
  bool strictly_positive() const;

 private:
  Vector v_;
};

double max_abs_asymmetry(const Matrix& m);
double orthonormality_error(const Matrix& x);

struct EigenDecomposition {
  OrthonormalMatrix vectors;
  SpectrumDiag values;
};

// Flips column signs so the first entry of largest magnitude in each column is
// non-negative.
void canonicalize_signs(Matrix& x);

/// Eigendecomposition m = V diag(lambda) V^T with lambda non-increasing and
/// the canonical column signs. Tied eigenvalues keep the solver's
/// deterministic order.
EigenDecomposition sym_eig(const SymMatrix& m);

/// Orthonormal basis (p x 2) for the orthogonal complement of every column of
/// `u` except j1 and j2, i.e. for span(u_j1, u_j2).
OrthonormalMatrix null_space(const OrthonormalMatrix& u, int j1, int j2);

// Entrywise square; doubly stochastic for square orthonormal input.
Matrix hadamard_square(const OrthonormalMatrix& x);

/// Draw from the uniform (Haar) distribution on O(p): QR of a Gaussian
/// matrix with R's diagonal made positive.
OrthonormalMatrix haar_orthonormal(int p, Rng& rng);

// Diagonal sign matrix S applied on the right: returns x * diag(signs).
OrthonormalMatrix flip_columns(const OrthonormalMatrix& x, const Vector& signs);

}  // namespace eigenpool
