#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "eigenpool/errors.hpp"
#include "eigenpool/matcore.hpp"
#include "stats_util.hpp"

using namespace eigenpool;

namespace {

Matrix random_spd(int p, Rng& rng) {
  Matrix g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
  return g * g.transpose() + 0.1 * Matrix::Identity(p, p);
}

double recon_error(const Matrix& m) {
  const EigenDecomposition e = sym_eig(SymMatrix(m));
  const Matrix& v = e.vectors.matrix();
  return (v * e.values.values().asDiagonal() * v.transpose() - m).norm() / m.norm();
}

}  // namespace

TEST_CASE("SymMatrix validates and symmetrizes") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.0 + 1e-12, 3.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  m(1, 0) = 2.5;
  CHECK_THROWS_AS(SymMatrix{m}, InvalidInput);
  CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), InvalidInput);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{bad}, InvalidInput);
}

TEST_CASE("sym_eig on small closed-form cases") {
  SUBCASE("identity reconstructs") {
    const EigenDecomposition e = sym_eig(SymMatrix::identity(3));
    CHECK(e.values.values().isApprox(Vector::Ones(3)));
    CHECK(recon_error(Matrix::Identity(3, 3)) < 1e-12);
  }
  SUBCASE("diagonal input") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 3.0;
    const EigenDecomposition e = sym_eig(SymMatrix(m));
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(1, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("2x2 closed form") {
    Matrix m(2, 2);
    m << 2.0, 1.0, 1.0, 2.0;
    const EigenDecomposition e = sym_eig(SymMatrix(m));
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    // Sign convention: first maximal-magnitude entry non-negative.
    CHECK(e.vectors(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(e.vectors(1, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("non-finite input is rejected") {
    Matrix m = Matrix::Identity(2, 2);
    m(1, 1) = INFINITY;
    CHECK_THROWS_AS(sym_eig(SymMatrix(m)), InvalidInput);
  }
}

TEST_CASE("sym_eig reconstruction and ordering for random SPD up to p=20") {
  Rng rng(11);
  for (int p = 1; p <= 20; ++p) {
    const Matrix m = random_spd(p, rng);
    CHECK(recon_error(m) < 1e-8);
    const EigenDecomposition e = sym_eig(SymMatrix(m));
    for (int j = 1; j < p; ++j) CHECK(e.values[j] <= e.values[j - 1]);
    for (int j = 0; j < p; ++j) {
      Eigen::Index arg;
      e.vectors.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(e.vectors(static_cast<int>(arg), j) >= 0.0);
    }
  }
}

TEST_CASE("OrthonormalMatrix checks and replace_pair") {
  CHECK_THROWS_AS(OrthonormalMatrix(Matrix::Ones(2, 2)), InvalidInput);
  Rng rng(3);
  const OrthonormalMatrix u = haar_orthonormal(4, rng);
  CHECK(u.orthonormality_error() < 1e-12);
  const OrthonormalMatrix n = null_space(u, 1, 3);
  const double t = 0.7;
  Matrix z(2, 2);
  z << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  const OrthonormalMatrix r = u.replace_pair(1, 3, n.matrix() * z);
  CHECK(r.orthonormality_error() < 1e-12);
  CHECK((r.col(0) - u.col(0)).norm() == 0.0);
  CHECK((r.col(2) - u.col(2)).norm() == 0.0);
}

TEST_CASE("SpectrumDiag requires non-increasing entries") {
  CHECK_NOTHROW(SpectrumDiag((Vector(3) << 3, 3, 1).finished()));
  CHECK_THROWS_AS(SpectrumDiag((Vector(3) << 1, 2, 0).finished()), InvalidInput);
  CHECK_FALSE(SpectrumDiag((Vector(3) << 3, 3, 1).finished()).strictly_decreasing());
  CHECK_FALSE(SpectrumDiag((Vector(2) << 1, 0).finished()).strictly_positive());
}

TEST_CASE("null_space spans the dropped columns") {
  SUBCASE("canonical basis") {
    const OrthonormalMatrix n = null_space(OrthonormalMatrix::identity(4), 0, 1);
    const Matrix proj = n.matrix() * n.matrix().transpose();
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(1, 1) = 1.0;
    CHECK((proj - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("projector identity for random U in O(5)") {
    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
      const OrthonormalMatrix u = haar_orthonormal(5, rng);
      const int j1 = static_cast<int>(rng.index(5));
      int j2 = static_cast<int>(rng.index(4));
      if (j2 >= j1) ++j2;
      const OrthonormalMatrix n = null_space(u, j1, j2);
      CHECK(n.orthonormality_error() < 1e-8);
      Matrix expected = Matrix::Identity(5, 5);
      for (int j = 0; j < 5; ++j) {
        if (j == j1 || j == j2) continue;
        expected -= u.col(j) * u.col(j).transpose();
        CHECK((n.matrix().transpose() * u.col(j)).norm() < 1e-8);
      }
      CHECK((n.matrix() * n.matrix().transpose() - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  SUBCASE("degenerate requests") {
    CHECK_THROWS_AS(null_space(OrthonormalMatrix::identity(3), 1, 1), InvalidInput);
    CHECK_THROWS_AS(null_space(OrthonormalMatrix::identity(3), 0, 3), InvalidInput);
  }
}

TEST_CASE("hadamard_square is doubly stochastic") {
  CHECK(hadamard_square(OrthonormalMatrix::identity(3)).isApprox(Matrix::Identity(3, 3)));
  Matrix r(2, 2);
  const double c = std::cos(std::numbers::pi / 4);
  r << c, -c, c, c;
  CHECK((hadamard_square(OrthonormalMatrix(r)).array() - 0.5).abs().maxCoeff() < 1e-15);
  Rng rng(7);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Matrix m = hadamard_square(haar_orthonormal(6, rng));
    worst = std::max({worst, (m.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                      (m.colwise().sum().array() - 1.0).abs().maxCoeff()});
    CHECK(m.minCoeff() >= 0.0);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("haar_orthonormal distribution checks") {
  Rng rng(13);
  SUBCASE("p=1 is a fair sign") {
    int plus = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) plus += haar_orthonormal(1, rng)(0, 0) > 0 ? 1 : 0;
    CHECK(std::abs(plus - draws / 2.0) < 3.0 * std::sqrt(draws * 0.25));
  }
  SUBCASE("p=2 angle of first column is uniform (KS)") {
    const int draws = 50000;
    std::vector<double> angles;
    for (int i = 0; i < draws; ++i) {
      const OrthonormalMatrix u = haar_orthonormal(2, rng);
      angles.push_back((std::atan2(u(1, 0), u(0, 0)) + std::numbers::pi) / (2 * std::numbers::pi));
    }
    std::sort(angles.begin(), angles.end());
    double d = 0.0;
    for (int i = 0; i < draws; ++i) {
      d = std::max({d, std::abs(angles[i] - static_cast<double>(i) / draws),
                    std::abs(angles[i] - static_cast<double>(i + 1) / draws)});
    }
    CHECK(d < 1.63 / std::sqrt(draws));  // 1% critical value
  }
  SUBCASE("p=3 E[(e1^T u1)^2] = 1/3") {
    std::vector<double> x;
    for (int i = 0; i < 30000; ++i) x.push_back(std::pow(haar_orthonormal(3, rng)(0, 0), 2));
    CHECK(std::abs(testutil::mean(x) - 1.0 / 3.0) < 3.0 * testutil::iid_se(x));
  }
  SUBCASE("left invariance of the (1,1) entry, two-sample KS") {
    const OrthonormalMatrix q = haar_orthonormal(4, rng);
    const int draws = 50000;
    std::vector<double> a, b;
    for (int i = 0; i < draws; ++i) {
      a.push_back(std::pow(haar_orthonormal(4, rng)(0, 0), 2));
      const Matrix qx = q.matrix() * haar_orthonormal(4, rng).matrix();
      b.push_back(qx(0, 0) * qx(0, 0));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] <= b[j]) ++i; else ++j;
      d = std::max(d, std::abs(static_cast<double>(i) / draws - static_cast<double>(j) / draws));
    }
    CHECK(d < 1.63 * std::sqrt(2.0 / draws));
  }
}

TEST_CASE("flip_columns and canonicalize_signs") {
  Rng rng(17);
  const OrthonormalMatrix u = haar_orthonormal(3, rng);
  const OrthonormalMatrix f = flip_columns(u, (Vector(3) << -1, 1, -1).finished());
  CHECK((f.col(0) + u.col(0)).norm() == 0.0);
  CHECK((f.col(1) - u.col(1)).norm() == 0.0);
  Matrix a = f.matrix();
  Matrix b = u.matrix();
  canonicalize_signs(a);
  canonicalize_signs(b);
  CHECK((a - b).norm() == 0.0);
}
