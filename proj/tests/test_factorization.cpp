#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"
#include "test_util.hpp"

using namespace pukf;
using test::random_matrix;
using test::random_spd;
using test::random_vector;

TEST_CASE("cholesky_lower basic cases") {
  CHECK((cholesky_lower(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);

  Matrix d(2, 2);
  d << 4.0, 0.0, 0.0, 9.0;
  Matrix expect(2, 2);
  expect << 2.0, 0.0, 0.0, 3.0;
  CHECK((cholesky_lower(d) - expect).norm() == doctest::Approx(0.0));

  Matrix p(2, 2);
  p << 2.0, 1.0, 1.0, 1.0;
  const Matrix l = cholesky_lower(p);
  CHECK((l * l.transpose() - p).norm() <= 1e-12 * p.norm());
  CHECK(l(0, 1) == 0.0);
}

TEST_CASE("cholesky_lower rejects indefinite input without repair") {
  Matrix p(2, 2);
  p << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  CHECK_THROWS_AS(cholesky_lower(p), NotPositiveDefinite);
  CHECK_THROWS_AS(cholesky_lower(Matrix::Zero(2, 2)), NotPositiveDefinite);
}

TEST_CASE("udu_decompose hand cases") {
  const UdFactors id = udu_decompose(Matrix::Identity(2, 2));
  CHECK((id.U - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK((id.d - Vector::Ones(2)).norm() == 0.0);

  Matrix p(2, 2);
  p << 2.0, 1.0, 1.0, 1.0;
  const UdFactors f = udu_decompose(p);
  CHECK(f.U(0, 1) == doctest::Approx(1.0));
  CHECK(f.d(0) == doctest::Approx(1.0));
  CHECK(f.d(1) == doctest::Approx(1.0));
  CHECK((f.reconstruct() - p).norm() <= 1e-12 * p.norm());

  Vector diag(3);
  diag << 5.0, 3.0, 1.0;
  const UdFactors fd = udu_decompose(Matrix(diag.asDiagonal()));
  CHECK((fd.U - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK((fd.d - diag).norm() == 0.0);
}

TEST_CASE("udu_decompose flags negative pivots") {
  Matrix p(2, 2);
  p << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(udu_decompose(p), NotPositiveSemiDefinite);
}

TEST_CASE("udu_decompose tolerates PSD rank deficiency") {
  // Rank-1 PSD matrix: bottom-right pivot handling must not divide by zero.
  Vector v(3);
  v << 1.0, 2.0, 0.0;
  const Matrix p = v * v.transpose();
  const UdFactors f = udu_decompose(p);
  CHECK((f.reconstruct() - p).norm() <= 1e-10 * std::max(1.0, p.norm()));
  for (Index i = 0; i < 3; ++i) CHECK(f.U(i, i) == 1.0);
}

TEST_CASE("symmetric_sqrt") {
  Vector diag(2);
  diag << 4.0, 9.0;
  const Matrix m = symmetric_sqrt(Matrix(diag.asDiagonal()));
  CHECK((m - Vector(diag.cwiseSqrt()).asDiagonal().toDenseMatrix()).norm() <= 1e-12);

  CHECK(symmetric_sqrt(Matrix::Zero(3, 3)).norm() == 0.0);

  Rng rng(17);
  const Matrix q = random_spd(rng, 4);
  const Matrix s = symmetric_sqrt(q);
  CHECK((s * s.transpose() - q).norm() <= 1e-10 * q.norm());

  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(symmetric_sqrt(bad), NegativeEigenvalue);
}

TEST_CASE("mgs_triangularize") {
  // [I ; 0] -> I
  Matrix m(5, 3);
  m.setZero();
  m.topRows(3) = Matrix::Identity(3, 3);
  CHECK((mgs_triangularize(m) - Matrix::Identity(3, 3)).norm() <= 1e-14);

  // single column [3;4] -> [5]
  Matrix col(2, 1);
  col << 3.0, 4.0;
  CHECK(mgs_triangularize(col)(0, 0) == doctest::Approx(5.0));

  Rng rng(3);
  const Matrix tall = random_matrix(rng, 6, 3);
  const Matrix w = mgs_triangularize(tall);
  CHECK((w.transpose() * w - tall.transpose() * tall).norm() <=
        1e-12 * (tall.transpose() * tall).norm());
  // upper triangular, non-negative diagonal
  for (Index i = 0; i < 3; ++i) {
    CHECK(w(i, i) >= 0.0);
    for (Index j = 0; j < i; ++j) CHECK(w(i, j) == 0.0);
  }
}

TEST_CASE("mgs_triangularize zero-rank columns give zero rows") {
  Matrix m(4, 2);
  m.setZero();
  m.col(0) << 1.0, 1.0, 0.0, 0.0;
  // second column identical: rank 1
  m.col(1) = m.col(0);
  const Matrix w = mgs_triangularize(m);
  CHECK(w(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("mgs gram preservation on 200 random tall matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 6);
    const Index r = static_cast<Index>(rng.next_u64() % 5);
    const Matrix m = random_matrix(rng, n + r, n);
    const Matrix w = mgs_triangularize(m);
    const Matrix gram = m.transpose() * m;
    CHECK((w.transpose() * w - gram).norm() <= 1e-10 * std::max(1.0, gram.norm()));
  }
}

TEST_CASE("wmgs hand cases") {
  // W = [I 0] with weights [d, q] keeps (I, d).
  Matrix w(2, 4);
  w.setZero();
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  Vector dhat(4);
  dhat << 2.0, 3.0, 7.0, 9.0;
  const UdFactors f = wmgs(w, dhat);
  CHECK((f.U - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(f.d(0) == doctest::Approx(2.0));
  CHECK(f.d(1) == doctest::Approx(3.0));

  // n = 1: W = [1 1], dhat = [2 3] -> dbar = 5.
  Matrix w1(1, 2);
  w1 << 1.0, 1.0;
  Vector d1(2);
  d1 << 2.0, 3.0;
  const UdFactors f1 = wmgs(w1, d1);
  CHECK(f1.d(0) == doctest::Approx(5.0));
}

TEST_CASE("wmgs weighted-gram preservation on 200 random inputs") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 5);
    const Index q = static_cast<Index>(rng.next_u64() % 4);
    const Matrix w = random_matrix(rng, n, n + q);
    Vector dhat(n + q);
    for (Index i = 0; i < n + q; ++i) dhat(i) = 0.1 + rng.uniform();
    const UdFactors f = wmgs(w, dhat);
    const Matrix expect = w * dhat.asDiagonal() * w.transpose();
    CHECK((f.reconstruct() - expect).norm() <= 1e-10 * std::max(1.0, expect.norm()));
    for (Index i = 0; i < n; ++i) CHECK(f.U(i, i) == 1.0);
  }
}

TEST_CASE("wmgs zero weighted norm resolves to zero entries") {
  Matrix w(2, 2);
  w << 1.0, 1.0, 1.0, 1.0;
  const Vector dhat = Vector::Zero(2);
  const UdFactors f = wmgs(w, dhat);
  CHECK(f.d.norm() == 0.0);
  CHECK(f.U(0, 1) == 0.0);
}

TEST_CASE("condition_number") {
  CHECK(condition_number(Matrix::Identity(4, 4)) == doctest::Approx(1.0));
  Vector d(2);
  d << 100.0, 1.0;
  CHECK(condition_number(Matrix(d.asDiagonal())) == doctest::Approx(100.0));
  CHECK(std::isinf(condition_number(Matrix::Zero(2, 2))));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = random_spd(rng, 5, 0.01);
    const Matrix s = cholesky_lower(p);
    const double ks = condition_number(s);
    const double kp = condition_number(p);
    CHECK(std::abs(ks * ks - kp) <= 1e-6 * kp);
  }
}

TEST_CASE("decorrelate_cholesky") {
  Rng rng(7);
  const Matrix h = random_matrix(rng, 2, 4);
  const Vector r = random_vector(rng, 2);

  const DecorrelatedMeasurement same = decorrelate_cholesky(Matrix::Identity(2, 2), h, r);
  CHECK((same.H - h).norm() == 0.0);
  CHECK((same.r - r).norm() == 0.0);

  Vector d(2);
  d << 4.0, 9.0;
  Vector r2(2);
  r2 << 2.0, 3.0;
  const DecorrelatedMeasurement sc =
      decorrelate_cholesky(Matrix(d.asDiagonal()), Matrix::Identity(2, 2), r2);
  CHECK(sc.H(0, 0) == doctest::Approx(0.5));
  CHECK(sc.H(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(sc.r(0) == doctest::Approx(1.0));
  CHECK(sc.r(1) == doctest::Approx(1.0));

  Matrix rc(2, 2);
  rc << 2.0, 1.0, 1.0, 1.0;
  const Matrix s_r = cholesky_lower(rc);
  const Matrix white = s_r.triangularView<Eigen::Lower>().solve(
      rc * s_r.triangularView<Eigen::Lower>().solve(Matrix::Identity(2, 2)).transpose());
  CHECK((white - Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("decorrelate_ud") {
  Rng rng(9);
  Vector d(2);
  d << 5.0, 2.0;
  const Matrix h = random_matrix(rng, 2, 3);
  const Vector r = random_vector(rng, 2);
  const UdDecorrelatedMeasurement diag = decorrelate_ud(Matrix(d.asDiagonal()), h, r);
  CHECK((diag.H - h).norm() == 0.0);
  CHECK((diag.d_r - d).norm() == 0.0);

  Matrix rc(2, 2);
  rc << 2.0, 1.0, 1.0, 1.0;
  const UdDecorrelatedMeasurement f = decorrelate_ud(rc, h, r);
  CHECK(f.d_r(0) == doctest::Approx(1.0));
  CHECK(f.d_r(1) == doctest::Approx(1.0));

  // U_r^{-1} R U_r^{-T} diagonal for random SPD R.
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix rnd = random_spd(rng, 3);
    const UdDecorrelatedMeasurement g =
        decorrelate_ud(rnd, Matrix::Identity(3, 3), Vector::Zero(3));
    const Matrix transformed = g.H * rnd * g.H.transpose();
    Matrix off = transformed;
    off.diagonal().setZero();
    CHECK(off.norm() <= 1e-12 * rnd.norm());
  }
}

TEST_CASE("decorrelation preserves information content") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix r_cov = random_spd(rng, 3, 0.2);
    const Matrix h = random_matrix(rng, 3, 4);
    const Vector r = random_vector(rng, 3);
    const Matrix info = h.transpose() * r_cov.inverse() * h;

    const DecorrelatedMeasurement c = decorrelate_cholesky(r_cov, h, r);
    const Matrix info_c = c.H.transpose() * c.H;
    CHECK((info_c - info).norm() <= 1e-8 * std::max(1.0, info.norm()));

    const UdDecorrelatedMeasurement u = decorrelate_ud(r_cov, h, r);
    const Matrix info_u = u.H.transpose() * u.d_r.cwiseInverse().asDiagonal() * u.H;
    CHECK((info_u - info).norm() <= 1e-8 * std::max(1.0, info.norm()));
  }
}

TEST_CASE("cholesky and udu reconstruct random SPD up to n=12") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 12);
    const Matrix p = random_spd(rng, n, 0.1);
    const Matrix l = cholesky_lower(p);
    CHECK((l * l.transpose() - p).norm() <= 1e-10 * p.norm());
    const UdFactors f = udu_decompose(p);
    CHECK((f.reconstruct() - p).norm() <= 1e-10 * p.norm());
    for (Index i = 0; i < n; ++i) CHECK(f.U(i, i) == 1.0);
  }
}

TEST_CASE("covariance representations convert between forms") {
  Rng rng(31);
  const Matrix p = random_spd(rng, 4);
  GaussianBelief belief{random_vector(rng, 4), p};
  CHECK(covariance_form(belief.cov) == CovForm::Full);
  CHECK(covariance_dim(belief.cov) == 4);

  for (CovForm form : {CovForm::SquareRoot, CovForm::Ud, CovForm::Full}) {
    const Covariance converted = convert_covariance(belief.cov, form);
    CHECK(covariance_form(converted) == form);
    CHECK((covariance_matrix(converted) - p).norm() <= 1e-10 * p.norm());
  }
}
