#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pukf/errors.hpp"
#include "pukf/factorization.hpp"
#include "pukf/filter_core.hpp"
#include "pukf/ud_filter.hpp"
#include "test_util.hpp"

using namespace pukf;
using test::random_matrix;
using test::random_spd;
using test::random_vector;

TEST_CASE("ud_propagate") {
  Rng rng(1);
  // F = I, Q = 0: factors unchanged.
  {
    const UdFactors f = udu_decompose(random_spd(rng, 3));
    const UdFactors out = ud_propagate(f, Matrix::Identity(3, 3), Matrix::Identity(3, 3),
                                       Matrix::Zero(3, 3));
    CHECK((out.reconstruct() - f.reconstruct()).norm() <= 1e-12 * f.reconstruct().norm());
  }
  // scalar U = 1, d = 1, F = 2, Q = 1 -> dbar = 5
  {
    const UdFactors post{Matrix::Identity(1, 1), Vector::Ones(1)};
    const UdFactors out = ud_propagate(post, Matrix::Constant(1, 1, 2.0),
                                       Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    CHECK(out.U(0, 0) == 1.0);
    CHECK(out.d(0) == doctest::Approx(5.0));
  }
  // random systems (incl. non-diagonal Q) reconstruct the full form
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 4);
    const Index q = 1 + static_cast<Index>(rng.next_u64() % 3);
    const Matrix p = random_spd(rng, n);
    const Matrix f = random_matrix(rng, n, n);
    const Matrix g = random_matrix(rng, n, q);
    const Matrix qm = trial % 2 == 0 ? random_spd(rng, q, 0.2)
                                     : Matrix(random_vector(rng, q).cwiseAbs().asDiagonal());
    const UdFactors out = ud_propagate(udu_decompose(p), f, g, qm);
    const Matrix expect = f * p * f.transpose() + g * qm * g.transpose();
    CHECK((out.reconstruct() - expect).norm() <= 1e-9 * expect.norm());
    for (Index i = 0; i < n; ++i) CHECK(out.U(i, i) == 1.0);
  }
}

TEST_CASE("ud_gain") {
  // scalar U=1, d=1, H=1, R=1 -> w=1, A=0.5, K=0.5
  {
    const UdFactors prior{Matrix::Identity(1, 1), Vector::Ones(1)};
    const UdGain g = ud_gain(prior, Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    CHECK(g.w_bar(0, 0) == doctest::Approx(1.0));
    CHECK(g.A(0, 0) == doctest::Approx(0.5));
    CHECK(g.K(0, 0) == doctest::Approx(0.5));
  }
  // H = 0 -> K = 0
  {
    const UdFactors prior = udu_decompose(Matrix::Identity(3, 3));
    const UdGain g = ud_gain(prior, Matrix::Zero(1, 3), Matrix::Identity(1, 1));
    CHECK(g.K.norm() == 0.0);
  }
  // random: matches kalman_gain on the reconstructed covariance
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 3, m = 2;
    const Matrix p = random_spd(rng, n);
    const Matrix h = random_matrix(rng, m, n);
    const Matrix r = random_spd(rng, m, 0.4);
    const UdGain g = ud_gain(udu_decompose(p), h, r);
    const GainResult oracle = kalman_gain(p, h, r);
    CHECK((g.K - oracle.K).norm() <= 1e-9 * std::max(1.0, oracle.K.norm()));
  }
}

TEST_CASE("ud_partial_update endpoints and reconstruction") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.next_u64() % 4);
    const Matrix p_minus = random_spd(rng, n);
    const UdFactors prior = udu_decompose(p_minus);
    const Matrix h = random_matrix(rng, 1, n);
    const Matrix r = Matrix::Constant(1, 1, 0.3 + rng.uniform());
    const Vector x_minus = random_vector(rng, n);
    const Vector resid = random_vector(rng, 1);

    const UdGain g = ud_gain(prior, h, r);
    const GainResult oracle = kalman_gain(p_minus, h, r);
    const Matrix p_plus =
        symmetrized((Matrix::Identity(n, n) - oracle.K * h) * p_minus);

    // Gamma = 0 (full update): conventional UD update.
    const UdPartialUpdate full =
        ud_partial_update(prior, g, UpdateWeights::full_update(n), x_minus, resid);
    CHECK((full.cov.reconstruct() - p_plus).norm() <= 1e-9 * p_plus.norm());
    CHECK((full.x - (x_minus + oracle.K * resid)).norm() <=
          1e-9 * std::max(1.0, full.x.norm()));

    // Gamma = I (consider step): prior untouched.
    const UdPartialUpdate none =
        ud_partial_update(prior, g, UpdateWeights::consider_all(n), x_minus, resid);
    CHECK((none.cov.reconstruct() - p_minus).norm() <= 1e-9 * p_minus.norm());
    CHECK((none.x - x_minus).norm() == 0.0);

    // random beta: Gamma (P- - P+) Gamma + P+
    Vector beta(n);
    for (Index i = 0; i < n; ++i) beta(i) = rng.uniform();
    const UpdateWeights w{beta};
    const UdPartialUpdate pu = ud_partial_update(prior, g, w, x_minus, resid);
    const Matrix gamma = w.gamma_matrix();
    const Matrix expect = gamma * (p_minus - p_plus) * gamma + p_plus;
    CHECK((pu.cov.reconstruct() - expect).norm() <= 1e-9 * std::max(1.0, expect.norm()));

    // unit-upper-triangular exactly; PSD-guarded diagonal
    for (Index i = 0; i < n; ++i) {
      CHECK(pu.cov.U(i, i) == 1.0);
      CHECK(pu.cov.d(i) >= -1e-12 * p_minus.trace());
      for (Index j = 0; j < i; ++j) CHECK(pu.cov.U(i, j) == 0.0);
    }
  }
}

TEST_CASE("ud_partial_update inner matrix reduces to D - L when Gamma = 0") {
  // With Gamma exactly zero the extra term contributes exact zeros, so the
  // updated factors must match udu(D - L) exactly.
  Rng rng(4);
  const Index n = 3;
  const Matrix p = random_spd(rng, n);
  const UdFactors prior = udu_decompose(p);
  const Matrix h = random_matrix(rng, 1, n);
  const Matrix r = Matrix::Constant(1, 1, 0.5);
  const UdGain g = ud_gain(prior, h, r);

  const Matrix dw = prior.d.asDiagonal() * g.w_bar;
  const Matrix l = dw * g.A * dw.transpose();
  const UdFactors inner = udu_decompose(symmetrized(Matrix(prior.d.asDiagonal()) - l));

  const UdPartialUpdate full =
      ud_partial_update(prior, g, UpdateWeights::full_update(n), Vector::Zero(n),
                        Vector::Zero(1));
  CHECK((full.cov.U - prior.U * inner.U).norm() == 0.0);
  CHECK((full.cov.d - inner.d).norm() == 0.0);
}

TEST_CASE("ud_partial_update vector-mode A matches the batch partial update") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4, m = 2;
    const Matrix p_minus = random_spd(rng, n);
    const UdFactors prior = udu_decompose(p_minus);
    const Matrix h = random_matrix(rng, m, n);
    const Matrix r = random_spd(rng, m, 0.4);
    const Vector x_minus = random_vector(rng, n);
    const Vector resid = random_vector(rng, m);
    Vector beta(n);
    for (Index i = 0; i < n; ++i) beta(i) = rng.uniform();
    const UpdateWeights w{beta};

    const UdGain g = ud_gain(prior, h, r);
    const UdPartialUpdate pu = ud_partial_update(prior, g, w, x_minus, resid);

    const GainResult oracle = kalman_gain(p_minus, h, r);
    const Matrix p_plus =
        symmetrized((Matrix::Identity(n, n) - oracle.K * h) * p_minus);
    const StateCov expect =
        partial_update(x_minus, x_minus + oracle.K * resid, p_minus, p_plus, w);
    CHECK((pu.x - expect.x).norm() <= 1e-9 * std::max(1.0, expect.x.norm()));
    CHECK((pu.cov.reconstruct() - expect.P).norm() <= 1e-9 * expect.P.norm());
  }
}

TEST_CASE("ud_sequential_update") {
  Rng rng(6);
  NonlinearSystem sys;
  const Index n = 3, m = 2;
  const Matrix h = random_matrix(rng, m, n);
  sys.state_dim = n;
  sys.meas_dim = m;
  sys.h = [h](const Vector& x, int) { return Vector(h * x); };
  sys.H = [h](const Vector&, int) { return h; };

  // m = 1 equals a single scalar step
  {
    NonlinearSystem s1 = sys;
    const Matrix h1 = h.topRows(1);
    s1.h = [h1](const Vector& x, int) { return Vector(h1 * x); };
    s1.H = [h1](const Vector&, int) { return h1; };
    s1.R = Matrix::Constant(1, 1, 0.7);
    const Matrix p = random_spd(rng, n);
    const UdFactors prior = udu_decompose(p);
    const Vector x = random_vector(rng, n);
    const Vector y = random_vector(rng, 1);
    const UpdateWeights w{(Vector(3) << 0.9, 0.4, 0.1).finished()};

    const UdPartialUpdate seq = ud_sequential_update(prior, x, s1, y, w);
    const UdGain g = ud_gain(prior, h1, s1.R);
    const UdPartialUpdate one =
        ud_partial_update(prior, g, w, x, Vector(y - h1 * x));
    CHECK((seq.x - one.x).norm() <= 1e-12 * std::max(1.0, one.x.norm()));
    CHECK((seq.cov.reconstruct() - one.cov.reconstruct()).norm() <=
          1e-12 * one.cov.reconstruct().norm());
  }

  // linear system, full update: equals the batch full-form result
  for (int trial = 0; trial < 20; ++trial) {
    Vector r_diag(m);
    for (Index i = 0; i < m; ++i) r_diag(i) = 0.3 + rng.uniform();
    NonlinearSystem s2 = sys;
    s2.R = r_diag.asDiagonal();
    const Matrix p = random_spd(rng, n);
    const Vector x = random_vector(rng, n);
    const Vector y = random_vector(rng, m);

    const UdPartialUpdate seq =
        ud_sequential_update(udu_decompose(p), x, s2, y, UpdateWeights::full_update(n));
    const GainResult g = kalman_gain(p, h, s2.R);
    const Vector x_plus = x + g.K * (y - h * x);
    const Matrix p_plus = symmetrized((Matrix::Identity(n, n) - g.K * h) * p);
    CHECK((seq.x - x_plus).norm() <= 1e-8 * std::max(1.0, x_plus.norm()));
    CHECK((seq.cov.reconstruct() - p_plus).norm() <= 1e-8 * p_plus.norm());
  }

  // correlated R decorrelates first; information equivalence at beta = 1
  for (int trial = 0; trial < 20; ++trial) {
    NonlinearSystem s3 = sys;
    s3.R = random_spd(rng, m, 0.4);
    const Matrix p = random_spd(rng, n);
    const Vector x = random_vector(rng, n);
    const Vector y = random_vector(rng, m);

    const UdPartialUpdate seq =
        ud_sequential_update(udu_decompose(p), x, s3, y, UpdateWeights::full_update(n));
    const GainResult g = kalman_gain(p, h, s3.R);
    const Vector x_plus = x + g.K * (y - h * x);
    const Matrix p_plus = symmetrized((Matrix::Identity(n, n) - g.K * h) * p);
    CHECK((seq.x - x_plus).norm() <= 1e-8 * std::max(1.0, x_plus.norm()));
    CHECK((seq.cov.reconstruct() - p_plus).norm() <= 1e-8 * p_plus.norm());
  }
}
