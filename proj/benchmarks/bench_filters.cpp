#include <benchmark/benchmark.h>

#include "pukf/factorization.hpp"
#include "pukf/filter_core.hpp"
#include "pukf/sim/rng.hpp"
#include "pukf/sqrt_filter.hpp"
#include "pukf/ud_filter.hpp"

using namespace pukf;

namespace {

Matrix random_spd(Rng& rng, Index n) {
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

Vector random_vector(Rng& rng, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

static void BM_CholeskyLower(benchmark::State& state) {
  Rng rng(1);
  const Matrix p = random_spd(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cholesky_lower(p));
}
BENCHMARK(BM_CholeskyLower)->Arg(3)->Arg(12)->Arg(24);

static void BM_UduDecompose(benchmark::State& state) {
  Rng rng(2);
  const Matrix p = random_spd(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(udu_decompose(p));
}
BENCHMARK(BM_UduDecompose)->Arg(3)->Arg(12)->Arg(24);

static void BM_MgsTriangularize(benchmark::State& state) {
  Rng rng(3);
  const Index n = state.range(0);
  Matrix m(n + 1, n);
  for (Index i = 0; i < n + 1; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(mgs_triangularize(m));
}
BENCHMARK(BM_MgsTriangularize)->Arg(3)->Arg(12)->Arg(24);

static void BM_Wmgs(benchmark::State& state) {
  Rng rng(4);
  const Index n = state.range(0);
  Matrix w(n, 2 * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < 2 * n; ++j) w(i, j) = rng.normal();
  Vector dhat(2 * n);
  for (Index i = 0; i < 2 * n; ++i) dhat(i) = 0.1 + rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(wmgs(w, dhat));
}
BENCHMARK(BM_Wmgs)->Arg(3)->Arg(12)->Arg(24);

// One scalar assimilation with partial update, per covariance form.

static void BM_ScalarUpdateFull(benchmark::State& state) {
  Rng rng(5);
  const Index n = state.range(0);
  const Matrix p = random_spd(rng, n);
  const Vector h = random_vector(rng, n);
  const Vector x = random_vector(rng, n);
  const UpdateWeights w = UpdateWeights::uniform(n, 0.9);
  for (auto _ : state) {
    const double innov = h.dot(p * h) + 1.0;
    const Vector k = p * h / innov;
    const Vector x_plus = x + k * 0.3;
    const Matrix p_plus = symmetrized((Matrix::Identity(n, n) - k * h.transpose()) * p);
    benchmark::DoNotOptimize(partial_update(x, x_plus, p, p_plus, w));
  }
}
BENCHMARK(BM_ScalarUpdateFull)->Arg(3)->Arg(12)->Arg(24);

static void BM_ScalarUpdateSqrt(benchmark::State& state) {
  Rng rng(6);
  const Index n = state.range(0);
  const Matrix s = cholesky_lower(random_spd(rng, n));
  const Vector h = random_vector(rng, n);
  const Vector x = random_vector(rng, n);
  const UpdateWeights w = UpdateWeights::uniform(n, 0.9);
  for (auto _ : state) {
    const PotterUpdate up = potter_scalar_update(s, x, h, 1.0, 0.3, 0.0);
    benchmark::DoNotOptimize(
        sr_partial_update_scalar(s, up.S, up.a, up.phi, w, x, up.x));
  }
}
BENCHMARK(BM_ScalarUpdateSqrt)->Arg(3)->Arg(12)->Arg(24);

static void BM_ScalarUpdateUd(benchmark::State& state) {
  Rng rng(7);
  const Index n = state.range(0);
  const UdFactors f = udu_decompose(random_spd(rng, n));
  const Matrix h = random_vector(rng, n).transpose();
  const Vector x = random_vector(rng, n);
  const UpdateWeights w = UpdateWeights::uniform(n, 0.9);
  const Matrix r = Matrix::Constant(1, 1, 1.0);
  for (auto _ : state) {
    const UdGain g = ud_gain(f, h, r);
    benchmark::DoNotOptimize(ud_partial_update(f, g, w, x, Vector::Constant(1, 0.3)));
  }
}
BENCHMARK(BM_ScalarUpdateUd)->Arg(3)->Arg(12)->Arg(24);

// Time update per covariance form.

static void BM_PropagateSqrt(benchmark::State& state) {
  Rng rng(8);
  const Index n = state.range(0);
  const Matrix s = cholesky_lower(random_spd(rng, n));
  const Matrix f = Matrix::Identity(n, n) + 0.1 * random_spd(rng, n);
  const Matrix q_sqrt_t = symmetric_sqrt(0.01 * Matrix::Identity(n, n)).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(sr_propagate(s, f, q_sqrt_t));
}
BENCHMARK(BM_PropagateSqrt)->Arg(3)->Arg(12)->Arg(24);

static void BM_PropagateUd(benchmark::State& state) {
  Rng rng(9);
  const Index n = state.range(0);
  const UdFactors post = udu_decompose(random_spd(rng, n));
  const Matrix f = Matrix::Identity(n, n) + 0.1 * random_spd(rng, n);
  const Matrix g = Matrix::Identity(n, n);
  const Matrix q = 0.01 * Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(ud_propagate(post, f, g, q));
}
BENCHMARK(BM_PropagateUd)->Arg(3)->Arg(12)->Arg(24);

BENCHMARK_MAIN();
