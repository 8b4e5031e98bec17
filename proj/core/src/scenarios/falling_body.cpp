#include "pukf/scenarios/falling_body.hpp"

#include <cmath>

#include "pukf/sim/rng.hpp"

namespace pukf {

NonlinearSystem falling_body_model(const FallingBodyParams& params) {
  const double kp = params.kp;
  const double g = params.gravity;
  const double d = params.horizontal_distance;
  const double h0 = params.device_altitude;
  const double dt = params.dt;

  NonlinearSystem sys;
  sys.state_dim = 3;
  sys.meas_dim = 1;
  sys.noise_dim = 3;
  sys.G = Matrix::Identity(3, 3);
  sys.Q = Matrix::Zero(3, 3);  // drag model carries no process noise
  sys.R = Matrix::Constant(1, 1, params.meas_variance);

  sys.f = [kp, g, dt](const Vector& x, const Vector&, int) {
    Vector out(3);
    out(0) = x(0) + x(1) * dt;
    out(1) = x(1) + (std::exp(-x(0) / kp) * x(1) * x(1) * x(2) - g) * dt;
    out(2) = x(2);
    return out;
  };
  sys.F = [kp, dt](const Vector& x, const Vector&, int) {
    const double e = std::exp(-x(0) / kp);
    Matrix f = Matrix::Identity(3, 3);
    f(0, 1) = dt;
    f(1, 0) = -dt * e * x(1) * x(1) * x(2) / kp;
    f(1, 1) = 1.0 + 2.0 * dt * e * x(1) * x(2);
    f(1, 2) = dt * e * x(1) * x(1);
    return f;
  };
  sys.f_hessians = [kp, dt](const Vector& x, const Vector&, int) {
    const double e = std::exp(-x(0) / kp);
    std::vector<Matrix> h(3, Matrix::Zero(3, 3));
    Matrix& h1 = h[1];
    h1(0, 0) = dt * e * x(1) * x(1) * x(2) / (kp * kp);
    h1(0, 1) = h1(1, 0) = -2.0 * dt * e * x(1) * x(2) / kp;
    h1(0, 2) = h1(2, 0) = -dt * e * x(1) * x(1) / kp;
    h1(1, 1) = 2.0 * dt * e * x(2);
    h1(1, 2) = h1(2, 1) = 2.0 * dt * e * x(1);
    return h;
  };

  sys.h = [d, h0](const Vector& x, int) {
    return Vector::Constant(1, std::sqrt(d * d + (x(0) - h0) * (x(0) - h0)));
  };
  sys.H = [d, h0](const Vector& x, int) {
    const double range = std::sqrt(d * d + (x(0) - h0) * (x(0) - h0));
    Matrix h = Matrix::Zero(1, 3);
    h(0, 0) = (x(0) - h0) / range;
    return h;
  };
  sys.h_hessians = [d, h0](const Vector& x, int) {
    const double range = std::sqrt(d * d + (x(0) - h0) * (x(0) - h0));
    std::vector<Matrix> hh(1, Matrix::Zero(3, 3));
    hh[0](0, 0) = d * d / (range * range * range);
    return hh;
  };
  return sys;
}

FallingBodyStream falling_body_truth(const FallingBodyParams& params, std::uint64_t seed) {
  const NonlinearSystem sys = falling_body_model(params);
  const int n_steps = static_cast<int>(std::llround(params.duration / params.dt));
  const int meas_every = std::max(1, static_cast<int>(std::llround(params.meas_period / params.dt)));

  Rng meas_rng(seed, 0);
  Rng init_rng(seed, 1);

  FallingBodyStream out;
  out.times.reserve(n_steps + 1);
  out.truth.reserve(n_steps + 1);

  Vector x = params.x0_truth;
  const Vector u = Vector::Zero(0);
  out.times.push_back(0.0);
  out.truth.push_back(x);
  const double meas_sigma = std::sqrt(params.meas_variance);
  for (int k = 1; k <= n_steps; ++k) {
    x = sys.f(x, u, k - 1);
    out.times.push_back(k * params.dt);
    out.truth.push_back(x);
    if (k % meas_every == 0) {
      const double range = sys.h(x, k)(0);
      out.meas_step.push_back(k);
      out.measurements.push_back(range + meas_sigma * meas_rng.normal());
    }
  }

  out.x0_estimate = params.x0_truth;
  for (Index i = 0; i < 3; ++i) {
    double draw = 0.0;
    switch (params.draw_mode) {
      case FallingBodyParams::DrawMode::Sign: draw = init_rng.sign(); break;
      case FallingBodyParams::DrawMode::Uniform: draw = 2.0 * init_rng.uniform() - 1.0; break;
      case FallingBodyParams::DrawMode::Normal: draw = init_rng.normal(); break;
    }
    out.x0_estimate(i) += params.draw_scale(i) * params.sigma0(i) * draw;
  }
  return out;
}

}  // namespace pukf
