#pragma once

#include <functional>
#include <vector>

#include "pukf/types.hpp"

namespace pukf {

/// Callable bundle describing a discrete nonlinear system
///   x_k = f(x_{k-1}, u_{k-1}, k-1) + G w,   w ~ N(0, Q)
///   y_k = h(x_k, k) + v,                    v ~ N(0, R)
/// together with analytic Jacobians and (optionally) Hessians.
struct NonlinearSystem {
  using Dynamics = std::function<Vector(const Vector&, const Vector&, int)>;
  using Measurement = std::function<Vector(const Vector&, int)>;
  using DynamicsJacobian = std::function<Matrix(const Vector&, const Vector&, int)>;
  using MeasurementJacobian = std::function<Matrix(const Vector&, int)>;
  // One n x n Hessian per output component.
  using DynamicsHessians = std::function<std::vector<Matrix>(const Vector&, const Vector&, int)>;
  using MeasurementHessians = std::function<std::vector<Matrix>(const Vector&, int)>;

  Index state_dim = 0;
  Index meas_dim = 0;
  Index noise_dim = 0;

  Dynamics f;
  Measurement h;
  DynamicsJacobian F;
  MeasurementJacobian H;
  Matrix G;  // n x q noise map
  Matrix Q;  // q x q
  Matrix R;  // m x m

  DynamicsHessians f_hessians;     // may be empty
  MeasurementHessians h_hessians;  // may be empty

  bool has_f_hessians() const { return static_cast<bool>(f_hessians); }
  bool has_h_hessians() const { return static_cast<bool>(h_hessians); }
};

}  // namespace pukf
