#pragma once

#include <cstdint>
#include <vector>

#include "pukf/system.hpp"
#include "pukf/types.hpp"

namespace pukf {

/// Atmospheric re-entry body constrained to fall vertically: altitude,
/// vertical velocity, and a constant ballistic parameter, observed by a
/// discrete range-measurement system offset horizontally from the fall line.
struct FallingBodyParams {
  double kp = 6100.0;                 // air density / altitude constant (m)
  double gravity = 9.81;              // m/s^2
  double horizontal_distance = 30000.0;  // m, sensor to fall line
  double device_altitude = 30000.0;      // m, sensor altitude
  double dt = 0.1;                    // propagation step (s)
  double meas_period = 1.0;           // s, first measurement at t = meas_period
  double duration = 40.0;             // s
  Eigen::Vector3d sigma0{300.0, 600.0, 0.33};  // initial 1-sigma per state
  double meas_variance = 300.0;       // R, treated as a variance
  // Initial truth. Not dictated by the problem statement; these reference
  // values put the braking phase and the sensor-altitude crossing inside the
  // run window.
  Eigen::Vector3d x0_truth{91500.0, -6100.0, 0.033};
  // Initial estimate offset = draw_scale .* sigma0 .* draw, where draw is a
  // random sign (paper's "±1σ error" wording), a uniform variate in [-1, 1],
  // or a standard normal, per draw_mode.
  enum class DrawMode { Sign, Uniform, Normal };
  Eigen::Vector3d draw_scale{1.0, 1.0, 1.0};
  DrawMode draw_mode = DrawMode::Uniform;
};

NonlinearSystem falling_body_model(const FallingBodyParams& params);

struct FallingBodyStream {
  std::vector<double> times;        // propagation grid, times[0] = 0
  std::vector<Vector> truth;        // truth state per grid point
  std::vector<int> meas_step;       // grid indices carrying a measurement
  std::vector<double> measurements; // one range per meas_step entry
  Vector x0_estimate;               // drawn initial estimate
};

FallingBodyStream falling_body_truth(const FallingBodyParams& params, std::uint64_t seed);

}  // namespace pukf
