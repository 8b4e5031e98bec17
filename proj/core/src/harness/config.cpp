#include "pukf/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "pukf/errors.hpp"

namespace pukf {

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
    if (pos != value.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError("config: expected integer for " + key);
  return i;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig cfg;
  if (scenario != "falling-body" && scenario != "imu-cam" && scenario != "tumbler")
    throw ConfigError("unknown scenario '" + scenario + "'");
  cfg.scenario = scenario;
  return cfg;
}

void apply_config_entry(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  FallingBodyParams& fb = cfg.falling_body;
  ImuCamParams& ic = cfg.imu_cam;
  TumblerParams& tb = cfg.tumbler;

  if (key == "scenario") {
    if (value != "falling-body" && value != "imu-cam" && value != "tumbler")
      throw ConfigError("config: unknown scenario '" + value + "'");
    cfg.scenario = value;
  } else if (key == "falling_body.kp") fb.kp = to_double(key, value);
  else if (key == "falling_body.gravity") fb.gravity = to_double(key, value);
  else if (key == "falling_body.horizontal_distance") fb.horizontal_distance = to_double(key, value);
  else if (key == "falling_body.device_altitude") fb.device_altitude = to_double(key, value);
  else if (key == "falling_body.dt") fb.dt = to_double(key, value);
  else if (key == "falling_body.meas_period") fb.meas_period = to_double(key, value);
  else if (key == "falling_body.duration") fb.duration = to_double(key, value);
  else if (key == "falling_body.sigma0_position") fb.sigma0(0) = to_double(key, value);
  else if (key == "falling_body.sigma0_velocity") fb.sigma0(1) = to_double(key, value);
  else if (key == "falling_body.sigma0_ballistic") fb.sigma0(2) = to_double(key, value);
  else if (key == "falling_body.meas_variance") fb.meas_variance = to_double(key, value);
  else if (key == "falling_body.x0_altitude") fb.x0_truth(0) = to_double(key, value);
  else if (key == "falling_body.x0_velocity") fb.x0_truth(1) = to_double(key, value);
  else if (key == "falling_body.x0_ballistic") fb.x0_truth(2) = to_double(key, value);
  else if (key == "falling_body.draw_scale") fb.draw_scale.setConstant(to_double(key, value));
  else if (key == "falling_body.draw_scale_position") fb.draw_scale(0) = to_double(key, value);
  else if (key == "falling_body.draw_scale_velocity") fb.draw_scale(1) = to_double(key, value);
  else if (key == "falling_body.draw_scale_ballistic") fb.draw_scale(2) = to_double(key, value);
  else if (key == "falling_body.draw_mode") {
    if (value == "sign") fb.draw_mode = FallingBodyParams::DrawMode::Sign;
    else if (value == "uniform") fb.draw_mode = FallingBodyParams::DrawMode::Uniform;
    else if (value == "normal") fb.draw_mode = FallingBodyParams::DrawMode::Normal;
    else throw ConfigError("config: falling_body.draw_mode must be sign|uniform|normal");
  }
  else if (key == "imu_cam.imu_rate") ic.imu_rate = to_double(key, value);
  else if (key == "imu_cam.cam_rate") ic.cam_rate = to_double(key, value);
  else if (key == "imu_cam.duration") ic.duration = to_double(key, value);
  else if (key == "imu_cam.pixel_sigma") ic.pixel_sigma = to_double(key, value);
  else if (key == "imu_cam.fx") ic.fx = to_double(key, value);
  else if (key == "imu_cam.fy") ic.fy = to_double(key, value);
  else if (key == "imu_cam.cx") ic.cx = to_double(key, value);
  else if (key == "imu_cam.cy") ic.cy = to_double(key, value);
  else if (key == "imu_cam.res_x") ic.res_x = to_int(key, value);
  else if (key == "imu_cam.res_y") ic.res_y = to_int(key, value);
  else if (key == "imu_cam.imu_att_sigma_deg") ic.imu_att_sigma = to_double(key, value) * M_PI / 180.0;
  else if (key == "imu_cam.imu_pos_sigma") ic.imu_pos_sigma = to_double(key, value);
  else if (key == "imu_cam.vel_sigma") ic.vel_sigma = to_double(key, value);
  else if (key == "imu_cam.gyro_bias_sigma") ic.gyro_bias_sigma = to_double(key, value);
  else if (key == "imu_cam.accel_bias_sigma") ic.accel_bias_sigma = to_double(key, value);
  else if (key == "imu_cam.lever_sigma") ic.lever_sigma = to_double(key, value);
  else if (key == "imu_cam.ext_att_sigma_deg") ic.ext_att_sigma = to_double(key, value) * M_PI / 180.0;
  else if (key == "imu_cam.gyro_noise") ic.gyro_noise = to_double(key, value);
  else if (key == "imu_cam.accel_noise") ic.accel_noise = to_double(key, value);
  else if (key == "imu_cam.gyro_walk") ic.gyro_walk = to_double(key, value);
  else if (key == "imu_cam.accel_walk") ic.accel_walk = to_double(key, value);
  else if (key == "imu_cam.wall_distance") ic.wall_distance = to_double(key, value);
  else if (key == "imu_cam.marker_side") ic.marker_side = to_double(key, value);
  else if (key == "imu_cam.marker_offset") ic.marker_offset = to_double(key, value);
  else if (key == "imu_cam.draw_scale") ic.draw_scale = to_double(key, value);
  else if (key == "imu_cam.translation_scale") ic.translation_scale = to_double(key, value);
  else if (key == "imu_cam.rotation_scale") ic.rotation_scale = to_double(key, value);
  else if (key == "imu_cam.cov_form") {
    if (value == "full") cfg.mekf_cov_form = CovForm::Full;
    else if (value == "sr") cfg.mekf_cov_form = CovForm::SquareRoot;
    else if (value == "ud") cfg.mekf_cov_form = CovForm::Ud;
    else throw ConfigError("config: imu_cam.cov_form must be full|sr|ud");
  }
  else if (key == "tumbler.n_features") tb.n_features = to_int(key, value);
  else if (key == "tumbler.omega_x") tb.omega_true(0) = to_double(key, value);
  else if (key == "tumbler.omega_y") tb.omega_true(1) = to_double(key, value);
  else if (key == "tumbler.omega_z") tb.omega_true(2) = to_double(key, value);
  else if (key == "tumbler.frame_rate") tb.frame_rate = to_double(key, value);
  else if (key == "tumbler.duration") tb.duration = to_double(key, value);
  else if (key == "tumbler.cloud_radius") tb.cloud_radius = to_double(key, value);
  else if (key == "tumbler.meas_sigma") tb.meas_sigma = to_double(key, value);
  else if (key == "tumbler.r_variance") tb.r_variance = to_double(key, value);
  else if (key == "tumbler.reinit_threshold") tb.reinit_threshold = to_int(key, value);
  else if (key == "tumbler.forced_reinit_period") tb.forced_reinit_period = to_int(key, value);
  else if (key == "tumbler.drop_cov_factor") tb.drop_cov_factor = to_double(key, value);
  else if (key == "tumbler.init_window") tb.init_window = to_double(key, value);
  else if (key == "tumbler.feature_beta") tb.feature_beta = to_double(key, value);
  else if (key == "tumbler.rate_beta") tb.rate_beta = to_double(key, value);
  else if (key == "tumbler.chi2_threshold") tb.chi2_threshold = to_double(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

void load_config_file(ScenarioConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    apply_config_entry(cfg, trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
}

std::string reference_config_text(const std::string& scenario) {
  const ScenarioConfig cfg = default_config(scenario);
  std::ostringstream out;
  out.precision(17);
  out << "# Reference configuration: " << scenario << "\n";
  out << "scenario = " << scenario << "\n\n";
  if (scenario == "falling-body") {
    const FallingBodyParams& p = cfg.falling_body;
    out << "falling_body.kp = " << p.kp << "\n";
    out << "falling_body.gravity = " << p.gravity << "\n";
    out << "falling_body.horizontal_distance = " << p.horizontal_distance << "\n";
    out << "falling_body.device_altitude = " << p.device_altitude << "\n";
    out << "falling_body.dt = " << p.dt << "\n";
    out << "falling_body.meas_period = " << p.meas_period << "\n";
    out << "falling_body.duration = " << p.duration << "\n";
    out << "falling_body.sigma0_position = " << p.sigma0(0) << "\n";
    out << "falling_body.sigma0_velocity = " << p.sigma0(1) << "\n";
    out << "falling_body.sigma0_ballistic = " << p.sigma0(2) << "\n";
    out << "# R used directly as a variance\n";
    out << "falling_body.meas_variance = " << p.meas_variance << "\n";
    out << "# Initial truth is a reference choice, not part of the problem statement\n";
    out << "falling_body.x0_altitude = " << p.x0_truth(0) << "\n";
    out << "falling_body.x0_velocity = " << p.x0_truth(1) << "\n";
    out << "falling_body.x0_ballistic = " << p.x0_truth(2) << "\n";
    out << "# Initial estimate offset = draw_scale * sigma0 * draw; draw_mode is one\n";
    out << "# of sign (exact +-1), uniform (in [-1,1]) or normal\n";
    out << "falling_body.draw_scale = " << p.draw_scale(0) << "\n";
    out << "falling_body.draw_mode = uniform\n";
  } else if (scenario == "imu-cam") {
    const ImuCamParams& p = cfg.imu_cam;
    out << "imu_cam.imu_rate = " << p.imu_rate << "\n";
    out << "imu_cam.cam_rate = " << p.cam_rate << "\n";
    out << "imu_cam.duration = " << p.duration << "\n";
    out << "imu_cam.pixel_sigma = " << p.pixel_sigma << "\n";
    out << "# Intrinsics derived from a 58 x 45 deg FOV at 640x480\n";
    out << "imu_cam.fx = " << p.fx << "\n";
    out << "imu_cam.fy = " << p.fy << "\n";
    out << "imu_cam.cx = " << p.cx << "\n";
    out << "imu_cam.cy = " << p.cy << "\n";
    out << "imu_cam.res_x = " << p.res_x << "\n";
    out << "imu_cam.res_y = " << p.res_y << "\n";
    out << "imu_cam.imu_att_sigma_deg = " << p.imu_att_sigma * 180.0 / M_PI << "\n";
    out << "imu_cam.imu_pos_sigma = " << p.imu_pos_sigma << "\n";
    out << "imu_cam.vel_sigma = " << p.vel_sigma << "\n";
    out << "imu_cam.gyro_bias_sigma = " << p.gyro_bias_sigma << "\n";
    out << "imu_cam.accel_bias_sigma = " << p.accel_bias_sigma << "\n";
    out << "imu_cam.lever_sigma = " << p.lever_sigma << "\n";
    out << "imu_cam.ext_att_sigma_deg = " << p.ext_att_sigma * 180.0 / M_PI << "\n";
    out << "imu_cam.gyro_noise = " << p.gyro_noise << "\n";
    out << "imu_cam.accel_noise = " << p.accel_noise << "\n";
    out << "imu_cam.gyro_walk = " << p.gyro_walk << "\n";
    out << "imu_cam.accel_walk = " << p.accel_walk << "\n";
    out << "imu_cam.wall_distance = " << p.wall_distance << "\n";
    out << "imu_cam.marker_side = " << p.marker_side << "\n";
    out << "imu_cam.marker_offset = " << p.marker_offset << "\n";
    out << "imu_cam.draw_scale = " << p.draw_scale << "\n";
    out << "imu_cam.translation_scale = " << p.translation_scale << "\n";
    out << "imu_cam.rotation_scale = " << p.rotation_scale << "\n";
    out << "imu_cam.cov_form = ud\n";
  } else {
    const TumblerParams& p = cfg.tumbler;
    out << "tumbler.n_features = " << p.n_features << "\n";
    out << "tumbler.omega_x = " << p.omega_true(0) << "\n";
    out << "tumbler.omega_y = " << p.omega_true(1) << "\n";
    out << "tumbler.omega_z = " << p.omega_true(2) << "\n";
    out << "tumbler.frame_rate = " << p.frame_rate << "\n";
    out << "tumbler.duration = " << p.duration << "\n";
    out << "tumbler.cloud_radius = " << p.cloud_radius << "\n";
    out << "tumbler.meas_sigma = " << p.meas_sigma << "\n";
    out << "tumbler.r_variance = " << p.r_variance << "\n";
    out << "tumbler.reinit_threshold = " << p.reinit_threshold << "\n";
    out << "tumbler.forced_reinit_period = " << p.forced_reinit_period << "\n";
    out << "tumbler.drop_cov_factor = " << p.drop_cov_factor << "\n";
    out << "tumbler.init_window = " << p.init_window << "\n";
    out << "tumbler.feature_beta = " << p.feature_beta << "\n";
    out << "tumbler.rate_beta = " << p.rate_beta << "\n";
    out << "tumbler.chi2_threshold = " << p.chi2_threshold << "\n";
  }
  return out.str();
}

}  // namespace pukf
