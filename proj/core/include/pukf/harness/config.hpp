#pragma once

#include <string>

#include "pukf/scenarios/falling_body.hpp"
#include "pukf/scenarios/imu_cam.hpp"
#include "pukf/scenarios/tumbler.hpp"

namespace pukf {

/// Scenario selection plus per-scenario parameters. Config files are flat
/// UTF-8 `key = value` lines with `#` comments; keys are namespaced per
/// scenario (e.g. `falling_body.sigma0_position = 300`).
struct ScenarioConfig {
  std::string scenario = "falling-body";  // falling-body | imu-cam | tumbler
  FallingBodyParams falling_body;
  ImuCamParams imu_cam;
  TumblerParams tumbler;
  CovForm mekf_cov_form = CovForm::Ud;  // imu_cam.cov_form
};

ScenarioConfig default_config(const std::string& scenario);

/// Applies one key/value pair; throws ConfigError on unknown keys or
/// unparseable values.
void apply_config_entry(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Parses a config file into cfg (overlaying defaults already present).
void load_config_file(ScenarioConfig& cfg, const std::string& path);

/// Reference config text for a scenario, with every supported key.
std::string reference_config_text(const std::string& scenario);

}  // namespace pukf
