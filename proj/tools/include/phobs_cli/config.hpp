/*
 Copyright 2026 The phobs Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"
#include "phobs/ph_model.hpp"
#include "phobs/simulator.hpp"

namespace phobs::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed, unknown or out-of-range configuration content.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepConfig {
    double start_V = 1000.0;
    double rel_tol = 1e-4;
};

struct DomainConfig {
    enum class Mode { Frozen, Derive };
    Mode mode = Mode::Frozen;
    OperatingDomain box;  // Frozen

    // Derive: open-loop step response, optionally with an observer running alongside.
    double step_time_s = 1.0;
    double amplitude_V = 0.0;
    double horizon_s = 2.0;
    double dt_s = 1e-5;
    double margin = 0.0;
    std::optional<Eigen::MatrixXd> observer_gain;
    std::optional<StateVec> observer_x0;
    std::optional<SweepConfig> sweep;
};

struct DesignConfig {
    std::string name;
    GainMode mode = GainMode::Constant;
    std::optional<double> lambda;  // empty: largest certifiable rate
};

struct SynthesisConfig {
    std::vector<DesignConfig> designs;
    double bisection_tol = 1e-3;
    double center_box = 1.0;
};

struct ScenarioConfig {
    Scenario scenario;
    std::vector<std::string> designs;  // empty: plant only
    std::string baseline;
};

struct OutputConfig {
    std::filesystem::path directory = "phobs_out";
    std::size_t csv_every = 1;
};

struct Config {
    int schema_version = kSchemaVersion;
    DEAParams plant;
    DomainConfig domain;
    SynthesisConfig synthesis;
    std::vector<ScenarioConfig> scenarios;
    OutputConfig output;
    std::string hash;  // FNV-1a of the canonical JSON text

    [[nodiscard]] const DesignConfig* find_design(const std::string& name) const;
};

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

}  // namespace phobs::cli
