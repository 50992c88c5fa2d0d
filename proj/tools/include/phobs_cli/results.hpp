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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"
#include "phobs/metrics.hpp"
#include "phobs/synthesis.hpp"

namespace phobs::cli {

std::string tool_version();

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json domain_to_json(const OperatingDomain& dom);
OperatingDomain domain_from_json(const nlohmann::json& j);
nlohmann::json bounds_to_json(const ParameterBounds& b);

/// One synthesized design as stored in design_<name>.json.
struct DesignRecord {
    std::string name;
    GainMode mode = GainMode::Constant;
    double lambda = 0.0;
    bool lambda_from_search = false;
    FeasibilityStatus status = FeasibilityStatus::Inconclusive;
    double phase1_t = 0.0;
    double phase1_lower_bound = 0.0;
    double kappa = 0.0;
    Eigen::MatrixXd P;
    std::vector<Eigen::MatrixXd> K;
    std::vector<Eigen::MatrixXd> L;
    double max_residual_eigenvalue = 0.0;
    double p_min_eigenvalue = 0.0;
    std::optional<DecayRateResult> search;  // probes only; certificate is not stored twice
    std::string detail;
    std::string config_hash;

    [[nodiscard]] bool usable() const { return status == FeasibilityStatus::Feasible && P.size() > 0; }
};

nlohmann::json design_to_json(const DesignRecord& d);
DesignRecord design_from_json(const nlohmann::json& j);

nlohmann::json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

/// Writes `text` to `path` (created or truncated) and throws on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::optional<nlohmann::json> read_json(const std::filesystem::path& path);

std::filesystem::path design_path(const std::filesystem::path& out, const std::string& name);
std::filesystem::path metrics_path(const std::filesystem::path& out, const std::string& scenario);

}  // namespace phobs::cli
