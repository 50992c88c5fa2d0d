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

#include <optional>
#include <string>
#include <vector>

#include "phobs/simulator.hpp"

namespace phobs {

/// Observer performance indicators in SI units. Table units (um, g m/s, %) are applied only when printing.
struct MetricsReport {
    std::string label;
    double peak_qerr = 0.0;     // m
    double peak_perr = 0.0;     // kg m/s
    double peak_errnorm = 0.0;  // Euclidean norm of (q~, p~)
    double rms_errnorm = 0.0;
    std::optional<double> settling_time;  // empty when undefined or not settled
    bool settled = false;
    std::optional<double> overshoot_perr_pct;
    std::optional<double> bound_margin;   // max ratio from bound_check
    double horizon = 0.0;
};

/// Peaks and RMS over all samples; 2% settling relative to the peak of |x~|; overshoot of |p~| over
/// |p~(0)| floored at 0.
MetricsReport compute_metrics(const Trajectory& traj, std::string label = {});

/// Percentage improvement of `value` over `baseline` (positive = smaller), empty for a zero baseline.
std::optional<double> improvement_pct(double baseline, double value);

struct ComparisonRow {
    std::string label;
    std::optional<double> peak_errnorm;
    std::optional<double> rms_errnorm;
    std::optional<double> settling_time;
    std::optional<double> overshoot;
};

/// Improvement of each report over reports[baseline].
std::vector<ComparisonRow> compare(const std::vector<MetricsReport>& reports, std::size_t baseline = 0);

/// Aligned text table, one column per report, one row per indicator.
std::string format_metrics_table(const std::vector<MetricsReport>& reports, const std::string& title);
std::string format_comparison(const std::vector<ComparisonRow>& rows, const std::string& baseline_label);

}  // namespace phobs
