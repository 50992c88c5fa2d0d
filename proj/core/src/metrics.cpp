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

#include "phobs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace phobs {

namespace {

// Earliest grid time after which norms[k] <= threshold holds for every later sample.
std::optional<double> settle_time(const Trajectory& traj, const std::vector<double>& norms, double threshold) {
    std::size_t k = norms.size();
    while (k > 0 && norms[k - 1] <= threshold)
        --k;
    if (k == norms.size())
        return std::nullopt;
    return traj.t[k];
}

}  // namespace

MetricsReport compute_metrics(const Trajectory& traj, std::string label) {
    if (!traj.has_observer || traj.size() == 0)
        throw std::invalid_argument("metrics need a non-empty observer trajectory");
    MetricsReport r;
    r.label = std::move(label);
    r.horizon = traj.t.back() - traj.t.front();

    const auto n = static_cast<std::size_t>(traj.n);
    std::vector<double> norms(traj.size());
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double* e = traj.xerr.data() + k * 2 * n;
        for (std::size_t i = 0; i < n; ++i) {
            r.peak_qerr = std::max(r.peak_qerr, std::abs(e[i]));
            r.peak_perr = std::max(r.peak_perr, std::abs(e[n + i]));
        }
        norms[k] = traj.error_norm(k);
        r.peak_errnorm = std::max(r.peak_errnorm, norms[k]);
        sum_sq += norms[k] * norms[k];
    }
    r.rms_errnorm = std::sqrt(sum_sq / static_cast<double>(traj.size()));

    if (norms.front() > 0.0) {
        r.settling_time = settle_time(traj, norms, 0.02 * r.peak_errnorm);
        r.settled = r.settling_time.has_value();
    }
    const Eigen::VectorXd p0 = traj.error(0).p;
    const double p0n = p0.cwiseAbs().maxCoeff();
    if (p0n > 0.0)
        r.overshoot_perr_pct = std::max(0.0, 100.0 * (r.peak_perr - p0n) / p0n);
    return r;
}

std::optional<double> improvement_pct(double baseline, double value) {
    if (baseline == 0.0 || !std::isfinite(baseline))
        return std::nullopt;
    return 100.0 * (baseline - value) / baseline;
}

std::vector<ComparisonRow> compare(const std::vector<MetricsReport>& reports, std::size_t baseline) {
    if (baseline >= reports.size())
        throw std::out_of_range("comparison baseline index out of range");
    const auto& b = reports[baseline];
    std::vector<ComparisonRow> rows;
    for (const auto& r : reports) {
        ComparisonRow row;
        row.label = r.label;
        row.peak_errnorm = improvement_pct(b.peak_errnorm, r.peak_errnorm);
        row.rms_errnorm = improvement_pct(b.rms_errnorm, r.rms_errnorm);
        if (b.settling_time && r.settling_time)
            row.settling_time = improvement_pct(*b.settling_time, *r.settling_time);
        if (b.overshoot_perr_pct && r.overshoot_perr_pct)
            row.overshoot = improvement_pct(*b.overshoot_perr_pct, *r.overshoot_perr_pct);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int decimals, const char* missing = "n/a") {
    return v ? fmt(*v, decimals) : std::string(missing);
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size(), 0);
    const auto fit = [&width](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i)
            width[i] = std::max(width[i], r[i].size());
    };
    fit(header);
    for (const auto& r : rows)
        fit(r);
    std::ostringstream os;
    const auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i == 0)
                os << r[i] << std::string(width[i] - r[i].size(), ' ');
            else
                os << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
        }
        os << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width)
        total += w;
    os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    for (const auto& r : rows)
        line(r);
    return os.str();
}

}  // namespace

std::string format_metrics_table(const std::vector<MetricsReport>& reports, const std::string& title) {
    std::vector<std::string> header{"Metric"};
    for (const auto& r : reports)
        header.push_back(r.label);
    std::vector<std::vector<std::string>> rows;
    const auto add = [&](const std::string& name, auto&& cell) {
        std::vector<std::string> row{name};
        for (const auto& r : reports)
            row.push_back(cell(r));
        rows.push_back(std::move(row));
    };
    add("Peak |q~| [um]", [](const MetricsReport& r) { return fmt(r.peak_qerr * 1e6, 1); });
    add("Peak |p~| [g m/s]", [](const MetricsReport& r) { return fmt(r.peak_perr * 1e3, 3); });
    add("Peak |x~| [g m/s]", [](const MetricsReport& r) { return fmt(r.peak_errnorm * 1e3, 3); });
    add("RMS |x~| [g m/s]", [](const MetricsReport& r) { return fmt(r.rms_errnorm * 1e3, 3); });
    add("Settling time Ts (2%) [s]", [](const MetricsReport& r) {
        if (!r.settling_time)
            return std::string(r.settled ? "n/a" : "not settled");
        return fmt(*r.settling_time, 3);
    });
    add("Overshoot |p~| [%]", [](const MetricsReport& r) { return fmt_opt(r.overshoot_perr_pct, 1); });
    add("Bound ratio max", [](const MetricsReport& r) { return fmt_opt(r.bound_margin, 4, "-"); });
    add("Horizon [s]", [](const MetricsReport& r) { return fmt(r.horizon, 3); });
    return title + "\n" + table(header, rows);
}

std::string format_comparison(const std::vector<ComparisonRow>& rows, const std::string& baseline_label) {
    std::vector<std::string> header{"Improvement vs " + baseline_label, "Peak |x~|", "RMS", "Ts", "Overshoot"};
    std::vector<std::vector<std::string>> body;
    const auto pct = [](const std::optional<double>& v) { return v ? fmt(*v, 1) + "%" : std::string("n/a"); };
    for (const auto& r : rows)
        body.push_back({r.label, pct(r.peak_errnorm), pct(r.rms_errnorm), pct(r.settling_time), pct(r.overshoot)});
    return table(header, body);
}

}  // namespace phobs
