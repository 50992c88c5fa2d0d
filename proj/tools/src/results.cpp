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

#include "phobs_cli/results.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef PHOBS_VERSION
#define PHOBS_VERSION "0.0.0"
#endif

namespace phobs::cli {

using nlohmann::json;

std::string tool_version() { return PHOBS_VERSION; }

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument("matrix must be a non-empty array of rows");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != M.cols())
            throw std::invalid_argument("matrix rows must have equal length");
        for (Eigen::Index c = 0; c < M.cols(); ++c)
            M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

}  // namespace

json domain_to_json(const OperatingDomain& dom) {
    return {{"q_min_m", vec(dom.q_min)},          {"q_max_m", vec(dom.q_max)},
            {"p_min_kg_m_per_s", vec(dom.p_min)}, {"p_max_kg_m_per_s", vec(dom.p_max)},
            {"u_min_V2", vec(dom.u_min)},         {"u_max_V2", vec(dom.u_max)}};
}

OperatingDomain domain_from_json(const json& j) {
    OperatingDomain d;
    d.q_min = vec_from(j.at("q_min_m"));
    d.q_max = vec_from(j.at("q_max_m"));
    d.p_min = vec_from(j.at("p_min_kg_m_per_s"));
    d.p_max = vec_from(j.at("p_max_kg_m_per_s"));
    d.u_min = vec_from(j.at("u_min_V2"));
    d.u_max = vec_from(j.at("u_max_V2"));
    d.validate();
    return d;
}

json bounds_to_json(const ParameterBounds& b) {
    json out = json::array();
    for (const auto& p : b.params)
        out.push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}});
    return out;
}

json design_to_json(const DesignRecord& d) {
    json j;
    j["kind"] = "design";
    j["tool_version"] = tool_version();
    j["config_hash"] = d.config_hash;
    j["name"] = d.name;
    j["mode"] = to_string(d.mode);
    j["lambda_per_s"] = d.lambda;
    j["lambda_from_search"] = d.lambda_from_search;
    j["status"] = to_string(d.status);
    j["phase1"] = {{"t", d.phase1_t}, {"lower_bound", d.phase1_lower_bound}};
    j["detail"] = d.detail;
    if (d.P.size() > 0) {
        j["P"] = matrix_to_json(d.P);
        j["K"] = json::array();
        for (const auto& k : d.K)
            j["K"].push_back(matrix_to_json(k));
        j["L"] = json::array();
        for (const auto& l : d.L)
            j["L"].push_back(matrix_to_json(l));
        j["kappa"] = d.kappa;
        j["certificate"] = {{"max_residual_eigenvalue", d.max_residual_eigenvalue},
                            {"p_min_eigenvalue", d.p_min_eigenvalue}};
    }
    if (d.search) {
        json probes = json::array();
        for (const auto& p : d.search->probes)
            probes.push_back({{"lambda", p.lambda}, {"status", to_string(p.status)}, {"margin", p.margin}});
        j["search"] = {{"lambda_max", d.search->lambda_max},
                       {"lower", d.search->lower},
                       {"upper", d.search->upper},
                       {"capped", d.search->capped},
                       {"zero_infeasible", d.search->zero_infeasible},
                       {"inconclusive_probes", d.search->inconclusive},
                       {"probes", probes}};
    }
    return j;
}

namespace {

FeasibilityStatus status_from_string(const std::string& s) {
    for (auto st : {FeasibilityStatus::Feasible, FeasibilityStatus::Infeasible, FeasibilityStatus::Inconclusive})
        if (to_string(st) == s)
            return st;
    throw std::invalid_argument("unknown status '" + s + "'");
}

}  // namespace

DesignRecord design_from_json(const json& j) {
    if (j.value("kind", "") != "design")
        throw std::invalid_argument("not a design file");
    DesignRecord d;
    d.config_hash = j.at("config_hash").get<std::string>();
    d.name = j.at("name").get<std::string>();
    d.mode = gain_mode_from_string(j.at("mode").get<std::string>());
    d.lambda = j.at("lambda_per_s").get<double>();
    d.lambda_from_search = j.at("lambda_from_search").get<bool>();
    d.status = status_from_string(j.at("status").get<std::string>());
    d.phase1_t = j.at("phase1").at("t").get<double>();
    d.phase1_lower_bound = j.at("phase1").at("lower_bound").get<double>();
    d.detail = j.value("detail", "");
    if (j.contains("P")) {
        d.P = matrix_from_json(j.at("P"));
        for (const auto& k : j.at("K"))
            d.K.push_back(matrix_from_json(k));
        for (const auto& l : j.at("L"))
            d.L.push_back(matrix_from_json(l));
        d.kappa = j.at("kappa").get<double>();
        d.max_residual_eigenvalue = j.at("certificate").at("max_residual_eigenvalue").get<double>();
        d.p_min_eigenvalue = j.at("certificate").at("p_min_eigenvalue").get<double>();
    }
    if (j.contains("search")) {
        const json& s = j.at("search");
        DecayRateResult r;
        r.lambda_max = s.at("lambda_max").get<double>();
        r.lower = s.at("lower").get<double>();
        r.upper = s.at("upper").get<double>();
        r.capped = s.at("capped").get<bool>();
        r.zero_infeasible = s.at("zero_infeasible").get<bool>();
        r.inconclusive = s.at("inconclusive_probes").get<int>();
        for (const auto& p : s.at("probes"))
            r.probes.push_back({p.at("lambda").get<double>(), status_from_string(p.at("status").get<std::string>()),
                                p.at("margin").get<double>()});
        d.search = std::move(r);
    }
    return d;
}

json metrics_to_json(const MetricsReport& m) {
    return {{"label", m.label},
            {"peak_qerr_m", m.peak_qerr},
            {"peak_perr_kg_m_per_s", m.peak_perr},
            {"peak_errnorm", m.peak_errnorm},
            {"rms_errnorm", m.rms_errnorm},
            {"settling_time_s", opt(m.settling_time)},
            {"settled", m.settled},
            {"overshoot_perr_pct", opt(m.overshoot_perr_pct)},
            {"bound_ratio", opt(m.bound_margin)},
            {"horizon_s", m.horizon}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.label = j.at("label").get<std::string>();
    m.peak_qerr = j.at("peak_qerr_m").get<double>();
    m.peak_perr = j.at("peak_perr_kg_m_per_s").get<double>();
    m.peak_errnorm = j.at("peak_errnorm").get<double>();
    m.rms_errnorm = j.at("rms_errnorm").get<double>();
    m.settling_time = opt_from(j.at("settling_time_s"));
    m.settled = j.at("settled").get<bool>();
    m.overshoot_perr_pct = opt_from(j.at("overshoot_perr_pct"));
    m.bound_margin = opt_from(j.at("bound_ratio"));
    m.horizon = j.at("horizon_s").get<double>();
    return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed for " + path.string());
}

std::optional<json> read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return json::parse(ss.str());
}

std::filesystem::path design_path(const std::filesystem::path& out, const std::string& name) {
    return out / ("design_" + name + ".json");
}

std::filesystem::path metrics_path(const std::filesystem::path& out, const std::string& scenario) {
    return out / ("metrics_" + scenario + ".json");
}

}  // namespace phobs::cli
