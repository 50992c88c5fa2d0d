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

#include "phobs_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace phobs::cli {

namespace {

using nlohmann::json;

// Object view that records which keys were read, so leftovers can be rejected.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            fail("expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

    const json& at(const std::string& key) {
        if (!j_.contains(key))
            fail("missing key '" + key + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    const json* maybe(const std::string& key) {
        if (!j_.contains(key))
            return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    double number(const std::string& key) { return as_number(at(key), key); }
    double number(const std::string& key, double fallback) {
        const json* v = maybe(key);
        return v != nullptr ? as_number(*v, key) : fallback;
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string())
            fail("'" + key + "' must be a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& key, bool fallback) {
        const json* v = maybe(key);
        if (v == nullptr)
            return fallback;
        if (!v->is_boolean())
            fail("'" + key + "' must be true or false");
        return v->get<bool>();
    }

    long long integer(const std::string& key, long long fallback) {
        const json* v = maybe(key);
        if (v == nullptr)
            return fallback;
        if (!v->is_number_integer())
            fail("'" + key + "' must be an integer");
        return v->get<long long>();
    }

    /// A number or an array of numbers.
    Eigen::VectorXd vector(const std::string& key) {
        const json& v = at(key);
        if (v.is_number())
            return Eigen::VectorXd::Constant(1, v.get<double>());
        if (!v.is_array() || v.empty())
            fail("'" + key + "' must be a number or a non-empty array of numbers");
        Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i)
            out(static_cast<Eigen::Index>(i)) = as_number(v[i], key);
        return out;
    }

    Reader child(const std::string& key) { return Reader(at(key), sub(key)); }

    [[nodiscard]] std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[nodiscard]] const std::string& path() const { return path_; }

    void finish() const {
        std::vector<std::string> unknown;
        for (const auto& item : j_.items())
            if (seen_.count(item.key()) == 0)
                unknown.push_back(item.key());
        if (unknown.empty())
            return;
        std::string list;
        for (const auto& k : unknown)
            list += (list.empty() ? "'" : ", '") + k + "'";
        fail("unknown key(s) " + list);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
    }

private:
    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number())
            fail("'" + key + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            fail("'" + key + "' must be finite");
        return d;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

StateVec read_state(Reader r) {
    StateVec x(r.vector("q_m"), r.vector("p_kg_m_per_s"));
    r.finish();
    if (x.q.size() != x.p.size())
        r.fail("q_m and p_kg_m_per_s differ in length");
    return x;
}

DEAParams read_plant(Reader r) {
    DEAParams p;
    p.mass_kg = r.number("mass_kg", p.mass_kg);
    p.stiffness_N_per_m = r.number("stiffness_N_per_m", p.stiffness_N_per_m);
    p.damping_Ns_per_m = r.number("damping_Ns_per_m", p.damping_Ns_per_m);
    p.q0_m = r.number("q0_m", p.q0_m);
    p.eps_F_per_m = r.number("eps_F_per_m", p.eps_F_per_m);
    r.finish();
    try {
        p.validate();
    } catch (const std::exception& e) {
        r.fail(e.what());
    }
    return p;
}

Eigen::MatrixXd read_matrix(const json& v, const Reader& r, const std::string& key) {
    if (!v.is_array() || v.empty())
        r.fail("'" + key + "' must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    const bool nested = v[0].is_array();
    const auto cols = nested ? static_cast<Eigen::Index>(v[0].size()) : 1;
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        if (nested != row.is_array() || (nested && static_cast<Eigen::Index>(row.size()) != cols))
            r.fail("'" + key + "' rows must have equal length");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = nested ? row[static_cast<std::size_t>(c)] : row;
            if (!e.is_number())
                r.fail("'" + key + "' entries must be numbers");
            M(i, c) = e.get<double>();
        }
    }
    return M;
}

DomainConfig read_domain(Reader r) {
    DomainConfig d;
    const std::string mode = r.string("mode");
    if (mode == "frozen") {
        d.mode = DomainConfig::Mode::Frozen;
        d.box.q_min = r.vector("q_min_m");
        d.box.q_max = r.vector("q_max_m");
        d.box.p_min = r.vector("p_min_kg_m_per_s");
        d.box.p_max = r.vector("p_max_kg_m_per_s");
        d.box.u_min = r.vector("u_min_V2");
        d.box.u_max = r.vector("u_max_V2");
        try {
            d.box.validate();
        } catch (const std::exception& e) {
            r.fail(e.what());
        }
    } else if (mode == "derive") {
        d.mode = DomainConfig::Mode::Derive;
        d.step_time_s = r.number("step_time_s", d.step_time_s);
        d.amplitude_V = r.number("amplitude_V");
        d.horizon_s = r.number("horizon_s", d.horizon_s);
        d.dt_s = r.number("dt_s", d.dt_s);
        d.margin = r.number("margin", d.margin);
        if (d.amplitude_V < 0.0 || d.horizon_s <= 0.0 || d.dt_s <= 0.0 || d.margin < 0.0)
            r.fail("amplitude_V and margin must be >= 0, horizon_s and dt_s > 0");
        if (r.has("observer")) {
            Reader o = r.child("observer");
            d.observer_gain = read_matrix(o.at("gain"), o, "gain");
            d.observer_x0 = read_state(o.child("xhat0"));
            o.finish();
        }
        if (r.has("sweep")) {
            Reader s = r.child("sweep");
            SweepConfig sw;
            sw.start_V = s.number("start_V", sw.start_V);
            sw.rel_tol = s.number("rel_tol", sw.rel_tol);
            s.finish();
            if (sw.start_V <= 0.0 || sw.rel_tol <= 0.0)
                s.fail("start_V and rel_tol must be > 0");
            d.sweep = sw;
        }
    } else {
        r.fail("mode must be \"frozen\" or \"derive\"");
    }
    r.finish();
    return d;
}

InputSignal read_input(Reader r) {
    const std::string kind = r.string("kind");
    InputSignal in;
    if (kind == "zero") {
        in = InputSignal::zero();
    } else if (kind == "step") {
        const double volts = r.number("amplitude_V");
        in = InputSignal::step(r.number("t_step_s"), volts * volts);
    } else if (kind == "piecewise") {
        const json& pieces = r.at("pieces_s_V");
        if (!pieces.is_array())
            r.fail("'pieces_s_V' must be an array of [t_s, V] pairs");
        std::vector<std::pair<double, double>> pv;
        for (const auto& p : pieces) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                r.fail("'pieces_s_V' entries must be [t_s, V] pairs");
            const double v = p[1].get<double>();
            pv.emplace_back(p[0].get<double>(), v * v);
        }
        try {
            in = InputSignal::piecewise(std::move(pv));
        } catch (const std::exception& e) {
            r.fail(e.what());
        }
    } else {
        r.fail("kind must be \"zero\", \"step\" or \"piecewise\"");
    }
    r.finish();
    return in;
}

std::vector<std::string> read_names(const json& v, const Reader& r, const std::string& key) {
    if (!v.is_array())
        r.fail("'" + key + "' must be an array of names");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string())
            r.fail("'" + key + "' must contain strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

const DesignConfig* Config::find_design(const std::string& name) const {
    for (const auto& d : synthesis.designs)
        if (d.name == name)
            return &d;
    return nullptr;
}

Config parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    Reader r(root, "");
    Config cfg;
    const json& version = r.at("schema_version");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
        r.fail("schema_version must be " + std::to_string(kSchemaVersion));
    cfg.plant = read_plant(r.child("plant"));
    cfg.domain = read_domain(r.child("domain"));

    if (r.has("synthesis")) {
        Reader s = r.child("synthesis");
        cfg.synthesis.bisection_tol = s.number("bisection_tol_per_s", cfg.synthesis.bisection_tol);
        cfg.synthesis.center_box = s.number("center_box", cfg.synthesis.center_box);
        if (cfg.synthesis.bisection_tol <= 0.0 || cfg.synthesis.center_box <= 0.0)
            s.fail("bisection_tol_per_s and center_box must be > 0");
        const json& designs = s.at("designs");
        if (!designs.is_array())
            s.fail("'designs' must be an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < designs.size(); ++i) {
            Reader d(designs[i], s.sub("designs[" + std::to_string(i) + "]"));
            DesignConfig dc;
            dc.name = d.string("name");
            if (dc.name.empty() || dc.name.find_first_of("/\\ ") != std::string::npos)
                d.fail("name must be non-empty without spaces or slashes");
            if (!names.insert(dc.name).second)
                d.fail("duplicate design name '" + dc.name + "'");
            try {
                dc.mode = gain_mode_from_string(d.string("mode"));
            } catch (const std::exception& e) {
                d.fail(e.what());
            }
            const json& lam = d.at("lambda_per_s");
            if (lam.is_string() && lam.get<std::string>() == "max") {
                dc.lambda.reset();
            } else if (lam.is_number() && lam.get<double>() >= 0.0) {
                dc.lambda = lam.get<double>();
            } else {
                d.fail("lambda_per_s must be a non-negative number or \"max\"");
            }
            d.finish();
            cfg.synthesis.designs.push_back(std::move(dc));
        }
        s.finish();
    }

    if (const json* scenarios = r.maybe("scenarios")) {
        if (!scenarios->is_array())
            r.fail("'scenarios' must be an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < scenarios->size(); ++i) {
            Reader s((*scenarios)[i], "scenarios[" + std::to_string(i) + "]");
            ScenarioConfig sc;
            Scenario& x = sc.scenario;
            x.name = s.string("name");
            if (x.name.empty() || x.name.find_first_of("/\\ ") != std::string::npos)
                s.fail("name must be non-empty without spaces or slashes");
            if (!names.insert(x.name).second)
                s.fail("duplicate scenario name '" + x.name + "'");
            x.x0 = read_state(s.child("x0"));
            x.xhat0 = s.has("xhat0") ? read_state(s.child("xhat0")) : x.x0;
            x.input = s.has("input") ? read_input(s.child("input")) : InputSignal::zero();
            x.horizon = s.number("horizon_s", x.horizon);
            x.dt = s.number("dt_s", x.dt);
            const long long every = s.integer("record_every", 1);
            if (every < 1)
                s.fail("record_every must be >= 1");
            x.record_every = static_cast<int>(every);
            x.freeze_schedule = s.boolean("freeze_schedule", false);
            if (const json* d = s.maybe("designs"))
                sc.designs = read_names(*d, s, "designs");
            for (const auto& name : sc.designs)
                if (cfg.find_design(name) == nullptr)
                    s.fail("unknown design '" + name + "'");
            if (const json* b = s.maybe("baseline")) {
                if (!b->is_string())
                    s.fail("'baseline' must be a design name");
                sc.baseline = b->get<std::string>();
                if (std::find(sc.designs.begin(), sc.designs.end(), sc.baseline) == sc.designs.end())
                    s.fail("baseline '" + sc.baseline + "' is not among the scenario designs");
            } else if (!sc.designs.empty()) {
                sc.baseline = sc.designs.front();
            }
            s.finish();
            try {
                x.validate(1);
            } catch (const std::exception& e) {
                s.fail(e.what());
            }
            cfg.scenarios.push_back(std::move(sc));
        }
    }

    if (r.has("output")) {
        Reader o = r.child("output");
        if (const json* d = o.maybe("directory")) {
            if (!d->is_string() || d->get<std::string>().empty())
                o.fail("'directory' must be a non-empty string");
            cfg.output.directory = d->get<std::string>();
        }
        const long long every = o.integer("csv_every", 1);
        if (every < 1)
            o.fail("csv_every must be >= 1");
        cfg.output.csv_every = static_cast<std::size_t>(every);
        o.finish();
    }
    r.finish();
    cfg.hash = hex64(fnv1a(root.dump()));
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace phobs::cli
