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

#include "phobs_cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "phobs/metrics.hpp"
#include "phobs/symmetric_eigen.hpp"
#include "phobs/synthesis.hpp"

namespace phobs::cli {

using nlohmann::json;

unsigned thread_limit() {
    if (const char* env = std::getenv("PHOBS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1)
            return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

namespace {

constexpr unsigned kVerifySeed = 20240611;
constexpr std::size_t kVerifySamples = 1000;

std::string num(double v, const char* fmt = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string banner(const Config& cfg, const std::string& title) {
    return "# " + title + "\n# phobs " + tool_version() + ", config " + cfg.hash + "\n";
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size(), 0);
    const auto fit = [&width](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
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
    std::size_t total = 2 * (width.size() - 1);
    for (auto w : width)
        total += w;
    os << std::string(total, '-') << '\n';
    for (const auto& r : rows)
        line(r);
    return os.str();
}

std::filesystem::path out_dir(const Config& cfg, const CommandOptions& opt) {
    std::filesystem::path dir = opt.out_dir.empty() ? cfg.output.directory : opt.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

std::vector<DesignConfig> selected_designs(const Config& cfg, const CommandOptions& opt) {
    std::vector<DesignConfig> out;
    for (auto d : cfg.synthesis.designs) {
        if (opt.mode && d.mode != *opt.mode)
            continue;
        if (opt.lambda)
            d.lambda = *opt.lambda;
        out.push_back(std::move(d));
    }
    return out;
}

FeasibilityOptions feasibility_options(const Config& cfg) {
    FeasibilityOptions o;
    o.center_box = cfg.synthesis.center_box;
    return o;
}

void fill_from_result(DesignRecord& rec, const SynthesisResult& r) {
    rec.P = r.P;
    rec.K = r.K;
    rec.L = r.gains;
    rec.kappa = r.kappa;
    rec.max_residual_eigenvalue = r.verification.max_residual_eigenvalue;
    rec.p_min_eigenvalue = r.verification.p_min_eigenvalue;
}

DesignRecord run_design(const Config& cfg, const VertexSet& V, const DesignConfig& d) {
    DesignRecord rec;
    rec.name = d.name;
    rec.mode = d.mode;
    rec.config_hash = cfg.hash;
    const FeasibilityOptions fo = feasibility_options(cfg);
    if (d.lambda) {
        rec.lambda = *d.lambda;
        const SynthesisOutcome out = synthesize(V, *d.lambda, d.mode, fo);
        rec.status = out.status;
        rec.phase1_t = out.feasibility.phase1_t;
        rec.phase1_lower_bound = out.feasibility.phase1_lower_bound;
        rec.detail = out.feasibility.detail;
        if (out.result)
            fill_from_result(rec, *out.result);
        return rec;
    }
    rec.lambda_from_search = true;
    DecayRateResult search = max_decay_rate(V, d.mode, cfg.synthesis.bisection_tol, fo);
    rec.lambda = search.lambda_max;
    if (search.certificate) {
        rec.status = FeasibilityStatus::Feasible;
        fill_from_result(rec, *search.certificate);
        rec.detail = "largest verified rate of the bisection";
    } else {
        rec.status = FeasibilityStatus::Infeasible;
        rec.detail = search.zero_infeasible ? "infeasible at lambda = 0" : "no verified probe";
    }
    search.certificate.reset();
    rec.search = std::move(search);
    return rec;
}

SynthesisResult result_from_record(const VertexSet& V, const DesignRecord& rec) {
    return assemble_result(V, rec.lambda, rec.mode, rec.P, rec.K);
}

PHSystem make_system(const Config& cfg) { return PHSystem::dea(cfg.plant); }

struct Setup {
    PHSystem sys;
    ResolvedDomain domain;
    VertexSet V;
};

Setup setup(const Config& cfg) {
    PHSystem sys = make_system(cfg);
    ResolvedDomain dom = resolve_domain(cfg, false);
    VertexSet V = enumerate_vertices(sys, compute_parameter_bounds(sys, dom.box));
    return {std::move(sys), std::move(dom), std::move(V)};
}

// Loads design files written for this config, synthesizing (and writing) the missing or stale ones.
std::map<std::string, DesignRecord> obtain_designs(const Config& cfg, const CommandOptions& opt, const VertexSet& V,
                                                   const std::vector<std::string>& names,
                                                   const std::filesystem::path& dir, std::ostream& out) {
    std::vector<DesignConfig> wanted;
    for (const auto& d : selected_designs(cfg, opt))
        if (std::find(names.begin(), names.end(), d.name) != names.end())
            wanted.push_back(d);
    std::vector<std::optional<DesignRecord>> loaded(wanted.size());
    for (std::size_t i = 0; i < wanted.size(); ++i) {
        try {
            const auto j = read_json(design_path(dir, wanted[i].name));
            if (!j)
                continue;
            DesignRecord rec = design_from_json(*j);
            const bool same_lambda = !wanted[i].lambda || rec.lambda == *wanted[i].lambda;
            if (rec.config_hash == cfg.hash && rec.mode == wanted[i].mode && same_lambda)
                loaded[i] = std::move(rec);
        } catch (const std::exception&) {
        }
    }
    std::vector<char> fresh(wanted.size(), 0);
    parallel_for(wanted.size(), opt.threads, [&](std::size_t i) {
        if (loaded[i])
            return;
        loaded[i] = run_design(cfg, V, wanted[i]);
        fresh[i] = 1;
    });
    std::map<std::string, DesignRecord> by_name;
    for (std::size_t i = 0; i < wanted.size(); ++i) {
        if (fresh[i] != 0) {
            write_text(design_path(dir, wanted[i].name), design_to_json(*loaded[i]).dump(2) + "\n");
            out << "synthesized " << wanted[i].name << " (" << to_string(loaded[i]->status) << ")\n";
        }
        by_name.emplace(wanted[i].name, std::move(*loaded[i]));
    }
    return by_name;
}

std::string domain_text(const OperatingDomain& box, const ParameterBounds& bounds) {
    std::ostringstream os;
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < box.q_min.size(); ++i) {
        const std::string s = box.q_min.size() == 1 ? "" : std::to_string(i + 1);
        rows.push_back({"q" + s + " [m]", num(box.q_min(i), "%.9g"), num(box.q_max(i), "%.9g")});
        rows.push_back({"p" + s + " [kg m/s]", num(box.p_min(i), "%.9g"), num(box.p_max(i), "%.9g")});
    }
    for (Eigen::Index j = 0; j < box.u_min.size(); ++j) {
        const std::string s = box.u_min.size() == 1 ? "" : std::to_string(j + 1);
        rows.push_back({"u" + s + " [V^2]", num(box.u_min(j), "%.9g"), num(box.u_max(j), "%.9g")});
    }
    os << table({"Operating domain", "min", "max"}, rows) << '\n';
    rows.clear();
    for (const auto& p : bounds.params)
        rows.push_back({p.name, num(p.min, "%.7g"), num(p.max, "%.7g")});
    os << table({"Scheduling parameter", "min", "max"}, rows);
    return os.str();
}

struct RunResult {
    Trajectory traj;
    MetricsReport metrics;
    BoundCheck bound;
    const DesignRecord* design = nullptr;
};

RunResult run_scenario(const Setup& s, const Scenario& scenario, const DesignRecord* rec, const std::string& label) {
    RunResult rr;
    rr.design = rec;
    IntegrateOptions io;
    io.domain = &s.domain.box;
    if (rec == nullptr) {
        rr.traj = integrate(s.sys, static_cast<const ObserverGain*>(nullptr), scenario, io);
        return rr;
    }
    const SynthesisResult result = result_from_record(s.V, *rec);
    rr.traj = integrate(s.sys, &result, scenario, io);
    rr.metrics = compute_metrics(rr.traj, label);
    rr.bound = bound_check(rr.traj, rec->lambda, rec->kappa);
    rr.metrics.bound_margin = rr.bound.max_ratio;
    return rr;
}

std::string scenario_file_stem(const std::string& scenario, const std::string& design) {
    return scenario + "__" + (design.empty() ? std::string("plant") : design);
}

}  // namespace

ResolvedDomain resolve_domain(const Config& cfg, bool with_sweep) {
    const DomainConfig& d = cfg.domain;
    ResolvedDomain out;
    if (d.mode == DomainConfig::Mode::Frozen) {
        out.box = d.box;
        return out;
    }
    const PHSystem sys = make_system(cfg);
    Scenario sc;
    sc.name = "domain";
    sc.x0 = StateVec::zero(sys.n());
    sc.xhat0 = d.observer_x0 ? *d.observer_x0 : sc.x0;
    sc.input = InputSignal::step(d.step_time_s, d.amplitude_V * d.amplitude_V);
    sc.horizon = d.horizon_s;
    sc.dt = d.dt_s;
    std::optional<ObserverGain> observer;
    if (d.observer_gain)
        observer = constant_gain(*d.observer_gain, "domain observer");
    out.box = open_loop_domain(sys, sc, d.margin, observer ? &*observer : nullptr);
    if (with_sweep && d.sweep)
        out.sweep = amplitude_sweep(sys, sc, d.sweep->start_V, d.sweep->rel_tol);
    return out;
}

int cmd_domain(const Config& cfg, const CommandOptions& opt, std::ostream& out) {
    const auto dir = out_dir(cfg, opt);
    const PHSystem sys = make_system(cfg);
    const ResolvedDomain dom = resolve_domain(cfg, true);
    const ParameterBounds bounds = compute_parameter_bounds(sys, dom.box);

    json j;
    j["kind"] = "domain";
    j["tool_version"] = tool_version();
    j["config_hash"] = cfg.hash;
    j["mode"] = cfg.domain.mode == DomainConfig::Mode::Frozen ? "frozen" : "derive";
    j["box"] = domain_to_json(dom.box);
    j["parameter_bounds"] = bounds_to_json(bounds);
    std::string text = banner(cfg, "operating domain") + "\n" + domain_text(dom.box, bounds);
    if (dom.sweep) {
        j["sweep"] = {{"max_voltage_V", dom.sweep->max_voltage},
                      {"first_unbounded_V", dom.sweep->first_unbounded},
                      {"runs", dom.sweep->runs}};
        text += "\nLargest bounded step amplitude: " + num(dom.sweep->max_voltage, "%.1f") + " V (first unbounded " +
                num(dom.sweep->first_unbounded, "%.1f") + " V, " + std::to_string(dom.sweep->runs) + " runs)\n";
    }
    write_text(dir / "domain.json", j.dump(2) + "\n");
    write_text(dir / "domain.txt", text);
    out << text;
    return kExitOk;
}

int cmd_synthesize(const Config& cfg, const CommandOptions& opt, std::ostream& out) {
    const auto dir = out_dir(cfg, opt);
    const Setup s = setup(cfg);
    const std::vector<DesignConfig> designs = selected_designs(cfg, opt);
    std::vector<DesignRecord> records(designs.size());
    parallel_for(designs.size(), opt.threads, [&](std::size_t i) { records[i] = run_design(cfg, s.V, designs[i]); });

    bool all_feasible = true;
    std::vector<std::vector<std::string>> rows;
    std::optional<double> const_max, sched_max;
    for (const auto& rec : records) {
        write_text(design_path(dir, rec.name), design_to_json(rec).dump(2) + "\n");
        all_feasible = all_feasible && rec.usable();
        if (rec.lambda_from_search && rec.usable())
            (rec.mode == GainMode::Constant ? const_max : sched_max) = rec.lambda;
        rows.push_back({rec.name, to_string(rec.mode), num(rec.lambda, "%.4f") + (rec.lambda_from_search ? " (max)" : ""),
                        to_string(rec.status), rec.usable() ? num(rec.max_residual_eigenvalue, "%.3e") : "-",
                        rec.usable() ? num(rec.p_min_eigenvalue, "%.3e") : "-",
                        rec.usable() ? num(rec.kappa, "%.3f") : "-",
                        rec.lambda_from_search ? "-" : num(rec.phase1_t, "%.3e")});
    }
    std::string text = banner(cfg, "observer synthesis") + "\n" +
                       table({"Design", "Mode", "lambda [1/s]", "Status", "max eig S_i", "min eig P", "kappa",
                              "phase I t*"},
                             rows);
    if (const_max && sched_max && *const_max > 0.0)
        text += "\nCertifiable decay rate ratio sched/const: " + num(*sched_max / *const_max, "%.3f") + "\n";
    for (const auto& rec : records)
        if (!rec.usable())
            text += "\n" + rec.name + ": " + rec.detail + "\n";
    write_text(dir / "synthesis.txt", text);
    out << text;
    return all_feasible ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const Config& cfg, const CommandOptions& opt, std::ostream& out) {
    const auto dir = out_dir(cfg, opt);
    const Setup s = setup(cfg);
    std::vector<std::string> needed;
    for (const auto& sc : cfg.scenarios)
        needed.insert(needed.end(), sc.designs.begin(), sc.designs.end());
    const auto designs = obtain_designs(cfg, opt, s.V, needed, dir, out);

    struct Task {
        std::size_t scenario;
        std::string design;  // empty: plant only
    };
    std::vector<Task> tasks;
    bool missing = false;
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const auto& sc = cfg.scenarios[i];
        if (sc.designs.empty())
            tasks.push_back({i, ""});
        for (const auto& name : sc.designs) {
            const auto it = designs.find(name);
            if (it == designs.end())
                continue;  // filtered out by --mode
            if (!it->second.usable()) {
                missing = true;
                out << sc.scenario.name << ": design " << name << " is " << to_string(it->second.status)
                    << ", skipped\n";
                continue;
            }
            tasks.push_back({i, name});
        }
    }
    std::vector<RunResult> runs(tasks.size());
    parallel_for(tasks.size(), opt.threads, [&](std::size_t k) {
        const auto& t = tasks[k];
        const DesignRecord* rec = t.design.empty() ? nullptr : &designs.at(t.design);
        runs[k] = run_scenario(s, cfg.scenarios[t.scenario].scenario, rec, t.design);
    });

    std::string text = banner(cfg, "simulation");
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
        const auto& sc = cfg.scenarios[i];
        json rows = json::array();
        std::vector<MetricsReport> reports;
        std::size_t baseline = 0;
        for (std::size_t k = 0; k < tasks.size(); ++k) {
            if (tasks[k].scenario != i)
                continue;
            const RunResult& rr = runs[k];
            CsvOptions co;
            co.every = cfg.output.csv_every;
            co.comments = {"phobs " + tool_version(), "config " + cfg.hash, "scenario " + sc.scenario.name,
                           "scenario_hash " + rr.traj.scenario_hash,
                           "design " + (tasks[k].design.empty() ? std::string("none") : tasks[k].design)};
            std::ostringstream csv;
            write_csv(csv, rr.traj, co);
            write_text(dir / (scenario_file_stem(sc.scenario.name, tasks[k].design) + ".csv"), csv.str());
            if (rr.design == nullptr)
                continue;
            if (tasks[k].design == sc.baseline)
                baseline = reports.size();
            reports.push_back(rr.metrics);
            json bound = {{"max_ratio", rr.bound.max_ratio},
                          {"passed", rr.bound.passed},
                          {"samples_checked", rr.bound.samples_checked},
                          {"domain_exit_s", rr.bound.domain_exit ? json(*rr.bound.domain_exit) : json(nullptr)}};
            rows.push_back({{"design", tasks[k].design},
                            {"mode", to_string(rr.design->mode)},
                            {"lambda_per_s", rr.design->lambda},
                            {"kappa", rr.design->kappa},
                            {"metrics", metrics_to_json(rr.metrics)},
                            {"bound_check", bound},
                            {"clamped_samples", rr.traj.clamped_samples}});
        }
        json j;
        j["kind"] = "metrics";
        j["tool_version"] = tool_version();
        j["config_hash"] = cfg.hash;
        j["scenario"] = sc.scenario.name;
        j["scenario_hash"] = scenario_hash(sc.scenario);
        j["baseline"] = reports.empty() ? json(nullptr) : json(reports[baseline].label);
        j["rows"] = rows;
        write_text(metrics_path(dir, sc.scenario.name), j.dump(2) + "\n");
        text += "\n";
        if (reports.empty()) {
            text += "Scenario " + sc.scenario.name + ": plant only\n";
            continue;
        }
        text += format_metrics_table(reports, "Scenario " + sc.scenario.name);
        text += "\n" + format_comparison(compare(reports, baseline), reports[baseline].label);
    }
    write_text(dir / "simulate.txt", text);
    out << text;
    return missing ? kExitInfeasible : kExitOk;
}

int cmd_verify(const Config& cfg, const CommandOptions& opt, std::ostream& out) {
    const auto dir = out_dir(cfg, opt);
    const Setup s = setup(cfg);
    const OperatingDomain& box = s.domain.box;
    bool ok = true;
    json checks = json::array();
    std::vector<std::vector<std::string>> rows;
    const auto record = [&](const std::string& name, const std::string& value, const std::string& limit, bool passed,
                            bool advisory = false) {
        if (!advisory)
            ok = ok && passed;
        const std::string verdict = passed ? "pass" : (advisory ? "advisory" : "FAIL");
        checks.push_back({{"check", name}, {"value", value}, {"limit", limit}, {"result", verdict}});
        rows.push_back({name, value, limit, verdict});
    };

    // Static checks on random samples of the domain.
    {
        std::mt19937_64 rng(kVerifySeed);
        const auto uni = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
        const auto sample_state = [&] {
            StateVec x = StateVec::zero(s.sys.n());
            for (Eigen::Index i = 0; i < x.dim(); ++i) {
                x.q(i) = uni(box.q_min(i), box.q_max(i));
                x.p(i) = uni(box.p_min(i), box.p_max(i));
            }
            return x;
        };
        const Eigen::MatrixXd A0 = drift_matrix(s.sys);
        double mv = 0.0, pu = 0.0, hmin = 1.0, rec = 0.0;
        for (std::size_t k = 0; k < kVerifySamples; ++k) {
            const StateVec x = sample_state();
            const StateVec xh = sample_state();
            Eigen::VectorXd u(s.sys.m());
            for (Eigen::Index j = 0; j < u.size(); ++j)
                u(j) = uni(box.u_min(j), box.u_max(j));
            Eigen::MatrixXd L(s.sys.state_dim(), s.sys.m());
            for (Eigen::Index r = 0; r < L.rows(); ++r)
                for (Eigen::Index c = 0; c < L.cols(); ++c)
                    L(r, c) = uni(-1e9, 1e9);
            const double lhs = (gamma_eval(s.sys, x, u, L) - gamma_eval(s.sys, xh, u, L)).norm();
            const double res = mean_value_check(s.sys, x, xh, u, L);
            mv = std::max(mv, lhs > 0.0 ? res / lhs : res);
            const WeightVector h = weights(s.sys, s.V.bounds, xh, u);
            pu = std::max(pu, std::abs(h.h.sum() - 1.0));
            hmin = std::min(hmin, h.h.minCoeff());
            const Eigen::MatrixXd ref = A0 + jacobian_gamma(s.sys, xh, u, L);
            const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
            rec = std::max(rec, (reconstruct(h, s.V, L) - ref).cwiseAbs().maxCoeff() / scale);
        }
        const std::string n = " (" + std::to_string(kVerifySamples) + " samples)";
        record("mean-value identity, relative" + n, num(mv, "%.3e"), "< 1e-12", mv < 1e-12);
        record("partition of unity |sum h - 1|" + n, num(pu, "%.3e"), "< 1e-12", pu < 1e-12);
        record("min weight" + n, num(hmin, "%.3e"), ">= -1e-15", hmin >= -1e-15);
        record("vertex reconstruction, relative" + n, num(rec, "%.3e"), "< 1e-10", rec < 1e-10);
    }

    // Stored certificates.
    std::map<std::string, DesignRecord> designs;
    for (const auto& d : selected_designs(cfg, opt)) {
        std::optional<json> j;
        DesignRecord rec;
        try {
            j = read_json(design_path(dir, d.name));
            if (!j) {
                rows.push_back({"design " + d.name, "not run", "-", "-"});
                checks.push_back({{"check", "design " + d.name}, {"value", "not run"}, {"limit", "-"}, {"result", "not run"}});
                continue;
            }
            rec = design_from_json(*j);
        } catch (const std::exception& e) {
            record("design " + d.name + " file", e.what(), "readable", false);
            continue;
        }
        if (rec.config_hash != cfg.hash) {
            record("design " + d.name + " config hash", rec.config_hash, cfg.hash, false);
            continue;
        }
        if (!rec.usable()) {
            record("design " + d.name + " status", to_string(rec.status), "feasible", false);
            continue;
        }
        const LMIProblem prob = build_problem(s.V, rec.lambda, rec.mode);
        const VerificationReport vr = verify_solution(prob, rec.P, rec.K);
        record("design " + d.name + " max eig S_i", num(vr.max_residual_eigenvalue, "%.3e"), "< 0",
               vr.passed && vr.max_residual_eigenvalue < 0.0);
        record("design " + d.name + " min eig P", num(vr.p_min_eigenvalue, "%.3e"), "> 0", vr.p_min_eigenvalue > 0.0);
        if (!vr.passed || vr.p_min_eigenvalue <= 0.0)
            continue;
        if (rec.mode == GainMode::Constant) {
            const Eigen::MatrixXd L0 = rec.P.llt().solve(rec.K.front());
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < s.V.size(); ++i) {
                const Eigen::MatrixXd Acl = s.V.A_bar[i] - L0 * s.V.C_bar[i];
                worst = std::max(worst, Acl.eigenvalues().real().maxCoeff());
            }
            record("design " + d.name + " vertex spectral abscissa", num(worst, "%.6g"),
                   "<= " + num(-rec.lambda + 1e-6, "%.6g"), worst <= -rec.lambda + 1e-6);
        }
        designs.emplace(d.name, std::move(rec));
    }

    // Exponential bound along the configured scenarios.
    struct Task {
        std::size_t scenario;
        std::string design;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
        for (const auto& name : cfg.scenarios[i].designs)
            if (designs.count(name) != 0)
                tasks.push_back({i, name});
    std::vector<BoundCheck> bounds(tasks.size());
    parallel_for(tasks.size(), opt.threads, [&](std::size_t k) {
        const DesignRecord& rec = designs.at(tasks[k].design);
        bounds[k] = run_scenario(s, cfg.scenarios[tasks[k].scenario].scenario, &rec, rec.name).bound;
    });
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const DesignRecord& rec = designs.at(tasks[k].design);
        // A scheduled gain uses weights of the estimate while the error matrix is a segment average,
        // so its certificate does not bound the trajectory; the ratio is reported only.
        const bool advisory = rec.mode == GainMode::Scheduled;
        std::string value = num(bounds[k].max_ratio, "%.4f");
        if (bounds[k].domain_exit)
            value += " (until t = " + num(*bounds[k].domain_exit, "%.4f") + " s)";
        record("bound " + cfg.scenarios[tasks[k].scenario].scenario.name + "/" + rec.name, value, "<= 1",
               bounds[k].passed, advisory);
    }

    json j;
    j["kind"] = "verification";
    j["tool_version"] = tool_version();
    j["config_hash"] = cfg.hash;
    j["seed"] = kVerifySeed;
    j["passed"] = ok;
    j["checks"] = checks;
    write_text(dir / "verify.json", j.dump(2) + "\n");
    const std::string text = banner(cfg, "verification") + "# seed " + std::to_string(kVerifySeed) + "\n\n" +
                             table({"Check", "Value", "Limit", "Result"}, rows) + "\n" +
                             (ok ? "all checks passed\n" : "VERIFICATION FAILED\n");
    write_text(dir / "verify.txt", text);
    out << text;
    return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_report(const Config& cfg, const CommandOptions& opt, std::ostream& out) {
    const auto dir = out_dir(cfg, opt);
    std::ostringstream os;
    os << "phobs report\n"
       << "tool version " << tool_version() << "\n"
       << "config hash  " << cfg.hash << "\n\n";

    const DEAParams& p = cfg.plant;
    os << "Plant: m = " << num(p.mass_kg) << " kg, k = " << num(p.stiffness_N_per_m) << " N/m, eta = "
       << num(p.damping_Ns_per_m) << " N s/m, q0 = " << num(p.q0_m) << " m, eps = " << num(p.eps_F_per_m)
       << " F/m\n\n";

    const auto fresh = [&](const std::optional<json>& j) {
        return j && j->value("config_hash", "") == cfg.hash ? j : std::nullopt;
    };

    os << "== Operating domain ==\n";
    if (const auto dj = fresh(read_json(dir / "domain.json"))) {
        const OperatingDomain box = domain_from_json(dj->at("box"));
        ParameterBounds b;
        for (const auto& e : dj->at("parameter_bounds")) {
            SchedulingParameter sp;
            sp.name = e.at("name").get<std::string>();
            sp.min = e.at("min").get<double>();
            sp.max = e.at("max").get<double>();
            b.params.push_back(sp);
        }
        os << domain_text(box, b);
        if (dj->contains("sweep"))
            os << "Largest bounded step amplitude: " << num(dj->at("sweep").at("max_voltage_V").get<double>(), "%.1f")
               << " V\n";
    } else {
        os << "not run\n";
    }

    os << "\n== Certified decay rates ==\n";
    std::vector<std::vector<std::string>> rows;
    std::optional<double> const_max, sched_max;
    for (const auto& d : cfg.synthesis.designs) {
        const auto j = fresh(read_json(design_path(dir, d.name)));
        if (!j) {
            rows.push_back({d.name, to_string(d.mode), d.lambda ? num(*d.lambda, "%.4f") : "max", "not run", "-", "-"});
            continue;
        }
        const DesignRecord rec = design_from_json(*j);
        if (rec.lambda_from_search && rec.usable())
            (rec.mode == GainMode::Constant ? const_max : sched_max) = rec.lambda;
        rows.push_back({rec.name, to_string(rec.mode),
                        num(rec.lambda, "%.4f") + (rec.lambda_from_search ? " (max)" : ""), to_string(rec.status),
                        rec.usable() ? num(rec.max_residual_eigenvalue, "%.3e") : "-",
                        rec.usable() ? num(rec.kappa, "%.3f") : "-"});
    }
    os << table({"Design", "Mode", "lambda [1/s]", "Status", "max eig S_i", "kappa"}, rows);
    if (const_max && sched_max && *const_max > 0.0)
        os << "ratio sched/const: " << num(*sched_max / *const_max, "%.3f") << "\n";

    for (const auto& sc : cfg.scenarios) {
        os << "\n== Scenario " << sc.scenario.name << " ==\n";
        const auto j = fresh(read_json(metrics_path(dir, sc.scenario.name)));
        if (!j) {
            os << "not run\n";
            continue;
        }
        if (j->at("rows").empty()) {
            os << "plant only\n";
            continue;
        }
        std::vector<MetricsReport> reports;
        std::size_t baseline = 0;
        std::vector<std::vector<std::string>> brows;
        for (const auto& r : j->at("rows")) {
            MetricsReport m = metrics_from_json(r.at("metrics"));
            if (m.label == j->at("baseline").get<std::string>())
                baseline = reports.size();
            const auto& bc = r.at("bound_check");
            brows.push_back({m.label, num(r.at("kappa").get<double>(), "%.3f"),
                             num(bc.at("max_ratio").get<double>(), "%.4f"),
                             bc.at("domain_exit_s").is_null() ? "-" : num(bc.at("domain_exit_s").get<double>(), "%.4f"),
                             std::to_string(r.at("clamped_samples").get<std::size_t>())});
            reports.push_back(std::move(m));
        }
        for (const auto& name : sc.designs) {
            const bool present = std::any_of(reports.begin(), reports.end(),
                                             [&](const MetricsReport& m) { return m.label == name; });
            if (!present)
                os << name << ": not run\n";
        }
        os << format_metrics_table(reports, "scenario hash " + j->at("scenario_hash").get<std::string>());
        os << "\n" << format_comparison(compare(reports, baseline), reports[baseline].label);
        os << "\n" << table({"Exponential bound", "kappa", "max ratio", "domain exit [s]", "clamped"}, brows);
    }

    os << "\n== Verification ==\n";
    if (const auto vj = fresh(read_json(dir / "verify.json"))) {
        std::vector<std::vector<std::string>> vrows;
        for (const auto& c : vj->at("checks"))
            vrows.push_back({c.at("check").get<std::string>(), c.value("value", "-"), c.value("limit", "-"),
                             c.at("result").get<std::string>()});
        os << table({"Check", "Value", "Limit", "Result"}, vrows);
        os << (vj->at("passed").get<bool>() ? "all checks passed\n" : "VERIFICATION FAILED\n");
    } else {
        os << "not run\n";
    }

    write_text(dir / "report.txt", os.str());
    out << os.str();
    return kExitOk;
}

}  // namespace phobs::cli
