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

// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"
#include "phobs/metrics.hpp"
#include "phobs/simulator.hpp"
#include "phobs/synthesis.hpp"
#include "phobs_cli/config.hpp"

namespace fs = std::filesystem;
using namespace phobs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "!") + what);
    }
    void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sig6(double v) { return fmt("%.5e", v); }

bool within(double value, double ref, double rel_tol) { return std::abs(value - ref) <= rel_tol * std::abs(ref); }

// Shared state: the shipped configuration and its plant, box and vertices.
struct Setup {
    cli::Config cfg;
    PHSystem sys;
    VertexSet V;
    FeasibilityOptions fo;

    Setup()
        : cfg(cli::load_config(fs::path(PHOBS_CONFIG_DIR) / "dea.cfg")), sys(PHSystem::dea(cfg.plant)),
          V(enumerate_vertices(sys, compute_parameter_bounds(sys, cfg.domain.box))) {
        fo.center_box = cfg.synthesis.center_box;
    }

    [[nodiscard]] const cli::ScenarioConfig& scenario(const std::string& name) const {
        for (const auto& s : cfg.scenarios)
            if (s.scenario.name == name)
                return s;
        throw std::runtime_error("scenario " + name + " missing from the config");
    }

    [[nodiscard]] SynthesisResult design(const std::string& name) const {
        const cli::DesignConfig* d = cfg.find_design(name);
        if (d == nullptr || !d->lambda)
            throw std::runtime_error("design " + name + " missing or without a fixed rate");
        auto out = synthesize(V, *d->lambda, d->mode, fo);
        if (!out.result)
            throw std::runtime_error("design " + name + " is " + to_string(out.status));
        return *out.result;
    }
};

const Setup& setup() {
    static const Setup s;
    return s;
}

Outcome criterion1() {
    Outcome o;
    const Setup& s = setup();
    const auto t0 = Clock::now();
    const ParameterBounds b = compute_parameter_bounds(s.sys, s.cfg.domain.box);
    const double elapsed = seconds_since(t0);
    const std::pair<const char*, std::pair<double, double>> refs[] = {
        {"a", {1.65281e-5, 3.61820e-5}},
        {"beta", {-2.280516e-7, 8.064450e-8}},
        {"g", {5.46459e-9, 1.76996e-8}},
    };
    for (const auto& [name, mm] : refs) {
        const auto& p = b.find(name);
        o.check(sig6(p.min) == sig6(mm.first) && sig6(p.max) == sig6(mm.second),
                std::string(name) + " [" + sig6(p.min) + ", " + sig6(p.max) + "]");
    }
    o.check(elapsed < 1e-3, "runtime " + fmt("%.3g", elapsed * 1e3) + " ms < 1 ms");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const Setup& s = setup();
    const auto t0 = Clock::now();
    const double tol = s.cfg.synthesis.bisection_tol;
    const DecayRateResult c = max_decay_rate(s.V, GainMode::Constant, tol, s.fo);
    const DecayRateResult h = max_decay_rate(s.V, GainMode::Scheduled, tol, s.fo);
    const double elapsed = seconds_since(t0);
    o.check(within(c.lambda_max, 0.897, 0.05), "const lambda_max " + fmt("%.4f", c.lambda_max) + " vs 0.897 +-5%");
    o.check(within(h.lambda_max, 4.554, 0.05), "sched lambda_max " + fmt("%.4f", h.lambda_max) + " vs 4.554 +-5%");
    o.check(c.certificate && c.certificate->verification.passed, "const certificate at lambda_max");
    o.check(h.certificate && h.certificate->verification.passed, "sched certificate at lambda_max");
    const double ratio = h.lambda_max / c.lambda_max;
    o.check(ratio >= 4.0, "ratio " + fmt("%.3f", ratio) + " >= 4");
    for (const auto& [lambda, mode] : {std::pair{0.897, GainMode::Constant}, std::pair{4.554, GainMode::Scheduled}}) {
        const auto r = synthesize(s.V, lambda, mode, s.fo);
        o.check(r.result && r.result->verification.passed,
                to_string(mode) + " certificate at " + fmt("%.3f", lambda) + ": " + to_string(r.status));
    }
    o.check(elapsed < 60.0, "search runtime " + fmt("%.1f", elapsed) + " s < 60 s");
    return o;
}

Outcome criterion3() {
    Outcome o;
    const Setup& s = setup();
    std::vector<std::pair<double, GainMode>> probes;
    for (double l : {0.0, 0.0897, 0.4, 0.897})
        probes.emplace_back(l, GainMode::Constant);
    for (double l : {0.0, 0.0897, 0.897, 2.0, 4.0, 4.554})
        probes.emplace_back(l, GainMode::Scheduled);
    int feasible = 0;
    double worst_s = -std::numeric_limits<double>::infinity();
    double min_p = std::numeric_limits<double>::infinity();
    double worst_abscissa_gap = -std::numeric_limits<double>::infinity();
    for (const auto& [lambda, mode] : probes) {
        const auto r = synthesize(s.V, lambda, mode, s.fo);
        if (r.status != FeasibilityStatus::Feasible || !r.result)
            continue;
        ++feasible;
        const SynthesisResult& d = *r.result;
        // Independent of the in-repo Jacobi solver.
        min_p = std::min(min_p, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d.P).eigenvalues().minCoeff());
        const LMIProblem prob = build_problem(s.V, lambda, mode);
        for (const auto& c : prob.constraints) {
            const Eigen::MatrixXd S = lmi_residual(c, d.P, d.K[c.gain], lambda);
            worst_s = std::max(worst_s, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().maxCoeff());
        }
        if (mode == GainMode::Constant)
            for (std::size_t i = 0; i < s.V.size(); ++i) {
                const Eigen::MatrixXd Acl = s.V.A_bar[i] - d.gains[0] * s.V.C_bar[i];
                const double abscissa = Eigen::EigenSolver<Eigen::MatrixXd>(Acl).eigenvalues().real().maxCoeff();
                worst_abscissa_gap = std::max(worst_abscissa_gap, abscissa + lambda);
            }
    }
    o.check(feasible >= 8, std::to_string(feasible) + " feasible syntheses");
    o.check(worst_s < 0.0, "max lambda_max(S_i) " + fmt("%.3e", worst_s) + " < 0");
    o.check(min_p > 0.0, "min lambda_min(P) " + fmt("%.3e", min_p) + " > 0");
    o.check(worst_abscissa_gap <= 1e-6, "max Re eig(A_i - L C_i) + lambda " + fmt("%.3e", worst_abscissa_gap) + " <= 1e-6");
    return o;
}

// Uniform samples of (x, xhat, u) in the box and gains with entries in [-1e9, 1e9].
struct Sampler {
    std::mt19937_64 rng{20240611};
    const OperatingDomain& box;

    explicit Sampler(const OperatingDomain& b) : box(b) {}
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    StateVec state() {
        StateVec x = StateVec::zero(box.q_min.size());
        for (Eigen::Index i = 0; i < x.dim(); ++i) {
            x.q(i) = uni(box.q_min(i), box.q_max(i));
            x.p(i) = uni(box.p_min(i), box.p_max(i));
        }
        return x;
    }
    Eigen::VectorXd input() {
        Eigen::VectorXd u(box.u_min.size());
        for (Eigen::Index j = 0; j < u.size(); ++j)
            u(j) = uni(box.u_min(j), box.u_max(j));
        return u;
    }
    Eigen::MatrixXd gain(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd L(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                L(r, c) = uni(-1e9, 1e9);
        return L;
    }
};

Outcome criterion4() {
    Outcome o;
    const Setup& s = setup();
    Sampler smp(s.cfg.domain.box);
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const StateVec x = smp.state();
        const StateVec xh = smp.state();
        const Eigen::VectorXd u = smp.input();
        const Eigen::MatrixXd L = smp.gain(s.sys.state_dim(), s.sys.m());
        const double lhs = (gamma_eval(s.sys, x, u, L) - gamma_eval(s.sys, xh, u, L)).norm();
        const double res = mean_value_check(s.sys, x, xh, u, L);
        worst = std::max(worst, lhs > 0.0 ? res / lhs : res);
    }
    const double elapsed = seconds_since(t0);
    o.check(worst < 1e-12, "max relative residual " + fmt("%.3e", worst) + " < 1e-12");
    o.check(elapsed < 5.0, "runtime " + fmt("%.3f", elapsed) + " s < 5 s");
    return o;
}

Outcome criterion5() {
    Outcome o;
    const Setup& s = setup();
    Sampler smp(s.cfg.domain.box);
    const Eigen::MatrixXd A0 = drift_matrix(s.sys);
    double pu = 0.0, hmin = 1.0, rec = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const StateVec xh = smp.state();
        const Eigen::VectorXd u = smp.input();
        const Eigen::MatrixXd L = smp.gain(s.sys.state_dim(), s.sys.m());
        const WeightVector h = weights(s.sys, s.V.bounds, xh, u);
        pu = std::max(pu, std::abs(h.h.sum() - 1.0));
        hmin = std::min(hmin, h.h.minCoeff());
        const Eigen::MatrixXd ref = A0 + jacobian_gamma(s.sys, xh, u, L);
        const Eigen::MatrixXd got = reconstruct(h, s.V, L);
        for (Eigen::Index i = 0; i < ref.size(); ++i) {
            const double scale = std::abs(ref(i)) > 0.0 ? std::abs(ref(i)) : 1.0;
            rec = std::max(rec, std::abs(got(i) - ref(i)) / scale);
        }
    }
    o.check(pu < 1e-12, "|sum h - 1| " + fmt("%.3e", pu) + " < 1e-12");
    o.check(hmin >= -1e-15, "min h " + fmt("%.3e", hmin) + " >= -1e-15");
    o.check(rec < 1e-10, "entrywise reconstruction " + fmt("%.3e", rec) + " < 1e-10");
    return o;
}

struct Run {
    SynthesisResult design;
    Trajectory traj;
    MetricsReport metrics;
    BoundCheck bound;
};

Run run_design(const std::string& scenario, const std::string& design) {
    const Setup& s = setup();
    Run r{s.design(design), {}, {}, {}};
    IntegrateOptions io;
    io.domain = &s.cfg.domain.box;
    r.traj = integrate(s.sys, &r.design, s.scenario(scenario).scenario, io);
    r.metrics = compute_metrics(r.traj, design);
    r.bound = bound_check(r.traj, r.design.lambda, r.design.kappa);
    return r;
}

Outcome criterion6() {
    Outcome o;
    const Run c = run_design("scenario1", "const_s1");
    const Run h = run_design("scenario1", "sched_s1");
    // Peak |q~| is the initial error, so it is an exact check regardless of tolerance.
    for (const Run* r : {&c, &h})
        o.check(std::abs(r->metrics.peak_qerr - 2e-4) <= 1e-15,
                r->metrics.label + " peak |q~| " + fmt("%.6g", r->metrics.peak_qerr * 1e6) + " um");

    Outcome table;
    const auto reference = [&table](const Run& r, double peak_p, double ts, double overshoot) {
        const MetricsReport& m = r.metrics;
        table.check(within(m.peak_perr * 1e3, peak_p, 0.15),
                    m.label + " peak |p~| " + fmt("%.3f", m.peak_perr * 1e3) + " vs " + fmt("%.2f", peak_p) + " +-15%");
        table.check(m.settling_time && within(*m.settling_time, ts, 0.20),
                    m.label + " Ts " + (m.settling_time ? fmt("%.3f", *m.settling_time) : "n/a") + " vs " +
                        fmt("%.3f", ts) + " +-20%");
        const double ov = m.overshoot_perr_pct.value_or(-1e9);
        table.check(std::abs(ov - overshoot) <= 10.0,
                    m.label + " overshoot " + fmt("%.1f", ov) + "% vs " + fmt("%.1f", overshoot) + "% +-10pp");
    };
    reference(c, 2.46, 0.141, 22.8);
    reference(h, 2.88, 0.139, 43.8);
    for (const auto& n : table.notes)
        o.note(n);

    if (table.pass) {
        o.note("table values within tolerance");
    } else {
        // Property fallback: the certified bound at lambda = 0.0897 on in-domain samples.
        for (const Run* r : {&c, &h}) {
            const BoundCheck bc = bound_check(r->traj, 0.0897, r->design.kappa);
            o.check(bc.passed && bc.samples_checked > 1,
                    "fallback " + r->metrics.label + ": max |x~|/(kappa e^-lt |x~0|) " + fmt("%.4f", bc.max_ratio) +
                        " over " + std::to_string(bc.samples_checked) + " in-domain samples");
        }
    }
    return o;
}

Outcome criterion7() {
    Outcome o;
    const Run c = run_design("scenario2", "const_s2");
    const Run h = run_design("scenario2", "sched_s2_fast");
    const auto peak = improvement_pct(c.metrics.peak_errnorm, h.metrics.peak_errnorm).value_or(-1e9);
    const auto rms = improvement_pct(c.metrics.rms_errnorm, h.metrics.rms_errnorm).value_or(-1e9);
    o.check(h.metrics.overshoot_perr_pct && *h.metrics.overshoot_perr_pct == 0.0,
            "sched overshoot " + fmt("%.3f", h.metrics.overshoot_perr_pct.value_or(-1.0)) + "%");
    o.check(peak >= 20.0, "peak |x~| reduction " + fmt("%.1f", peak) + "% >= 20%");
    o.check(rms >= 20.0, "RMS reduction " + fmt("%.1f", rms) + "% >= 20%");
    const double tc = c.metrics.settling_time.value_or(NAN);
    const double th = h.metrics.settling_time.value_or(NAN);
    o.check(th > tc, "Ts sched " + fmt("%.3f", th) + " s > const " + fmt("%.3f", tc) + " s");
    o.check(within(tc, 0.138, 0.30), "Ts const " + fmt("%.3f", tc) + " vs 0.138 +-30%");
    o.check(within(th, 0.607, 0.30), "Ts sched " + fmt("%.3f", th) + " vs 0.607 +-30%");
    return o;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::abs(b[i]));
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    return scale > 0.0 ? diff / scale : diff;
}

Outcome criterion8() {
    Outcome o;
    const Setup& s = setup();
    const SynthesisResult d = s.design("const_s2");
    const ObserverGain g = design_gain(s.sys, d);
    Scenario sc = s.scenario("scenario2").scenario;
    sc.horizon = 1.5;
    sc.record_every = 1;
    std::vector<Eigen::VectorXd> finals;
    // Coarse enough that the differences stay well above accumulated round-off (about 1e-17 here).
    for (double dt : {8e-4, 4e-4, 2e-4}) {
        sc.dt = dt;
        const Trajectory tr = integrate(s.sys, &g, sc);
        const std::size_t k = tr.size() - 1;
        Eigen::VectorXd z(4);
        z << tr.state(k).stacked(), tr.estimate(k).stacked();
        finals.push_back(z);
    }
    const double e1 = (finals[0] - finals[1]).norm();
    const double e2 = (finals[1] - finals[2]).norm();
    const double order = std::log2(e1 / e2);
    o.check(order >= 3.8, "observed order " + fmt("%.3f", order) + " >= 3.8 (dt 8e-4/4e-4/2e-4)");

    const Scenario full = s.scenario("scenario2").scenario;
    const double diff = rel_diff(integrate_error_form(s.sys, g, full).xerr, integrate(s.sys, &g, full).xerr);
    o.check(diff < 1e-8, "coupled vs error form " + fmt("%.3e", diff) + " < 1e-8");
    return o;
}

Outcome criterion9() {
    Outcome o;
    const Setup& s = setup();
    const SynthesisResult c = s.design("const_s1");
    SynthesisResult h = c;
    h.mode = GainMode::Scheduled;
    h.bounds = s.V.bounds;
    h.gains.assign(s.V.size(), c.gains.front());
    const Scenario& sc = s.scenario("scenario1").scenario;
    const Trajectory tc = integrate(s.sys, &c, sc);
    const Trajectory th = integrate(s.sys, &h, sc);
    const double dx = rel_diff(th.xhat, tc.xhat);
    const double de = rel_diff(th.xerr, tc.xerr);
    o.check(dx < 1e-13, "estimate " + fmt("%.3e", dx) + " < 1e-13");
    o.check(de < 1e-13, "error " + fmt("%.3e", de) + " < 1e-13");
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion10() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / ("phobs_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const fs::path cfg = fs::path(PHOBS_CONFIG_DIR) / "dea.cfg";
    std::vector<fs::path> dirs{root / "a", root / "b"};
    for (const auto& dir : dirs)
        for (const char* cmd : {"synthesize", "simulate", "domain", "verify", "report"}) {
            const std::string line = std::string(PHOBS_EXE) + " " + cmd + " --config " + cfg.string() + " --out " +
                                     dir.string() + " > " + (root / (dir.filename().string() + "_" + cmd + ".log")).string() +
                                     " 2>&1";
            fs::create_directories(dir);
            const int rc = std::system(line.c_str());
            o.check(rc == 0, dir.filename().string() + ": phobs " + cmd + " exit " + std::to_string(rc));
        }
    std::map<std::string, std::string> first;
    for (const auto& e : fs::directory_iterator(dirs[0]))
        first[e.path().filename().string()] = slurp(e.path());
    std::size_t second = 0;
    std::vector<std::string> differ;
    for (const auto& e : fs::directory_iterator(dirs[1])) {
        ++second;
        const auto it = first.find(e.path().filename().string());
        if (it == first.end() || it->second != slurp(e.path()))
            differ.push_back(e.path().filename().string());
    }
    o.check(second == first.size(), std::to_string(first.size()) + " / " + std::to_string(second) + " files");
    o.check(first.count("report.txt") == 1, "report.txt present");
    o.check(differ.empty(), differ.empty() ? "all files byte-identical" : differ.front() + " differs");
    if (o.pass)
        fs::remove_all(root);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"parameter bounds", criterion1},       {"maximal decay rates", criterion2},
        {"certificate soundness", criterion3},  {"mean-value identity", criterion4},
        {"embedding exactness", criterion5},    {"scenario 1 behavior", criterion6},
        {"scenario 2 behavior", criterion7},    {"integrator validity", criterion8},
        {"degenerate scheduling", criterion9},  {"determinism", criterion10},
    };
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: phobs_acceptance [--only N]\n";
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::cerr << "criterion " << only << " does not exist\n";
        return 2;
    }

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i + 1) != only)
            continue;
        Outcome o;
        const auto t0 = Clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::string detail;
        for (const auto& n : o.notes)
            detail += (detail.empty() ? "" : "; ") + n;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].first << ", "
                  << fmt("%.1f", seconds_since(t0)) << " s): " << detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
