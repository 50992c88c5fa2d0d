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

#include "phobs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace phobs {

InputSignal InputSignal::step(double t_step, double amplitude) {
    InputSignal s;
    s.kind = Kind::Step;
    s.t_step = t_step;
    s.amplitude = amplitude;
    return s;
}

InputSignal InputSignal::piecewise(std::vector<std::pair<double, double>> pieces) {
    std::sort(pieces.begin(), pieces.end());
    InputSignal s;
    s.kind = Kind::Piecewise;
    s.pieces = std::move(pieces);
    return s;
}

double InputSignal::operator()(double t) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Step: return t >= t_step ? amplitude : 0.0;
        case Kind::Piecewise: {
            double v = 0.0;
            for (const auto& [start, value] : pieces) {
                if (t < start)
                    break;
                v = value;
            }
            return v;
        }
    }
    return 0.0;
}

double InputSignal::max_value() const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Step: return std::max(0.0, amplitude);
        case Kind::Piecewise: {
            double v = 0.0;
            for (const auto& p : pieces)
                v = std::max(v, p.second);
            return v;
        }
    }
    return 0.0;
}

double InputSignal::min_value() const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Step: return std::min(0.0, amplitude);
        case Kind::Piecewise: {
            double v = 0.0;
            for (const auto& p : pieces)
                v = std::min(v, p.second);
            return v;
        }
    }
    return 0.0;
}

void Scenario::validate(Eigen::Index n) const {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("scenario '" + name + "': dt must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon))
        throw std::invalid_argument("scenario '" + name + "': horizon must be at least dt");
    if (record_every < 1)
        throw std::invalid_argument("scenario '" + name + "': record_every must be >= 1");
    if (x0.q.size() != n || x0.p.size() != n || xhat0.q.size() != n || xhat0.p.size() != n)
        throw std::invalid_argument("scenario '" + name + "': initial states have the wrong dimension");
    if (!x0.finite() || !xhat0.finite())
        throw std::invalid_argument("scenario '" + name + "': non-finite initial state");
}

std::int64_t Scenario::steps() const { return std::llround(horizon / dt); }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string scenario_hash(const Scenario& s) {
    std::ostringstream os;
    os << std::setprecision(17);
    const auto vec = [&os](const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            os << v(i) << ',';
    };
    os << s.name << '|';
    vec(s.x0.q);
    vec(s.x0.p);
    vec(s.xhat0.q);
    vec(s.xhat0.p);
    os << '|' << static_cast<int>(s.input.kind) << ',' << s.input.t_step << ',' << s.input.amplitude;
    for (const auto& [t, v] : s.input.pieces)
        os << ';' << t << ',' << v;
    os << '|' << s.horizon << ',' << s.dt << ',' << s.record_every << ',' << s.freeze_schedule;
    return hex64(fnv1a(os.str()));
}

ObserverGain constant_gain(const Eigen::MatrixXd& L, std::string source) {
    ObserverGain g;
    g.eval = [L](const StateVec&, const Eigen::VectorXd&, WeightVector*) { return L; };
    g.source = std::move(source);
    return g;
}

ObserverGain design_gain(const PHSystem& sys, const SynthesisResult& result, std::string source) {
    if (result.mode == GainMode::Constant)
        return constant_gain(result.gains.front(), std::move(source));
    ObserverGain g;
    g.scheduled = true;
    g.vertex_count = result.gains.size();
    g.source = std::move(source);
    g.eval = [&sys, &result](const StateVec& xhat, const Eigen::VectorXd& u, WeightVector* h) {
        WeightVector w = weights(sys, result.bounds, xhat, u);
        Eigen::MatrixXd L = result.gain(w.h);
        if (h != nullptr)
            *h = std::move(w);
        return L;
    };
    return g;
}

StateVec Trajectory::state(std::size_t k) const {
    const auto d = static_cast<std::size_t>(2 * n);
    return StateVec::from_stacked(Eigen::Map<const Eigen::VectorXd>(x.data() + k * d, 2 * n));
}

StateVec Trajectory::estimate(std::size_t k) const {
    const auto d = static_cast<std::size_t>(2 * n);
    return StateVec::from_stacked(Eigen::Map<const Eigen::VectorXd>(xhat.data() + k * d, 2 * n));
}

StateVec Trajectory::error(std::size_t k) const { return StateVec::from_stacked(error_stacked(k)); }

Eigen::VectorXd Trajectory::error_stacked(std::size_t k) const {
    const auto d = static_cast<std::size_t>(2 * n);
    return Eigen::Map<const Eigen::VectorXd>(xerr.data() + k * d, 2 * n);
}

double Trajectory::error_norm(std::size_t k) const { return error_stacked(k).norm(); }

namespace {

Eigen::VectorXd observer_output(const PHSystem& sys, const Eigen::VectorXd& x) {
    const Eigen::Index n = sys.n();
    return g2_eval(sys, x.head(n)).transpose() * (sys.M_inv() * x.tail(n));
}

Eigen::VectorXd plant_deriv(const PHSystem& sys, const Eigen::MatrixXd& A0, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Eigen::Index n = sys.n();
    Eigen::VectorXd dx = A0 * x;
    dx.tail(n) += g2_eval(sys, x.head(n)) * u;
    return dx;
}

void append_vec(std::vector<double>& buf, const Eigen::VectorXd& v) { buf.insert(buf.end(), v.data(), v.data() + v.size()); }

void append_mat(std::vector<double>& buf, const Eigen::MatrixXd& v) { buf.insert(buf.end(), v.data(), v.data() + v.size()); }

[[noreturn]] void non_finite(double t) {
    std::ostringstream os;
    os << std::setprecision(17) << "non-finite state at t = " << t << " s";
    throw std::runtime_error(os.str());
}

Trajectory make_trajectory(const PHSystem& sys, const ObserverGain* observer, const Scenario& scenario) {
    Trajectory tr;
    tr.n = sys.n();
    tr.m = sys.m();
    tr.has_observer = observer != nullptr;
    tr.scheduled = observer != nullptr && observer->scheduled;
    tr.vertex_count = tr.scheduled ? observer->vertex_count : 0;
    tr.scenario_hash = scenario_hash(scenario);
    tr.gain_source = observer != nullptr ? observer->source : "none";
    tr.horizon = scenario.horizon;
    tr.dt = scenario.dt;
    const auto rows = static_cast<std::size_t>(scenario.steps() / scenario.record_every + 2);
    tr.t.reserve(rows);
    tr.x.reserve(rows * static_cast<std::size_t>(2 * tr.n));
    return tr;
}

void record(Trajectory& tr, const PHSystem& sys, const ObserverGain* observer, const OperatingDomain* domain, double t,
            const Eigen::VectorXd& x, const Eigen::VectorXd& xh, const Eigen::VectorXd& u) {
    tr.t.push_back(t);
    append_vec(tr.x, x);
    append_vec(tr.y, observer_output(sys, x));
    append_vec(tr.u, u);
    const StateVec xs = StateVec::from_stacked(x);
    bool inside = domain == nullptr || domain->contains(xs);
    if (observer != nullptr) {
        append_vec(tr.xhat, xh);
        const Eigen::VectorXd e = x - xh;
        append_vec(tr.xerr, e);
        append_vec(tr.yhat, observer_output(sys, xh));
        WeightVector w;
        const StateVec xhs = StateVec::from_stacked(xh);
        append_mat(tr.L, observer->eval(xhs, u, &w));
        if (observer->scheduled) {
            append_vec(tr.h, w.h);
            if (w.clamped)
                ++tr.clamped_samples;
        }
        inside = inside && (domain == nullptr || domain->contains(xhs));
    }
    tr.in_domain.push_back(inside ? 1 : 0);
}

}  // namespace

Trajectory integrate(const PHSystem& sys, const ObserverGain* observer, const Scenario& scenario, const IntegrateOptions& options) {
    scenario.validate(sys.n());
    const Eigen::MatrixXd A0 = drift_matrix(sys);
    const Eigen::Index m = sys.m();
    const double dt = scenario.dt;
    const std::int64_t steps = scenario.steps();

    Trajectory tr = make_trajectory(sys, observer, scenario);
    Eigen::VectorXd x = scenario.x0.stacked();
    Eigen::VectorXd xh = scenario.xhat0.stacked();
    const auto input_at = [&](double t) { return Eigen::VectorXd::Constant(m, scenario.input(t)).eval(); };

    const auto observer_deriv = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& xhs, const Eigen::VectorXd& u,
                                    const Eigen::MatrixXd* frozen) {
        const Eigen::MatrixXd L = frozen != nullptr ? *frozen : observer->eval(StateVec::from_stacked(xhs), u, nullptr);
        Eigen::VectorXd d = plant_deriv(sys, A0, xhs, u);
        d += L * (observer_output(sys, xs) - observer_output(sys, xhs));
        return d;
    };

    record(tr, sys, observer, options.domain, 0.0, x, xh, input_at(0.0));
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Eigen::VectorXd u = input_at(t + 0.5 * dt);
        if (observer == nullptr) {
            const Eigen::VectorXd k1 = plant_deriv(sys, A0, x, u);
            const Eigen::VectorXd k2 = plant_deriv(sys, A0, x + 0.5 * dt * k1, u);
            const Eigen::VectorXd k3 = plant_deriv(sys, A0, x + 0.5 * dt * k2, u);
            const Eigen::VectorXd k4 = plant_deriv(sys, A0, x + dt * k3, u);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        } else {
            std::optional<Eigen::MatrixXd> frozen;
            if (scenario.freeze_schedule && observer->scheduled)
                frozen = observer->eval(StateVec::from_stacked(xh), u, nullptr);
            const Eigen::MatrixXd* fz = frozen ? &*frozen : nullptr;

            const Eigen::VectorXd k1 = plant_deriv(sys, A0, x, u);
            const Eigen::VectorXd l1 = observer_deriv(x, xh, u, fz);
            const Eigen::VectorXd x2 = x + 0.5 * dt * k1, h2 = xh + 0.5 * dt * l1;
            const Eigen::VectorXd k2 = plant_deriv(sys, A0, x2, u);
            const Eigen::VectorXd l2 = observer_deriv(x2, h2, u, fz);
            const Eigen::VectorXd x3 = x + 0.5 * dt * k2, h3 = xh + 0.5 * dt * l2;
            const Eigen::VectorXd k3 = plant_deriv(sys, A0, x3, u);
            const Eigen::VectorXd l3 = observer_deriv(x3, h3, u, fz);
            const Eigen::VectorXd x4 = x + dt * k3, h4 = xh + dt * l3;
            const Eigen::VectorXd k4 = plant_deriv(sys, A0, x4, u);
            const Eigen::VectorXd l4 = observer_deriv(x4, h4, u, fz);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            xh += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        }
        const double t1 = static_cast<double>(k + 1) * dt;
        if (!x.allFinite() || !xh.allFinite())
            non_finite(t1);
        if ((k + 1) % scenario.record_every == 0 || k + 1 == steps)
            record(tr, sys, observer, options.domain, t1, x, xh, input_at(t1));
    }
    return tr;
}

Trajectory integrate(const PHSystem& sys, const SynthesisResult* result, const Scenario& scenario, const IntegrateOptions& options) {
    if (result == nullptr)
        return integrate(sys, static_cast<const ObserverGain*>(nullptr), scenario, options);
    const ObserverGain g = design_gain(sys, *result);
    return integrate(sys, &g, scenario, options);
}

Trajectory integrate_error_form(const PHSystem& sys, const ObserverGain& observer, const Scenario& scenario) {
    scenario.validate(sys.n());
    const Eigen::MatrixXd A0 = drift_matrix(sys);
    const Eigen::Index m = sys.m();
    const double dt = scenario.dt;
    const std::int64_t steps = scenario.steps();

    Trajectory tr = make_trajectory(sys, &observer, scenario);
    Eigen::VectorXd x = scenario.x0.stacked();
    Eigen::VectorXd e = x - scenario.xhat0.stacked();
    const auto input_at = [&](double t) { return Eigen::VectorXd::Constant(m, scenario.input(t)).eval(); };

    const auto error_deriv = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& es, const Eigen::VectorXd& u) {
        const StateVec xv = StateVec::from_stacked(xs);
        const StateVec xhv = StateVec::from_stacked(xs - es);
        const Eigen::MatrixXd L = observer.eval(xhv, u, nullptr);
        return (A0 * es + gamma_eval(sys, xv, u, L) - gamma_eval(sys, xhv, u, L)).eval();
    };

    record(tr, sys, &observer, nullptr, 0.0, x, x - e, input_at(0.0));
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Eigen::VectorXd u = input_at(t + 0.5 * dt);
        const Eigen::VectorXd k1 = plant_deriv(sys, A0, x, u);
        const Eigen::VectorXd l1 = error_deriv(x, e, u);
        const Eigen::VectorXd x2 = x + 0.5 * dt * k1, e2 = e + 0.5 * dt * l1;
        const Eigen::VectorXd k2 = plant_deriv(sys, A0, x2, u);
        const Eigen::VectorXd l2 = error_deriv(x2, e2, u);
        const Eigen::VectorXd x3 = x + 0.5 * dt * k2, e3 = e + 0.5 * dt * l2;
        const Eigen::VectorXd k3 = plant_deriv(sys, A0, x3, u);
        const Eigen::VectorXd l3 = error_deriv(x3, e3, u);
        const Eigen::VectorXd x4 = x + dt * k3, e4 = e + dt * l3;
        const Eigen::VectorXd k4 = plant_deriv(sys, A0, x4, u);
        const Eigen::VectorXd l4 = error_deriv(x4, e4, u);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        e += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        const double t1 = static_cast<double>(k + 1) * dt;
        if (!x.allFinite() || !e.allFinite())
            non_finite(t1);
        if ((k + 1) % scenario.record_every == 0 || k + 1 == steps)
            record(tr, sys, &observer, nullptr, t1, x, x - e, input_at(t1));
    }
    return tr;
}

OperatingDomain open_loop_domain(const PHSystem& sys, const Scenario& scenario, double margin, const ObserverGain* observer) {
    if (!(margin >= 0.0))
        throw std::invalid_argument("domain margin must be non-negative");
    const Trajectory tr = integrate(sys, observer, scenario);
    OperatingDomain dom;
    dom.q_min = dom.q_max = scenario.x0.q;
    dom.p_min = dom.p_max = scenario.x0.p;
    const auto widen = [&](const StateVec& s) {
        dom.q_min = dom.q_min.cwiseMin(s.q);
        dom.q_max = dom.q_max.cwiseMax(s.q);
        dom.p_min = dom.p_min.cwiseMin(s.p);
        dom.p_max = dom.p_max.cwiseMax(s.p);
    };
    for (std::size_t k = 0; k < tr.size(); ++k) {
        widen(tr.state(k));
        if (tr.has_observer)
            widen(tr.estimate(k));
    }
    const Eigen::VectorXd wq = margin * (dom.q_max - dom.q_min);
    const Eigen::VectorXd wp = margin * (dom.p_max - dom.p_min);
    dom.q_min -= wq;
    dom.q_max += wq;
    dom.p_min -= wp;
    dom.p_max += wp;
    dom.u_min = Eigen::VectorXd::Constant(sys.m(), scenario.input.min_value());
    dom.u_max = Eigen::VectorXd::Constant(sys.m(), scenario.input.max_value());
    return dom;
}

StabilityRun run_bounded(const PHSystem& sys, const Scenario& scenario) {
    scenario.validate(sys.n());
    const Eigen::MatrixXd A0 = drift_matrix(sys);
    const double dt = scenario.dt;
    const std::int64_t steps = scenario.steps();
    // The growth test runs on a coarse checkpoint grid; the median is over checkpoints since input onset.
    const std::int64_t check_every = std::max<std::int64_t>(1, std::llround(1e-3 / dt));
    std::vector<double> history;
    Eigen::VectorXd x = scenario.x0.stacked();
    StabilityRun run;
    for (std::int64_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(sys.m(), scenario.input(t + 0.5 * dt));
        const Eigen::VectorXd k1 = plant_deriv(sys, A0, x, u);
        const Eigen::VectorXd k2 = plant_deriv(sys, A0, x + 0.5 * dt * k1, u);
        const Eigen::VectorXd k3 = plant_deriv(sys, A0, x + 0.5 * dt * k2, u);
        const Eigen::VectorXd k4 = plant_deriv(sys, A0, x + dt * k3, u);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t1 = static_cast<double>(k + 1) * dt;
        const double nx = x.norm();
        if (!std::isfinite(nx)) {
            run.bounded = false;
            run.diverged_at = t1;
            return run;
        }
        if ((k + 1) % check_every != 0 || (history.empty() && nx == 0.0))
            continue;
        history.push_back(nx);
        std::vector<double> tmp = history;
        auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2);
        std::nth_element(tmp.begin(), mid, tmp.end());
        if (nx > 1e3 * *mid) {
            run.bounded = false;
            run.diverged_at = t1;
            return run;
        }
    }
    return run;
}

AmplitudeSweep amplitude_sweep(const PHSystem& sys, const Scenario& scenario, double start_voltage, double rel_tol) {
    if (scenario.input.kind != InputSignal::Kind::Step)
        throw std::invalid_argument("amplitude sweep needs a step input");
    if (!(start_voltage > 0.0) || !(rel_tol > 0.0))
        throw std::invalid_argument("amplitude sweep needs a positive start voltage and tolerance");
    AmplitudeSweep sw;
    const auto bounded = [&](double volts) {
        Scenario s = scenario;
        s.input.amplitude = volts * volts;
        ++sw.runs;
        return run_bounded(sys, s).bounded;
    };
    double lo = 0.0;
    double hi = start_voltage;
    while (bounded(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e9)
            throw std::runtime_error("amplitude sweep found no unbounded response below 1e9 V");
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (bounded(mid))
            lo = mid;
        else
            hi = mid;
    }
    sw.max_voltage = lo;
    sw.first_unbounded = hi;
    return sw;
}

BoundCheck bound_check(const Trajectory& traj, double lambda, double kappa) {
    BoundCheck bc;
    if (!traj.has_observer || traj.size() == 0)
        return bc;
    const double e0 = traj.error_norm(0);
    const double t0 = traj.t.front();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.in_domain[k] == 0) {
            bc.domain_exit = traj.t[k];
            break;
        }
        ++bc.samples_checked;
        const double ek = traj.error_norm(k);
        double ratio = 0.0;
        if (e0 > 0.0)
            ratio = ek / (kappa * std::exp(-lambda * (traj.t[k] - t0)) * e0);
        else if (ek > 0.0)
            ratio = std::numeric_limits<double>::infinity();
        bc.max_ratio = std::max(bc.max_ratio, ratio);
    }
    bc.passed = bc.max_ratio <= 1.0 + 1e-6;
    return bc;
}

std::string csv_header(const Trajectory& traj) {
    std::ostringstream os;
    const auto names = [&](const char* base, Eigen::Index count) {
        if (count == 1) {
            os << ',' << base;
            return;
        }
        for (Eigen::Index i = 1; i <= count; ++i)
            os << ',' << base << i;
    };
    os << 't';
    names("q", traj.n);
    names("p", traj.n);
    if (traj.has_observer) {
        names("qhat", traj.n);
        names("phat", traj.n);
        names("qerr", traj.n);
        names("perr", traj.n);
    }
    names("y", traj.m);
    if (traj.has_observer)
        names("yhat", traj.m);
    names("u", traj.m);
    if (traj.has_observer)
        for (Eigen::Index i = 1; i <= 2 * traj.n * traj.m; ++i)
            os << ",L" << i;
    for (std::size_t i = 1; i <= traj.vertex_count; ++i)
        os << ",h" << i;
    return os.str();
}

void write_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& options) {
    const auto d = static_cast<std::size_t>(2 * traj.n);
    const auto m = static_cast<std::size_t>(traj.m);
    const auto nl = d * m;
    const std::size_t every = std::max<std::size_t>(1, options.every);
    for (const auto& c : options.comments)
        os << "# " << c << '\n';
    os << csv_header(traj) << '\n';

    char buf[32];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        os << buf;
    };
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k % every != 0 && k + 1 != traj.size())
            continue;
        std::snprintf(buf, sizeof buf, "%.17g", traj.t[k]);
        os << buf;
        for (std::size_t i = 0; i < d; ++i)
            put(traj.x[k * d + i]);
        if (traj.has_observer) {
            for (std::size_t i = 0; i < d; ++i)
                put(traj.xhat[k * d + i]);
            for (std::size_t i = 0; i < d; ++i) {
                if (traj.xerr[k * d + i] != traj.x[k * d + i] - traj.xhat[k * d + i])
                    throw std::logic_error("trajectory error column differs from x - xhat");
                put(traj.xerr[k * d + i]);
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            put(traj.y[k * m + i]);
        if (traj.has_observer)
            for (std::size_t i = 0; i < m; ++i)
                put(traj.yhat[k * m + i]);
        for (std::size_t i = 0; i < m; ++i)
            put(traj.u[k * m + i]);
        if (traj.has_observer)
            for (std::size_t i = 0; i < nl; ++i)
                put(traj.L[k * nl + i]);
        for (std::size_t i = 0; i < traj.vertex_count; ++i)
            put(traj.h[k * traj.vertex_count + i]);
        os << '\n';
    }
}

namespace {

constexpr char kMagic[8] = {'P', 'H', 'O', 'B', 'S', 'T', 'R', 'J'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw std::runtime_error("truncated trajectory file");
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put_raw<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    const auto len = get_raw<std::uint64_t>(is);
    if (len > (1U << 20))
        throw std::runtime_error("corrupt trajectory file: string too long");
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is)
        throw std::runtime_error("truncated trajectory file");
    return s;
}

template <typename T>
void put_vector(std::ostream& os, const std::vector<T>& v) {
    put_raw<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> get_vector(std::istream& is) {
    const auto len = get_raw<std::uint64_t>(is);
    if (len > (std::uint64_t{1} << 34) / sizeof(T))
        throw std::runtime_error("corrupt trajectory file: array too long");
    std::vector<T> v(len);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(len * sizeof(T)));
    if (!is)
        throw std::runtime_error("truncated trajectory file");
    return v;
}

}  // namespace

void write_binary(std::ostream& os, const Trajectory& traj) {
    os.write(kMagic, sizeof kMagic);
    put_raw(os, kVersion);
    put_raw<std::int64_t>(os, traj.n);
    put_raw<std::int64_t>(os, traj.m);
    put_raw<std::uint8_t>(os, traj.has_observer ? 1 : 0);
    put_raw<std::uint8_t>(os, traj.scheduled ? 1 : 0);
    put_raw<std::uint64_t>(os, traj.vertex_count);
    put_raw<std::uint64_t>(os, traj.clamped_samples);
    put_raw(os, traj.horizon);
    put_raw(os, traj.dt);
    put_string(os, traj.scenario_hash);
    put_string(os, traj.gain_source);
    for (const auto* v : {&traj.t, &traj.x, &traj.xhat, &traj.xerr, &traj.y, &traj.yhat, &traj.u, &traj.L, &traj.h})
        put_vector(os, *v);
    put_vector(os, traj.in_domain);
    if (!os)
        throw std::runtime_error("failed to write trajectory file");
}

Trajectory read_binary(std::istream& is) {
    char magic[sizeof kMagic];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a phobs trajectory file");
    const auto version = get_raw<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported trajectory file version " + std::to_string(version));
    Trajectory tr;
    tr.n = get_raw<std::int64_t>(is);
    tr.m = get_raw<std::int64_t>(is);
    tr.has_observer = get_raw<std::uint8_t>(is) != 0;
    tr.scheduled = get_raw<std::uint8_t>(is) != 0;
    tr.vertex_count = get_raw<std::uint64_t>(is);
    tr.clamped_samples = get_raw<std::uint64_t>(is);
    tr.horizon = get_raw<double>(is);
    tr.dt = get_raw<double>(is);
    tr.scenario_hash = get_string(is);
    tr.gain_source = get_string(is);
    for (auto* v : {&tr.t, &tr.x, &tr.xhat, &tr.xerr, &tr.y, &tr.yhat, &tr.u, &tr.L, &tr.h})
        *v = get_vector<double>(is);
    tr.in_domain = get_vector<std::uint8_t>(is);

    const std::size_t rows = tr.t.size();
    const auto d = static_cast<std::size_t>(2 * tr.n);
    const auto m = static_cast<std::size_t>(tr.m);
    const bool obs_ok = !tr.has_observer ||
                        (tr.xhat.size() == rows * d && tr.xerr.size() == rows * d && tr.yhat.size() == rows * m &&
                         tr.L.size() == rows * d * m && tr.h.size() == rows * tr.vertex_count);
    if (tr.n <= 0 || tr.m <= 0 || tr.x.size() != rows * d || tr.y.size() != rows * m || tr.u.size() != rows * m ||
        tr.in_domain.size() != rows || !obs_ok)
        throw std::runtime_error("corrupt trajectory file: inconsistent array sizes");
    return tr;
}

}  // namespace phobs
