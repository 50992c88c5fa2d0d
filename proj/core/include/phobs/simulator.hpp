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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phobs/embedding.hpp"
#include "phobs/ph_model.hpp"
#include "phobs/synthesis.hpp"

namespace phobs {

/// Scalar input u(t) in V^2, applied to every input channel.
struct InputSignal {
    enum class Kind { Zero, Step, Piecewise };
    Kind kind = Kind::Zero;
    double t_step = 1.0;
    double amplitude = 0.0;
    std::vector<std::pair<double, double>> pieces;  // (start time, value), piecewise constant, 0 before the first

    static InputSignal zero() { return {}; }
    static InputSignal step(double t_step, double amplitude);
    static InputSignal piecewise(std::vector<std::pair<double, double>> pieces);

    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] double max_value() const;
    [[nodiscard]] double min_value() const;
};

struct Scenario {
    std::string name;
    StateVec x0;
    StateVec xhat0;
    InputSignal input;
    double horizon = 2.0;
    double dt = 1e-5;
    int record_every = 1;
    /// Hold the scheduled gain over each step instead of re-evaluating it at every stage.
    bool freeze_schedule = false;

    void validate(Eigen::Index n) const;
    [[nodiscard]] std::int64_t steps() const;
};

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);
std::string scenario_hash(const Scenario& s);

/// Observer gain law L(xhat, u). `h` receives the weights for scheduled laws.
struct ObserverGain {
    std::function<Eigen::MatrixXd(const StateVec& xhat, const Eigen::VectorXd& u, WeightVector* h)> eval;
    bool scheduled = false;
    std::size_t vertex_count = 0;
    std::string source;
};

ObserverGain constant_gain(const Eigen::MatrixXd& L, std::string source = "constant");
ObserverGain design_gain(const PHSystem& sys, const SynthesisResult& result, std::string source = "design");

/// Samples stored row-wise in flat buffers.
struct Trajectory {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    bool has_observer = false;
    bool scheduled = false;
    std::size_t vertex_count = 0;
    std::string scenario_hash;
    std::string gain_source;
    double horizon = 0.0;
    double dt = 0.0;
    std::size_t clamped_samples = 0;

    std::vector<double> t;
    std::vector<double> x, xhat, xerr;  // 2n per sample
    std::vector<double> y, yhat, u;     // m per sample
    std::vector<double> L;              // 2n*m per sample, column-major
    std::vector<double> h;              // vertex_count per sample
    std::vector<std::uint8_t> in_domain;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] StateVec state(std::size_t k) const;
    [[nodiscard]] StateVec estimate(std::size_t k) const;
    [[nodiscard]] StateVec error(std::size_t k) const;
    [[nodiscard]] Eigen::VectorXd error_stacked(std::size_t k) const;
    [[nodiscard]] double error_norm(std::size_t k) const;
};

struct IntegrateOptions {
    /// When set, each sample is flagged by whether plant and estimate both lie in the box.
    const OperatingDomain* domain = nullptr;
};

/// Classic RK4 on the coupled plant/observer system. The input is sampled once per step at the
/// step midpoint. Throws std::runtime_error on a non-finite state.
Trajectory integrate(const PHSystem& sys, const ObserverGain* observer, const Scenario& scenario,
                     const IntegrateOptions& options = {});
Trajectory integrate(const PHSystem& sys, const SynthesisResult* result, const Scenario& scenario,
                     const IntegrateOptions& options = {});

/// Integrates x~' = A0 x~ + gamma(x, u) - gamma(x - x~, u) together with the plant.
Trajectory integrate_error_form(const PHSystem& sys, const ObserverGain& observer, const Scenario& scenario);

/// Componentwise extremes of q and p over the plant (and the observer, if given), widened by
/// `margin` times the box width on each side; u in [min(0, min u), max u].
OperatingDomain open_loop_domain(const PHSystem& sys, const Scenario& scenario, double margin,
                                 const ObserverGain* observer = nullptr);

struct StabilityRun {
    bool bounded = true;
    double diverged_at = 0.0;
};

/// Plant-only run with growth detection: unbounded when |x| exceeds 1e3 times the running median
/// of |x| since the input switched on, or turns non-finite.
StabilityRun run_bounded(const PHSystem& sys, const Scenario& scenario);

struct AmplitudeSweep {
    double max_voltage = 0.0;    // largest bounded step amplitude, V
    double first_unbounded = 0.0;
    int runs = 0;
};

/// Doubles the step voltage from `start_voltage` until the response is unbounded, then bisects to
/// relative width `rel_tol`. The scenario's input must be a step; its amplitude is replaced by V^2.
AmplitudeSweep amplitude_sweep(const PHSystem& sys, const Scenario& scenario, double start_voltage = 1000.0,
                               double rel_tol = 1e-4);

struct BoundCheck {
    double max_ratio = 0.0;
    bool passed = true;
    std::size_t samples_checked = 0;
    std::optional<double> domain_exit;
};

/// max |x~(t)| / (kappa e^{-lambda t} |x~(0)|) up to the first out-of-domain sample.
BoundCheck bound_check(const Trajectory& traj, double lambda, double kappa);

struct CsvOptions {
    std::size_t every = 1;          // write every k-th stored sample (the last is always written)
    std::vector<std::string> comments;  // emitted as leading "# " lines
};

std::string csv_header(const Trajectory& traj);
void write_csv(std::ostream& os, const Trajectory& traj, const CsvOptions& options = {});

void write_binary(std::ostream& os, const Trajectory& traj);
Trajectory read_binary(std::istream& is);

}  // namespace phobs
