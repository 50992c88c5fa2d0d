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

#include <Eigen/Dense>

#include "phobs/embedding.hpp"
#include "phobs/ph_model.hpp"
#include "phobs/simulator.hpp"

namespace phobs::testing {

inline Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

inline StateVec s1(double q, double p) { return {v1(q), v1(p)}; }

inline constexpr double kUbar = 2.64196e7;  // (5140 V)^2

/// The frozen DEA box shipped in config/dea.cfg.
inline OperatingDomain dea_box() {
    OperatingDomain d;
    d.q_min = v1(-8.1257e-6);
    d.q_max = v1(4.67546e-4);
    d.p_min = v1(-6.3029e-3);
    d.p_max = v1(2.228856e-3);
    d.u_min = v1(0.0);
    d.u_max = v1(kUbar);
    return d;
}

inline VertexSet dea_vertices() {
    const PHSystem sys = PHSystem::dea({});
    return enumerate_vertices(sys, compute_parameter_bounds(sys, dea_box()));
}

/// Observer transient of the scenarios: plant at rest, estimate offset, step to u_bar at 1 s.
inline Scenario dea_scenario(double horizon = 5.0, int record_every = 10) {
    Scenario sc;
    sc.name = "dea";
    sc.x0 = StateVec::zero(1);
    sc.xhat0 = s1(2e-4, -2e-3);
    sc.input = InputSignal::step(1.0, kUbar);
    sc.horizon = horizon;
    sc.dt = 1e-5;
    sc.record_every = record_every;
    return sc;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace phobs::testing
