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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "phobs/simulator.hpp"
#include "phobs/synthesis.hpp"

using namespace phobs;
using phobs::testing::dea_scenario;
using phobs::testing::s1;

namespace {

const PHSystem& dea() {
    static const PHSystem sys = PHSystem::dea({});
    return sys;
}

const SynthesisResult& slow_design() {
    static const SynthesisResult r = *synthesize(phobs::testing::dea_vertices(), 0.0897, GainMode::Constant).result;
    return r;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        scale = std::max(scale, std::abs(b[i]));
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    return diff / scale;
}

}  // namespace

TEST(InputSignal, Shapes) {
    const InputSignal s = InputSignal::step(1.0, 5.0);
    EXPECT_EQ(s(0.999), 0.0);
    EXPECT_EQ(s(1.0), 5.0);
    EXPECT_EQ(s.max_value(), 5.0);
    EXPECT_EQ(s.min_value(), 0.0);
    const InputSignal p = InputSignal::piecewise({{0.5, 2.0}, {1.5, -1.0}});
    EXPECT_EQ(p(0.2), 0.0);
    EXPECT_EQ(p(1.0), 2.0);
    EXPECT_EQ(p(2.0), -1.0);
    EXPECT_EQ(p.min_value(), -1.0);
    EXPECT_EQ(InputSignal::zero()(3.0), 0.0);
}

TEST(Scenario, ValidationAndHash) {
    Scenario sc = dea_scenario(1.0);
    EXPECT_NO_THROW(sc.validate(1));
    EXPECT_EQ(sc.steps(), 100000);
    const std::string h = scenario_hash(sc);
    EXPECT_EQ(h, scenario_hash(dea_scenario(1.0)));
    sc.dt = 2e-5;
    EXPECT_NE(h, scenario_hash(sc));
    sc.dt = -1.0;
    EXPECT_THROW(sc.validate(1), std::invalid_argument);
    EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
}

TEST(Integrate, ZeroStaysZero) {
    Scenario sc;
    sc.x0 = sc.xhat0 = StateVec::zero(1);
    sc.horizon = 0.1;
    const Trajectory tr = integrate(dea(), &slow_design(), sc);
    for (double v : tr.x)
        EXPECT_EQ(v, 0.0);
    for (double v : tr.xerr)
        EXPECT_EQ(v, 0.0);
    EXPECT_EQ(tr.size(), 10001U);
}

TEST(Integrate, OpenLoopStepApproachesStaticEquilibrium) {
    // Close to pull-in the slow pole sits near -0.9 1/s, hence the long horizon.
    Scenario sc = dea_scenario(12.0, 100);
    sc.dt = 1e-4;
    sc.xhat0 = sc.x0;
    const Trajectory tr = integrate(dea(), static_cast<const ObserverGain*>(nullptr), sc);
    EXPECT_FALSE(tr.has_observer);
    const double q = tr.state(tr.size() - 1).q(0);
    const double spring = 1000.0 * q;
    const double electric = 2.0 * 2.8 * std::pow(q + 1e-3, 3) * phobs::testing::kUbar;
    EXPECT_LT(std::abs(spring - electric), 1e-5 * spring);
}

TEST(Integrate, StepHalving) {
    Scenario a = dea_scenario(1.5, 1);
    a.dt = 1e-5;
    Scenario b = a;
    b.dt = 5e-6;
    const Trajectory ta = integrate(dea(), &slow_design(), a);
    const Trajectory tb = integrate(dea(), &slow_design(), b);
    const Eigen::VectorXd ea = ta.estimate(ta.size() - 1).stacked();
    const Eigen::VectorXd eb = tb.estimate(tb.size() - 1).stacked();
    EXPECT_LT((ea - eb).norm(), 1e-9 * eb.norm());
}

TEST(Integrate, ErrorFormMatchesCoupled) {
    const Scenario sc = dea_scenario(1.5, 10);
    const ObserverGain g = design_gain(dea(), slow_design());
    const Trajectory coupled = integrate(dea(), &g, sc);
    const Trajectory err = integrate_error_form(dea(), g, sc);
    ASSERT_EQ(coupled.size(), err.size());
    EXPECT_LT(max_rel_diff(err.xerr, coupled.xerr), 1e-8);
}

TEST(Integrate, EqualVertexGainsReproduceConstant) {
    const VertexSet V = phobs::testing::dea_vertices();
    SynthesisResult sched = slow_design();
    sched.mode = GainMode::Scheduled;
    sched.bounds = V.bounds;
    sched.gains.assign(V.size(), slow_design().gains.front());
    const Scenario sc = dea_scenario(2.0, 10);
    const Trajectory c = integrate(dea(), &slow_design(), sc);
    const Trajectory s = integrate(dea(), &sched, sc);
    EXPECT_TRUE(s.scheduled);
    EXPECT_LT(max_rel_diff(s.xhat, c.xhat), 1e-13);
    EXPECT_LT(max_rel_diff(s.xerr, c.xerr), 1e-13);
}

TEST(Integrate, DivergenceThrows) {
    Scenario sc = dea_scenario(2.0, 100);
    sc.xhat0 = sc.x0;
    sc.input = InputSignal::step(0.0, 1e12);
    EXPECT_THROW(integrate(dea(), static_cast<const ObserverGain*>(nullptr), sc), std::runtime_error);
}

TEST(Integrate, DomainFlags) {
    const OperatingDomain box = phobs::testing::dea_box();
    IntegrateOptions io;
    io.domain = &box;
    const Trajectory tr = integrate(dea(), &slow_design(), dea_scenario(1.2, 100), io);
    EXPECT_EQ(tr.in_domain.front(), 1);
    std::size_t out = 0;
    for (auto f : tr.in_domain)
        out += f == 0 ? 1U : 0U;
    EXPECT_GT(out, 0U);  // the step overshoot touches the frozen p bound
}

TEST(OpenLoopDomain, ZeroAndMargin) {
    Scenario sc;
    sc.x0 = sc.xhat0 = StateVec::zero(1);
    sc.horizon = 0.1;
    const OperatingDomain z = open_loop_domain(dea(), sc, 0.0);
    EXPECT_EQ(z.q_min(0), 0.0);
    EXPECT_EQ(z.q_max(0), 0.0);
    EXPECT_EQ(z.p_max(0), 0.0);
    EXPECT_EQ(z.u_max(0), 0.0);

    // The frozen q bound is the transient 4 s after the step, short of the static equilibrium.
    Scenario step = dea_scenario(5.0, 100);
    step.dt = 1e-4;
    step.xhat0 = step.x0;
    const OperatingDomain raw = open_loop_domain(dea(), step, 0.0);
    EXPECT_NEAR(raw.q_max(0), 4.67546e-4, 1e-3 * 4.67546e-4);
    EXPECT_NEAR(raw.p_max(0), 2.228856e-3, 1e-2 * 2.228856e-3);
    EXPECT_EQ(raw.u_max(0), phobs::testing::kUbar);
    const OperatingDomain wide = open_loop_domain(dea(), step, 0.1);
    EXPECT_NEAR(wide.q_max(0) - wide.q_min(0), 1.2 * (raw.q_max(0) - raw.q_min(0)), 1e-15);
    EXPECT_THROW(open_loop_domain(dea(), step, -1.0), std::invalid_argument);
}

TEST(AmplitudeSweep, PullInVoltage) {
    Scenario sc = dea_scenario(3.0, 1);
    sc.xhat0 = sc.x0;
    const AmplitudeSweep r = amplitude_sweep(dea(), sc);
    EXPECT_NEAR(r.max_voltage, 5140.0, 0.02 * 5140.0);
    EXPECT_GT(r.first_unbounded, r.max_voltage);
    EXPECT_LE(r.first_unbounded - r.max_voltage, 1e-4 * r.first_unbounded * 1.0001);
}

TEST(BoundCheck, ScenarioOneAndProbe) {
    const OperatingDomain box = phobs::testing::dea_box();
    IntegrateOptions io;
    io.domain = &box;
    const Trajectory tr = integrate(dea(), &slow_design(), dea_scenario(1.2, 10), io);
    const BoundCheck bc = bound_check(tr, 0.0897, slow_design().kappa);
    EXPECT_TRUE(bc.passed);
    EXPECT_TRUE(bc.domain_exit.has_value());
    const BoundCheck harsh = bound_check(tr, 2 * 0.0897, slow_design().kappa);
    EXPECT_GE(harsh.max_ratio, bc.max_ratio);

    Scenario zero;
    zero.x0 = zero.xhat0 = s1(1e-4, 0.0);
    zero.horizon = 0.01;
    const BoundCheck vac = bound_check(integrate(dea(), &slow_design(), zero), 0.0897, 1.0);
    EXPECT_TRUE(vac.passed);
    EXPECT_EQ(vac.max_ratio, 0.0);
}

TEST(Export, CsvContract) {
    const Trajectory tr = integrate(dea(), &slow_design(), dea_scenario(0.01, 100));
    EXPECT_EQ(csv_header(tr), "t,q,p,qhat,phat,qerr,perr,y,yhat,u,L1,L2");
    std::ostringstream os;
    CsvOptions co;
    co.comments = {"hello"};
    write_csv(os, tr, co);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "# hello");
    std::getline(is, line);
    EXPECT_EQ(line, csv_header(tr));
    std::size_t rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, tr.size());

    const VertexSet V = phobs::testing::dea_vertices();
    const SynthesisResult sched = *synthesize(V, 0.0897, GainMode::Scheduled).result;
    const Trajectory ts = integrate(dea(), &sched, dea_scenario(0.01, 100));
    EXPECT_EQ(csv_header(ts).substr(csv_header(ts).size() - 8), ",h15,h16");

    const Trajectory plant = integrate(dea(), static_cast<const ObserverGain*>(nullptr), dea_scenario(0.01, 100));
    EXPECT_EQ(csv_header(plant), "t,q,p,y,u");
}

TEST(Export, BinaryRoundTrip) {
    const VertexSet V = phobs::testing::dea_vertices();
    const SynthesisResult sched = *synthesize(V, 0.0897, GainMode::Scheduled).result;
    const Trajectory tr = integrate(dea(), &sched, dea_scenario(0.05, 10));
    std::stringstream ss;
    write_binary(ss, tr);
    const Trajectory back = read_binary(ss);
    EXPECT_EQ(back.t, tr.t);
    EXPECT_EQ(back.x, tr.x);
    EXPECT_EQ(back.xerr, tr.xerr);
    EXPECT_EQ(back.L, tr.L);
    EXPECT_EQ(back.h, tr.h);
    EXPECT_EQ(back.scenario_hash, tr.scenario_hash);
    EXPECT_EQ(back.vertex_count, 16U);
    std::stringstream junk("not a trajectory");
    EXPECT_THROW(read_binary(junk), std::runtime_error);
}
