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

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "phobs/lmi.hpp"

using namespace phobs;

namespace {

VertexSet toy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
    VertexSet V;
    V.A_bar = {A};
    V.C_bar = {C};
    return V;
}

const VertexSet& dea() {
    static const VertexSet V = phobs::testing::dea_vertices();
    return V;
}

}  // namespace

TEST(LmiProblem, Counting) {
    const LMIProblem c = build_constant_problem(dea(), 0.1);
    EXPECT_EQ(c.constraints.size(), 16U);
    EXPECT_EQ(c.gain_count, 1U);
    EXPECT_EQ(c.variable_count(), 5U);
    const LMIProblem s = build_scheduled_problem(dea(), 0.1);
    EXPECT_EQ(s.gain_count, 16U);
    EXPECT_EQ(s.variable_count(), 35U);
    EXPECT_EQ(c.trace_cap, 2.0);
    EXPECT_DOUBLE_EQ(c.p_floor, 1e-8);
    EXPECT_THROW(build_constant_problem(dea(), -1.0), std::invalid_argument);
}

TEST(LmiProblem, Residual) {
    LmiConstraint c{-Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(1, 2), 0};
    const Eigen::MatrixXd S = lmi_residual(c, Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 1), 0.0);
    EXPECT_TRUE(S.isApprox(-2.0 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST(Verify, PassesAndFails) {
    const LMIProblem prob = build_constant_problem(toy(-Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(1, 2)), 0.0);
    const auto ok = verify_solution(prob, Eigen::MatrixXd::Identity(2, 2), {Eigen::MatrixXd::Zero(2, 1)});
    EXPECT_TRUE(ok.passed);
    EXPECT_NEAR(ok.max_residual_eigenvalue, -2.0, 1e-15);

    Eigen::Matrix2d singular;
    singular << 1, 0, 0, 0;
    const auto bad = verify_solution(prob, singular, {Eigen::MatrixXd::Zero(2, 1)});
    EXPECT_FALSE(bad.passed);
    EXPECT_NE(bad.message.find("P not positive definite"), std::string::npos);

    const auto flipped = verify_solution(prob, -Eigen::MatrixXd::Identity(2, 2), {Eigen::MatrixXd::Zero(2, 1)});
    EXPECT_FALSE(flipped.passed);
}

TEST(Feasibility, LyapunovWithoutOutput) {
    Eigen::Matrix2d A;
    A << -1, 2, 0, -3;
    const LMIProblem prob = build_constant_problem(toy(A, Eigen::MatrixXd::Zero(1, 2)), 0.0);
    const FeasibilityResult r = solve_feasibility(prob);
    ASSERT_EQ(r.status, FeasibilityStatus::Feasible) << r.detail;
    EXPECT_TRUE(r.verification.passed);
}

TEST(Feasibility, UnstableWithoutOutputIsInfeasible) {
    const LMIProblem prob = build_constant_problem(toy(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(1, 2)), 0.0);
    const FeasibilityResult r = solve_feasibility(prob);
    EXPECT_EQ(r.status, FeasibilityStatus::Infeasible) << r.detail;
    EXPECT_GT(r.phase1_lower_bound, 0.0);
}

TEST(Feasibility, DeaConstantSlowRateFeasible) {
    const LMIProblem prob = build_constant_problem(dea(), 0.0897);
    const FeasibilityResult r = solve_feasibility(prob);
    ASSERT_EQ(r.status, FeasibilityStatus::Feasible) << r.detail;
    EXPECT_TRUE(r.centered);
    const auto rep = verify_solution(prob, r.P, r.gains);
    EXPECT_TRUE(rep.passed);
    EXPECT_LE(rep.max_residual_eigenvalue, -0.5 * prob.delta);
}

TEST(Feasibility, DeaConstantFastRateInfeasible) {
    const FeasibilityResult r = solve_feasibility(build_constant_problem(dea(), 4.554));
    EXPECT_EQ(r.status, FeasibilityStatus::Infeasible) << r.detail;
    EXPECT_GT(r.phase1_t, 0.0);
}

TEST(Feasibility, HomogeneityAndMonotonicity) {
    const LMIProblem prob = build_scheduled_problem(dea(), 2.0);
    const FeasibilityResult r = solve_feasibility(prob);
    ASSERT_EQ(r.status, FeasibilityStatus::Feasible) << r.detail;

    const double c = prob.trace_cap / r.P.trace();
    std::vector<Eigen::MatrixXd> K;
    for (const auto& k : r.gains)
        K.push_back(c * k);
    EXPECT_TRUE(verify_solution(prob, c * r.P, K).passed);

    for (double lower : {0.0, 0.5, 1.9})
        EXPECT_TRUE(verify_solution(build_scheduled_problem(dea(), lower), r.P, r.gains).passed) << lower;
}

TEST(Feasibility, WithoutCenteringStillVerified) {
    FeasibilityOptions o;
    o.center = false;
    const FeasibilityResult r = solve_feasibility(build_constant_problem(dea(), 0.5), o);
    ASSERT_EQ(r.status, FeasibilityStatus::Feasible) << r.detail;
    EXPECT_FALSE(r.centered);
    EXPECT_TRUE(r.verification.passed);
}

TEST(GainMode, RoundTrip) {
    EXPECT_EQ(gain_mode_from_string("const"), GainMode::Constant);
    EXPECT_EQ(gain_mode_from_string("sched"), GainMode::Scheduled);
    EXPECT_EQ(to_string(GainMode::Scheduled), "sched");
    EXPECT_THROW(gain_mode_from_string("pid"), std::invalid_argument);
}
