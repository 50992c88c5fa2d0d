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

#include "phobs/sdp.hpp"

using namespace phobs::sdp;

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

}  // namespace

TEST(Sdp, LinearProgram) {
    // minimize y0 + y1  s.t.  y0 >= 1, y1 >= 2
    Problem p;
    const auto b0 = p.add_block(1);
    const auto b1 = p.add_block(1);
    const auto y0 = p.add_variable(1.0);
    const auto y1 = p.add_variable(1.0);
    p.add_term(y0, b0, m1(1));
    p.add_term(y1, b1, m1(1));
    p.C[b0] = m1(1);
    p.C[b1] = m1(2);
    const Solution s = InteriorPointSolver().solve(p, {});
    EXPECT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.dual_objective, 3.0, 1e-8);
    EXPECT_NEAR(s.primal_objective, 3.0, 1e-8);
}

TEST(Sdp, MaxEigenvalue) {
    // minimize t  s.t.  t I - A >= 0  gives lambda_max(A).
    Eigen::Matrix3d A;
    A << 2, -1, 0, -1, 2, -1, 0, -1, 2;
    Problem p;
    const auto b = p.add_block(3);
    const auto t = p.add_variable(1.0);
    p.add_term(t, b, Eigen::MatrixXd::Identity(3, 3));
    p.C[b] = A;
    const Solution s = InteriorPointSolver().solve(p, {});
    EXPECT_EQ(s.status, Status::Optimal);
    EXPECT_NEAR(s.dual_objective, 2.0 + std::sqrt(2.0), 1e-8);
}

TEST(Sdp, SlackAndValidate) {
    Problem p;
    const auto b = p.add_block(2);
    const auto y = p.add_variable(0.0);
    p.add_term(y, b, Eigen::MatrixXd::Identity(2, 2));
    p.C[b] = Eigen::MatrixXd::Identity(2, 2);
    const auto Z = p.slack(Eigen::VectorXd::Constant(1, 3.0));
    EXPECT_TRUE(Z[0].isApprox(2.0 * Eigen::MatrixXd::Identity(2, 2)));
    EXPECT_NO_THROW(p.validate());
    EXPECT_THROW(p.add_term(y, 5, m1(1)), std::out_of_range);
}

TEST(AnalyticCenter, Interval) {
    // {y : 0 < y < 1} has center 1/2.
    Problem p;
    const auto lo = p.add_block(1);
    const auto hi = p.add_block(1);
    const auto y = p.add_variable();
    p.add_term(y, lo, m1(1));
    p.add_term(y, hi, m1(-1));
    p.C[hi] = m1(-1);
    const CenterResult c = analytic_center(p, Eigen::VectorXd::Constant(1, 0.99));
    EXPECT_TRUE(c.converged);
    EXPECT_NEAR(c.y(0), 0.5, 1e-10);
    EXPECT_THROW(analytic_center(p, Eigen::VectorXd::Constant(1, 1.5)), std::invalid_argument);
}

TEST(AnalyticCenter, MatrixBlock) {
    // {y : [[1, y], [y, 1]] > 0} = (-1, 1), center 0, weighted against y < 0.5.
    Problem p;
    const auto b = p.add_block(2);
    const auto cap = p.add_block(1);
    const auto y = p.add_variable();
    Eigen::Matrix2d E;
    E << 0, 1, 1, 0;
    p.add_term(y, b, E);
    p.C[b] = -Eigen::MatrixXd::Identity(2, 2);
    p.add_term(y, cap, m1(-1));
    p.C[cap] = m1(-0.5);
    const CenterResult c = analytic_center(p, Eigen::VectorXd::Constant(1, 0.0));
    EXPECT_TRUE(c.converged);
    // Stationarity of -log(1 - y^2) - log(0.5 - y): 2y/(1-y^2) = -1/(0.5-y).
    const double v = c.y(0);
    EXPECT_NEAR(2 * v * (0.5 - v), -(1 - v * v), 1e-9);
    EXPECT_LT(v, 0.0);
}
