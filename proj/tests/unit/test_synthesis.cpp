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
#include "phobs/synthesis.hpp"

using namespace phobs;

namespace {

const VertexSet& dea() {
    static const VertexSet V = phobs::testing::dea_vertices();
    return V;
}

}  // namespace

TEST(Synthesize, ConstantSlowRate) {
    const SynthesisOutcome out = synthesize(dea(), 0.0897, GainMode::Constant);
    ASSERT_TRUE(out.result.has_value()) << out.feasibility.detail;
    const SynthesisResult& r = *out.result;
    EXPECT_TRUE(r.verification.passed);
    ASSERT_EQ(r.gains.size(), 1U);
    EXPECT_LT((r.P * r.gains[0] - r.K[0]).norm(), 1e-10 * r.K[0].norm());
    EXPECT_GE(r.kappa, 1.0);
    // Closed-loop vertex spectra sit left of -lambda.
    for (std::size_t i = 0; i < dea().size(); ++i) {
        const Eigen::VectorXcd ev = (dea().A_bar[i] - r.gains[0] * dea().C_bar[i]).eigenvalues();
        for (Eigen::Index k = 0; k < ev.size(); ++k)
            EXPECT_LE(ev(k).real(), -r.lambda + 1e-6);
    }
}

TEST(Synthesize, ScheduledFastRate) {
    const SynthesisOutcome out = synthesize(dea(), 4.554, GainMode::Scheduled);
    ASSERT_TRUE(out.result.has_value()) << out.feasibility.detail;
    EXPECT_EQ(out.result->gains.size(), 16U);
    for (std::size_t i = 0; i < 16; ++i)
        EXPECT_LT((out.result->P * out.result->gains[i] - out.result->K[i]).norm(), 1e-10 * out.result->K[i].norm());
}

TEST(Synthesize, ConstantFastRateRejected) {
    const SynthesisOutcome out = synthesize(dea(), 4.554, GainMode::Constant);
    EXPECT_EQ(out.status, FeasibilityStatus::Infeasible);
    EXPECT_FALSE(out.result.has_value());
}

TEST(ConditionNumber, Values) {
    EXPECT_DOUBLE_EQ(condition_number(3.0 * Eigen::MatrixXd::Identity(2, 2)), 1.0);
    Eigen::Matrix2d P;
    P << 4, 0, 0, 1;
    EXPECT_NEAR(condition_number(P), 2.0, 1e-14);
}

TEST(AssembleResult, RejectsIndefiniteP) {
    const SynthesisOutcome out = synthesize(dea(), 0.0897, GainMode::Constant);
    ASSERT_TRUE(out.result.has_value());
    EXPECT_THROW(assemble_result(dea(), 0.0897, GainMode::Constant, -out.result->P, out.result->K), std::exception);
    const SynthesisResult again = assemble_result(dea(), 0.0897, GainMode::Constant, out.result->P, out.result->K);
    EXPECT_TRUE(again.gains[0].isApprox(out.result->gains[0]));
}

TEST(MaxDecayRate, DeaTable) {
    const DecayRateResult c = max_decay_rate(dea(), GainMode::Constant);
    const DecayRateResult s = max_decay_rate(dea(), GainMode::Scheduled);
    EXPECT_NEAR(c.lambda_max, 0.897, 0.05 * 0.897);
    EXPECT_NEAR(s.lambda_max, 4.554, 0.05 * 4.554);
    EXPECT_GE(s.lambda_max / c.lambda_max, 4.0);
    EXPECT_GE(s.lambda_max, c.lambda_max);
    for (const auto* r : {&c, &s}) {
        ASSERT_TRUE(r->certificate.has_value());
        EXPECT_TRUE(r->certificate->verification.passed);
        EXPECT_EQ(r->certificate->lambda, r->lambda_max);
        EXPECT_EQ(r->lambda_max, r->lower);
        EXPECT_LE(r->upper - r->lower, 1e-3);
        EXPECT_FALSE(r->capped);
    }
}

TEST(MaxDecayRate, DecoupledToy) {
    VertexSet V;
    V.A_bar = {-Eigen::MatrixXd::Identity(2, 2)};
    V.C_bar = {Eigen::MatrixXd::Zero(1, 2)};
    const DecayRateResult r = max_decay_rate(V, GainMode::Constant);
    EXPECT_NEAR(r.lambda_max, 1.0, 1e-3);
    EXPECT_LE(r.lambda_max, 1.0);
}

TEST(ScheduledGain, Interpolation) {
    const SynthesisOutcome out = synthesize(dea(), 0.5, GainMode::Scheduled);
    ASSERT_TRUE(out.result.has_value());
    const SynthesisResult& r = *out.result;
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 1);
    Eigen::MatrixXd lo = r.gains[0], hi = r.gains[0];
    for (const auto& L : r.gains) {
        mean += L / 16.0;
        lo = lo.cwiseMin(L);
        hi = hi.cwiseMax(L);
    }
    for (Eigen::Index k = 0; k < 16; ++k)
        EXPECT_EQ(scheduled_gain(r, {Eigen::VectorXd::Unit(16, k), false}), r.gains[static_cast<std::size_t>(k)]);
    EXPECT_TRUE(scheduled_gain(r, {Eigen::VectorXd::Constant(16, 1.0 / 16), false}).isApprox(mean, 1e-12));
    Eigen::VectorXd h = Eigen::VectorXd::LinSpaced(16, 1.0, 16.0);
    h /= h.sum();
    const Eigen::MatrixXd L = scheduled_gain(r, {h, false});
    EXPECT_TRUE((L.array() >= lo.array() - 1e-9 * lo.cwiseAbs().array()).all());
    EXPECT_TRUE((L.array() <= hi.array() + 1e-9 * hi.cwiseAbs().array()).all());

    const SynthesisOutcome c = synthesize(dea(), 0.5, GainMode::Constant);
    ASSERT_TRUE(c.result.has_value());
    EXPECT_THROW(scheduled_gain(*c.result, {h, false}), std::invalid_argument);
}
