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

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "phobs/embedding.hpp"
#include "phobs/lmi.hpp"

namespace phobs {

struct SynthesisResult {
    GainMode mode = GainMode::Constant;
    Eigen::MatrixXd P;
    std::vector<Eigen::MatrixXd> K;      // LMI gain variables
    std::vector<Eigen::MatrixXd> gains;  // L_i = P^{-1} K_i
    double lambda = 0.0;
    double kappa = 1.0;
    ParameterBounds bounds;
    VerificationReport verification;

    /// Gain for a weight vector: L_0 in constant mode, sum h_i L_i otherwise.
    [[nodiscard]] Eigen::MatrixXd gain(const Eigen::VectorXd& h) const;
};

struct SynthesisOutcome {
    FeasibilityStatus status = FeasibilityStatus::Inconclusive;
    std::optional<SynthesisResult> result;
    FeasibilityResult feasibility;
};

/// sqrt(lambda_max(P) / lambda_min(P)) from the Jacobi eigenvalues.
double condition_number(const Eigen::MatrixXd& P);

SynthesisOutcome synthesize(const VertexSet& V, double lambda, GainMode mode, const FeasibilityOptions& options = {});

/// Builds a result from given P and K (for re-verification of stored designs).
SynthesisResult assemble_result(const VertexSet& V, double lambda, GainMode mode, const Eigen::MatrixXd& P,
                                const std::vector<Eigen::MatrixXd>& K);

struct DecayProbe {
    double lambda = 0.0;
    FeasibilityStatus status = FeasibilityStatus::Inconclusive;
    double margin = 0.0;  // max residual eigenvalue of the probe's candidate
};

struct DecayRateResult {
    double lambda_max = 0.0;
    double lower = 0.0;  // last verified-feasible probe
    double upper = 0.0;  // first rejected probe above it
    bool zero_infeasible = false;
    bool capped = false;
    int inconclusive = 0;
    std::vector<DecayProbe> probes;
    std::optional<SynthesisResult> certificate;  // design at lambda_max
};

/// Doubling from 1 until a probe fails (cap 2^10), then bisection to |upper - lower| <= tol.
/// Inconclusive probes count as infeasible.
DecayRateResult max_decay_rate(const VertexSet& V, GainMode mode, double tol = 1e-3, const FeasibilityOptions& options = {});

/// sum_i h_i L_i for a scheduled design.
Eigen::MatrixXd scheduled_gain(const SynthesisResult& result, const WeightVector& h);

}  // namespace phobs
