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

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phobs/embedding.hpp"
#include "phobs/sdp.hpp"

namespace phobs {

enum class GainMode { Constant, Scheduled };

std::string to_string(GainMode mode);
GainMode gain_mode_from_string(const std::string& s);

/// Vertex constraint  A^T P + P A - C^T K_g^T - K_g C + 2 lambda P <= -delta I  with K_g = gains[gain].
struct LmiConstraint {
    Eigen::MatrixXd A_bar;
    Eigen::MatrixXd C_bar;
    std::size_t gain = 0;
};

struct LMIProblem {
    GainMode mode = GainMode::Constant;
    double lambda = 0.0;
    double delta = 0.0;      // strictness margin
    double p_floor = 0.0;    // P >= p_floor I
    double trace_cap = 0.0;  // tr P <= trace_cap
    std::vector<LmiConstraint> constraints;
    std::size_t gain_count = 0;

    [[nodiscard]] Eigen::Index state_dim() const { return constraints.front().A_bar.rows(); }
    [[nodiscard]] Eigen::Index output_dim() const { return constraints.front().C_bar.rows(); }
    /// Scalar decision variables: the upper triangle of P plus every gain entry.
    [[nodiscard]] std::size_t variable_count() const;
    void validate() const;
};

/// delta = 1e-8 (1 + max_i |A_bar_i|_F), trace cap 2n, floor 1e-8 tau / 2n.
LMIProblem build_constant_problem(const VertexSet& V, double lambda);
LMIProblem build_scheduled_problem(const VertexSet& V, double lambda);
LMIProblem build_problem(const VertexSet& V, double lambda, GainMode mode);

/// S_i = A^T P + P A - C^T K^T - K C + 2 lambda P.
Eigen::MatrixXd lmi_residual(const LmiConstraint& c, const Eigen::MatrixXd& P, const Eigen::MatrixXd& K, double lambda);

struct VerificationReport {
    std::vector<double> vertex_max_eigenvalues;
    double max_residual_eigenvalue = 0.0;
    double p_min_eigenvalue = 0.0;
    double p_max_eigenvalue = 0.0;
    bool passed = false;
    std::string message;
};

/// Eigenvalue certificate computed with the in-repo Jacobi solver only.
VerificationReport verify_solution(const LMIProblem& prob, const Eigen::MatrixXd& P, const std::vector<Eigen::MatrixXd>& gains);

enum class FeasibilityStatus { Feasible, Infeasible, Inconclusive };

std::string to_string(FeasibilityStatus s);

struct FeasibilityResult {
    FeasibilityStatus status = FeasibilityStatus::Inconclusive;
    Eigen::MatrixXd P;
    std::vector<Eigen::MatrixXd> gains;  // the K matrices, 2n x m each
    double phase1_t = 0.0;               // min t with S_i <= t I, original units
    double phase1_lower_bound = 0.0;
    double phase1_gap = 0.0;
    double worst_eigenvalue = 0.0;
    int iterations = 0;                  // summed over all solver stages
    bool centered = false;
    double center_box = 0.0;             // scaled gain bound used for centering
    int center_iterations = 0;
    VerificationReport verification;
    std::string detail;
};

/// Gains are chosen as the analytic center of the strict feasible set
///   { S_i <= -delta I,  P >= floor I,  tr P <= cap,  |K'| <= box },
/// with K' the gain scaled so that K' C' and A' share unit magnitude (box 1 bounds the output
/// injection by the fastest vertex drift). The box grows tenfold while the set is empty.
struct FeasibilityOptions {
    bool center = true;
    double center_box = 1.0;
    double gain_box = 1e3;  // phase I bound on the scaled gains
    sdp::Settings solver;
};

FeasibilityResult solve_feasibility(const LMIProblem& prob, const FeasibilityOptions& options = {},
                                    const sdp::Backend* backend = nullptr);

}  // namespace phobs
