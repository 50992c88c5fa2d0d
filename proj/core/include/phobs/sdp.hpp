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

namespace phobs::sdp {

/// Block-diagonal semidefinite program in inequality form
///
///   minimize    b^T y
///   subject to  Z(y) = sum_i y_i A_i - C  >= 0  (blockwise PSD)
///
/// with the dual (equality form)
///
///   maximize    <C, X>
///   subject to  <A_i, X> = b_i,  X >= 0.
///
/// Each A_i is stored sparsely as the list of blocks in which it is nonzero.
struct BlockTerm {
    std::size_t block;
    Eigen::MatrixXd value;  // symmetric, block_sizes[block] square
};

struct Problem {
    std::vector<Eigen::Index> block_sizes;
    std::vector<Eigen::MatrixXd> C;            // one per block
    std::vector<std::vector<BlockTerm>> A;     // one list per variable
    Eigen::VectorXd b;                         // objective, one entry per variable

    [[nodiscard]] std::size_t variable_count() const { return A.size(); }
    [[nodiscard]] std::size_t block_count() const { return block_sizes.size(); }

    std::size_t add_block(Eigen::Index size);
    std::size_t add_variable(double cost = 0.0);
    void add_term(std::size_t variable, std::size_t block, const Eigen::MatrixXd& value);
    /// Z(y) for the given y, blockwise.
    [[nodiscard]] std::vector<Eigen::MatrixXd> slack(const Eigen::VectorXd& y) const;
    void validate() const;
};

enum class Status {
    Optimal,
    MaxIterations,
    NumericalFailure,
};

std::string to_string(Status s);

struct Settings {
    int max_iterations = 200;
    double tolerance = 1e-10;    // relative gap and relative residuals
    double step_fraction = 0.95;
};

struct Solution {
    Status status = Status::NumericalFailure;
    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> X;
    std::vector<Eigen::MatrixXd> Z;
    double primal_objective = 0.0;  // <C, X>, a lower bound on min b^T y when X is feasible
    double dual_objective = 0.0;    // b^T y
    double relative_gap = 0.0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    int iterations = 0;
};

struct CenterResult {
    Eigen::VectorXd y;
    bool converged = false;
    int iterations = 0;
    double newton_decrement = 0.0;
};

/// Analytic center of {y : Z(y) > 0}: damped Newton on -sum log det Z_b(y) from a strictly
/// feasible `y0`. The objective b is ignored. Throws std::invalid_argument if y0 is not interior.
CenterResult analytic_center(const Problem& problem, const Eigen::VectorXd& y0, int max_iterations = 200,
                             double tolerance = 1e-10);

/// Interface for conic backends. Anything that returns a primal-dual pair for `Problem` can be plugged in.
class Backend {
public:
    virtual ~Backend() = default;
    [[nodiscard]] virtual Solution solve(const Problem& problem, const Settings& settings) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Infeasible-start primal-dual path-following method with the HKM search direction and
/// Mehrotra predictor-corrector steps. Dense, intended for problems with tens of variables.
class InteriorPointSolver final : public Backend {
public:
    [[nodiscard]] Solution solve(const Problem& problem, const Settings& settings) const override;
    [[nodiscard]] std::string name() const override { return "builtin-hkm-ipm"; }
};

}  // namespace phobs::sdp
