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
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phobs/ph_model.hpp"

namespace phobs {

/// Compact box assumed to contain both the plant and the observer states, plus input bounds.
struct OperatingDomain {
    Eigen::VectorXd q_min, q_max;
    Eigen::VectorXd p_min, p_max;
    Eigen::VectorXd u_min, u_max;

    void validate() const;
    [[nodiscard]] bool contains(const StateVec& x, double rel_tol = 0.0) const;
};

enum class ParamKind {
    InputJacobian,  // entry (row, col) of a^(j)
    Input,          // u_j
    Beta,           // entry (row = j, col) of beta
    InputMap,       // entry (row, col = j) of g2
};

struct SchedulingParameter {
    std::string name;
    ParamKind kind;
    Eigen::Index j = 0;  // input column (InputJacobian, Input)
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    double min = 0.0;
    double max = 0.0;

    [[nodiscard]] bool degenerate() const { return !(max > min); }
};

/// Scheduling parameters in the fixed order (a..., u..., beta..., g...).
/// For the scalar DEA this is exactly (a, u, beta, g).
struct ParameterBounds {
    std::vector<SchedulingParameter> params;

    [[nodiscard]] std::size_t count() const { return params.size(); }
    [[nodiscard]] std::size_t vertex_count() const { return std::size_t{1} << params.size(); }
    [[nodiscard]] const SchedulingParameter& find(const std::string& name) const;
};

/// Corner i of the parameter box uses bit j of i for parameter j (0 = min, 1 = max).
inline bool corner_is_high(std::size_t vertex, std::size_t param) { return ((vertex >> param) & 1U) != 0U; }

struct VertexSet {
    ParameterBounds bounds;
    std::vector<Eigen::MatrixXd> A_bar;  // 2n x 2n
    std::vector<Eigen::MatrixXd> C_bar;  // m x 2n

    [[nodiscard]] std::size_t size() const { return A_bar.size(); }
    [[nodiscard]] std::vector<bool> corner(std::size_t i) const;
    [[nodiscard]] Eigen::Index state_dim() const { return A_bar.front().rows(); }
    [[nodiscard]] Eigen::Index output_dim() const { return C_bar.front().rows(); }
};

struct WeightVector {
    Eigen::VectorXd h;
    /// True when at least one sector variable had to be clamped into [0, 1].
    bool clamped = false;
};

ParameterBounds compute_parameter_bounds(const PHSystem& sys, const OperatingDomain& dom);

VertexSet enumerate_vertices(const PHSystem& sys, const ParameterBounds& bounds);

/// Scheduling parameter values at the estimate, in the order of `bounds.params`.
std::vector<double> scheduling_values(const PHSystem& sys, const ParameterBounds& bounds, const StateVec& xhat,
                                      const Eigen::VectorXd& u);

WeightVector weights(const PHSystem& sys, const ParameterBounds& bounds, const StateVec& xhat, const Eigen::VectorXd& u);
/// Same as above from precomputed parameter values.
WeightVector weights_from_values(const ParameterBounds& bounds, const std::vector<double>& theta);

/// d gamma / dx at xbar: [[0, 0], [sum_j a^(j) u_j, 0]] - L [beta, Gamma].
Eigen::MatrixXd jacobian_gamma(const PHSystem& sys, const StateVec& xbar, const Eigen::VectorXd& u,
                               const Eigen::MatrixXd& L);

/// sum_i h_i (A_bar_i - L C_bar_i).
Eigen::MatrixXd reconstruct(const WeightVector& h, const VertexSet& V, const Eigen::MatrixXd& L);

using JacobianFn = std::function<Eigen::MatrixXd(const StateVec&)>;

/// Residual norm of gamma(x,u) - gamma(xhat,u) - (int_0^1 dgamma/dx(xhat + s(x - xhat)) ds)(x - xhat),
/// integrated with adaptive Gauss-Legendre quadrature. `jacobian` overrides the analytic Jacobian.
double mean_value_check(const PHSystem& sys, const StateVec& x, const StateVec& xhat, const Eigen::VectorXd& u,
                        const Eigen::MatrixXd& L, const JacobianFn& jacobian = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int order);

}  // namespace phobs
