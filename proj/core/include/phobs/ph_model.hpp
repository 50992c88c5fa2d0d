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

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace phobs {

/// Displacement/momentum pair x = [q; p] of a mechanical port-Hamiltonian system.
struct StateVec {
    Eigen::VectorXd q;
    Eigen::VectorXd p;

    StateVec() = default;
    StateVec(Eigen::VectorXd q_in, Eigen::VectorXd p_in) : q(std::move(q_in)), p(std::move(p_in)) {}

    static StateVec zero(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)}; }
    static StateVec from_stacked(const Eigen::VectorXd& x);

    [[nodiscard]] Eigen::Index dim() const { return q.size(); }
    [[nodiscard]] Eigen::VectorXd stacked() const;
    [[nodiscard]] bool finite() const { return q.allFinite() && p.allFinite(); }

    friend StateVec operator-(const StateVec& a, const StateVec& b) { return {a.q - b.q, a.p - b.p}; }
    friend StateVec operator+(const StateVec& a, const StateVec& b) { return {a.q + b.q, a.p + b.p}; }
    friend StateVec operator*(double s, const StateVec& a) { return {s * a.q, s * a.p}; }
};

/// Scalar dielectric elastomer actuator: g2(q) = 2 eps (q + q0)^3, SI units throughout.
struct DEAParams {
    double mass_kg = 1.0;
    double stiffness_N_per_m = 1000.0;
    double damping_Ns_per_m = 50.0;
    double q0_m = 1e-3;
    double eps_F_per_m = 2.8;

    void validate() const;
    [[nodiscard]] double g2(double q) const;
    [[nodiscard]] double a(double q) const;
};

/// State-dependent input map g2(q) in R^{n x m} together with its column Jacobians
/// a^(j)(q) = d g2^(j) / dq in R^{n x n}.
struct InputMap {
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> g2;
    std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> jacobians;
    /// Throws std::domain_error when the q-box [q_min, q_max] leaves the region where
    /// the map is monotone per entry (corner evaluation of bounds is exact there).
    std::function<void(const Eigen::VectorXd& q_min, const Eigen::VectorXd& q_max)> check_box;
};

/// The plant x' = (J - R) Q x + g(x) u,  y = g(x)^T Q x  with g = [0; g2(q)].
class PHSystem {
public:
    /// Validates symmetry/definiteness and runs a finite-difference consistency check
    /// of the Jacobians against g2 at `probe_q` (relative tolerance 1e-5).
    PHSystem(Eigen::MatrixXd stiffness, Eigen::MatrixXd mass, Eigen::MatrixXd damping, Eigen::Index inputs,
             InputMap input_map, std::optional<Eigen::VectorXd> probe_q = std::nullopt);

    static PHSystem dea(const DEAParams& params);

    [[nodiscard]] Eigen::Index n() const { return K_.rows(); }
    [[nodiscard]] Eigen::Index m() const { return m_; }
    [[nodiscard]] Eigen::Index state_dim() const { return 2 * K_.rows(); }

    [[nodiscard]] const Eigen::MatrixXd& K() const { return K_; }
    [[nodiscard]] const Eigen::MatrixXd& M() const { return M_; }
    [[nodiscard]] const Eigen::MatrixXd& M_inv() const { return M_inv_; }
    [[nodiscard]] const Eigen::MatrixXd& eta() const { return eta_; }
    [[nodiscard]] const Eigen::MatrixXd& Q() const { return Q_; }
    [[nodiscard]] const Eigen::MatrixXd& J() const { return J_; }
    [[nodiscard]] const Eigen::MatrixXd& R() const { return R_; }
    [[nodiscard]] const InputMap& input_map() const { return map_; }
    [[nodiscard]] const std::optional<DEAParams>& dea_params() const { return dea_; }

private:
    Eigen::MatrixXd K_, M_, M_inv_, eta_, Q_, J_, R_;
    Eigen::Index m_;
    InputMap map_;
    std::optional<DEAParams> dea_;
};

/// H(x) = 1/2 q^T K q + 1/2 p^T M^{-1} p.
double hamiltonian(const PHSystem& sys, const StateVec& x);
/// Q x, stacked as [K q; M^{-1} p].
Eigen::VectorXd grad_h(const PHSystem& sys, const StateVec& x);
/// A0 = (J - R) Q, the constant part of the error dynamics.
Eigen::MatrixXd drift_matrix(const PHSystem& sys);

Eigen::MatrixXd g2_eval(const PHSystem& sys, const Eigen::VectorXd& q);
std::vector<Eigen::MatrixXd> a_eval(const PHSystem& sys, const Eigen::VectorXd& q);
/// Row j is [a^(j)(q)]^T M^{-1} p.
Eigen::MatrixXd beta_eval(const PHSystem& sys, const Eigen::VectorXd& q, const Eigen::VectorXd& p);
/// Gamma(q) = g2(q)^T M^{-1}.
Eigen::MatrixXd gamma_cap_eval(const PHSystem& sys, const Eigen::VectorXd& q);

/// Full input matrix g(x) = [0; g2(q)] in R^{2n x m}.
Eigen::MatrixXd input_matrix(const PHSystem& sys, const Eigen::VectorXd& q);

/// gamma(x, u) = g(x) u - L g(x)^T Q x.
Eigen::VectorXd gamma_eval(const PHSystem& sys, const StateVec& x, const Eigen::VectorXd& u, const Eigen::MatrixXd& L);

StateVec plant_rhs(const PHSystem& sys, const StateVec& x, const Eigen::VectorXd& u);
/// y = g(x)^T Q x = g2(q)^T M^{-1} p.
Eigen::VectorXd output(const PHSystem& sys, const StateVec& x);

struct HessianBounds {
    double h1;
    double h2;
};
HessianBounds hessian_bounds(const PHSystem& sys);

}  // namespace phobs
