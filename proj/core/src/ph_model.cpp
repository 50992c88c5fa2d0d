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

#include "phobs/ph_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phobs {

namespace {

void require_symmetric(const Eigen::MatrixXd& A, const char* name) {
    if (A.rows() != A.cols())
        throw std::invalid_argument(std::string(name) + " must be square");
    if (!A.allFinite())
        throw std::invalid_argument(std::string(name) + " has non-finite entries");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument(std::string(name) + " must be symmetric");
}

double min_eigenvalue(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Central-difference check of the analytic column Jacobians against g2.
void check_jacobians(const InputMap& map, const Eigen::VectorXd& q, Eigen::Index n, Eigen::Index m) {
    const auto g = map.g2(q);
    const auto a = map.jacobians(q);
    if (g.rows() != n || g.cols() != m)
        throw std::invalid_argument("g2(q) has the wrong shape");
    if (static_cast<Eigen::Index>(a.size()) != m)
        throw std::invalid_argument("expected one Jacobian per input column");

    for (Eigen::Index s = 0; s < n; ++s) {
        const double h = 1e-6 * std::max(1e-3, std::abs(q(s)));
        Eigen::VectorXd qp = q, qm = q;
        qp(s) += h;
        qm(s) -= h;
        const Eigen::MatrixXd dg = (map.g2(qp) - map.g2(qm)) / (2.0 * h);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const double fd = dg(r, j);
                const double an = a[static_cast<size_t>(j)](r, s);
                const double scale = std::max({std::abs(fd), std::abs(an), 1e-300});
                if (std::abs(fd - an) > 1e-5 * scale && std::abs(fd - an) > 1e-12) {
                    std::ostringstream os;
                    os << "input map Jacobian a^(" << j << ")(" << r << "," << s << ") = " << an
                       << " disagrees with finite difference " << fd;
                    throw std::invalid_argument(os.str());
                }
            }
        }
    }
}

}  // namespace

StateVec StateVec::from_stacked(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size() / 2;
    return {x.head(n), x.tail(n)};
}

Eigen::VectorXd StateVec::stacked() const {
    Eigen::VectorXd x(q.size() + p.size());
    x << q, p;
    return x;
}

void DEAParams::validate() const {
    if (!(mass_kg > 0) || !(stiffness_N_per_m > 0) || !(damping_Ns_per_m > 0) || !(q0_m > 0) || !(eps_F_per_m > 0))
        throw std::invalid_argument("DEA parameters must be strictly positive");
}

double DEAParams::g2(double q) const {
    const double s = q + q0_m;
    return 2.0 * eps_F_per_m * s * s * s;
}

double DEAParams::a(double q) const {
    const double s = q + q0_m;
    return 6.0 * eps_F_per_m * s * s;
}

PHSystem::PHSystem(Eigen::MatrixXd stiffness, Eigen::MatrixXd mass, Eigen::MatrixXd damping, Eigen::Index inputs,
                   InputMap input_map, std::optional<Eigen::VectorXd> probe_q)
    : K_(std::move(stiffness)), M_(std::move(mass)), eta_(std::move(damping)), m_(inputs), map_(std::move(input_map)) {
    require_symmetric(K_, "K");
    require_symmetric(M_, "M");
    require_symmetric(eta_, "eta");
    const Eigen::Index n = K_.rows();
    if (n == 0 || M_.rows() != n || eta_.rows() != n)
        throw std::invalid_argument("K, M and eta must share dimension n > 0");
    if (m_ <= 0)
        throw std::invalid_argument("input dimension must be positive");
    if (min_eigenvalue(K_) <= 0.0)
        throw std::invalid_argument("K must be positive definite");
    if (min_eigenvalue(M_) <= 0.0)
        throw std::invalid_argument("M must be positive definite");
    if (min_eigenvalue(eta_) < -1e-12 * std::max(1.0, eta_.norm()))
        throw std::invalid_argument("eta must be positive semidefinite");
    if (!map_.g2 || !map_.jacobians)
        throw std::invalid_argument("input map needs both g2 and its Jacobians");

    M_inv_ = M_.llt().solve(Eigen::MatrixXd::Identity(n, n));
    M_inv_ = 0.5 * (M_inv_ + M_inv_.transpose());

    Q_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Q_.topLeftCorner(n, n) = K_;
    Q_.bottomRightCorner(n, n) = M_inv_;

    J_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J_.topRightCorner(n, n).setIdentity();
    J_.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);

    R_ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    R_.bottomRightCorner(n, n) = eta_;

    check_jacobians(map_, probe_q.value_or(Eigen::VectorXd::Zero(n)), n, m_);
}

PHSystem PHSystem::dea(const DEAParams& params) {
    params.validate();
    InputMap map;
    map.g2 = [params](const Eigen::VectorXd& q) {
        Eigen::MatrixXd g(1, 1);
        g(0, 0) = params.g2(q(0));
        return g;
    };
    map.jacobians = [params](const Eigen::VectorXd& q) {
        Eigen::MatrixXd a(1, 1);
        a(0, 0) = params.a(q(0));
        return std::vector<Eigen::MatrixXd>{a};
    };
    map.check_box = [params](const Eigen::VectorXd& q_min, const Eigen::VectorXd&) {
        if (q_min(0) + params.q0_m <= 0.0) {
            std::ostringstream os;
            os << "q_min + q0 = " << q_min(0) + params.q0_m << " <= 0: the DEA input map is not monotone on the box";
            throw std::domain_error(os.str());
        }
    };
    PHSystem sys(Eigen::MatrixXd::Constant(1, 1, params.stiffness_N_per_m), Eigen::MatrixXd::Constant(1, 1, params.mass_kg),
                 Eigen::MatrixXd::Constant(1, 1, params.damping_Ns_per_m), 1, std::move(map));
    sys.dea_ = params;
    return sys;
}

double hamiltonian(const PHSystem& sys, const StateVec& x) {
    return 0.5 * x.q.dot(sys.K() * x.q) + 0.5 * x.p.dot(sys.M_inv() * x.p);
}

Eigen::VectorXd grad_h(const PHSystem& sys, const StateVec& x) {
    Eigen::VectorXd g(sys.state_dim());
    g << sys.K() * x.q, sys.M_inv() * x.p;
    return g;
}

Eigen::MatrixXd drift_matrix(const PHSystem& sys) { return (sys.J() - sys.R()) * sys.Q(); }

Eigen::MatrixXd g2_eval(const PHSystem& sys, const Eigen::VectorXd& q) { return sys.input_map().g2(q); }

std::vector<Eigen::MatrixXd> a_eval(const PHSystem& sys, const Eigen::VectorXd& q) {
    return sys.input_map().jacobians(q);
}

Eigen::MatrixXd beta_eval(const PHSystem& sys, const Eigen::VectorXd& q, const Eigen::VectorXd& p) {
    const auto a = a_eval(sys, q);
    const Eigen::VectorXd v = sys.M_inv() * p;
    Eigen::MatrixXd beta(sys.m(), sys.n());
    for (Eigen::Index j = 0; j < sys.m(); ++j)
        beta.row(j) = (a[static_cast<size_t>(j)].transpose() * v).transpose();
    return beta;
}

Eigen::MatrixXd gamma_cap_eval(const PHSystem& sys, const Eigen::VectorXd& q) {
    return g2_eval(sys, q).transpose() * sys.M_inv();
}

Eigen::MatrixXd input_matrix(const PHSystem& sys, const Eigen::VectorXd& q) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(sys.state_dim(), sys.m());
    g.bottomRows(sys.n()) = g2_eval(sys, q);
    return g;
}

Eigen::VectorXd gamma_eval(const PHSystem& sys, const StateVec& x, const Eigen::VectorXd& u, const Eigen::MatrixXd& L) {
    const Eigen::MatrixXd g = input_matrix(sys, x.q);
    return g * u - L * (g.transpose() * grad_h(sys, x));
}

StateVec plant_rhs(const PHSystem& sys, const StateVec& x, const Eigen::VectorXd& u) {
    const Eigen::VectorXd v = sys.M_inv() * x.p;
    StateVec dx;
    dx.q = v;
    dx.p = -sys.K() * x.q - sys.eta() * v + g2_eval(sys, x.q) * u;
    return dx;
}

Eigen::VectorXd output(const PHSystem& sys, const StateVec& x) {
    return g2_eval(sys, x.q).transpose() * (sys.M_inv() * x.p);
}

HessianBounds hessian_bounds(const PHSystem& sys) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.Q(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace phobs
