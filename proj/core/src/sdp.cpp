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

#include "phobs/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phobs::sdp {

std::size_t Problem::add_block(Eigen::Index size) {
    block_sizes.push_back(size);
    C.push_back(Eigen::MatrixXd::Zero(size, size));
    return block_sizes.size() - 1;
}

std::size_t Problem::add_variable(double cost) {
    A.emplace_back();
    b.conservativeResize(static_cast<Eigen::Index>(A.size()));
    b(b.size() - 1) = cost;
    return A.size() - 1;
}

void Problem::add_term(std::size_t variable, std::size_t block, const Eigen::MatrixXd& value) {
    if (block >= block_sizes.size())
        throw std::out_of_range("sdp: block index out of range");
    for (auto& t : A.at(variable))
        if (t.block == block) {
            t.value += value;
            return;
        }
    A.at(variable).push_back({block, value});
}

std::vector<Eigen::MatrixXd> Problem::slack(const Eigen::VectorXd& y) const {
    std::vector<Eigen::MatrixXd> Z;
    Z.reserve(C.size());
    for (const auto& c : C)
        Z.push_back(-c);
    for (std::size_t i = 0; i < A.size(); ++i)
        for (const auto& t : A[i])
            Z[t.block] += y(static_cast<Eigen::Index>(i)) * t.value;
    return Z;
}

void Problem::validate() const {
    if (C.size() != block_sizes.size())
        throw std::invalid_argument("sdp: one C block per block size required");
    if (static_cast<std::size_t>(b.size()) != A.size())
        throw std::invalid_argument("sdp: objective length must equal the variable count");
    for (std::size_t k = 0; k < C.size(); ++k)
        if (C[k].rows() != block_sizes[k] || C[k].cols() != block_sizes[k] || !C[k].allFinite())
            throw std::invalid_argument("sdp: malformed C block");
    for (const auto& terms : A)
        for (const auto& t : terms) {
            if (t.block >= block_sizes.size())
                throw std::invalid_argument("sdp: term references a missing block");
            if (t.value.rows() != block_sizes[t.block] || t.value.cols() != block_sizes[t.block] || !t.value.allFinite())
                throw std::invalid_argument("sdp: malformed constraint term");
        }
    if (!b.allFinite())
        throw std::invalid_argument("sdp: non-finite objective");
}

std::string to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::MaxIterations: return "max-iterations";
        case Status::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

double trace_product(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    // tr(A B) for square A, B.
    return (A.cwiseProduct(B.transpose())).sum();
}

double frobenius(const Blocks& X) {
    double s = 0.0;
    for (const auto& x : X)
        s += x.squaredNorm();
    return std::sqrt(s);
}

// Largest alpha in (0, inf] with X + alpha D >= 0, for X > 0.
double max_step(const Blocks& X, const Blocks& D) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < X.size(); ++k) {
        Eigen::LLT<Eigen::MatrixXd> llt(X[k]);
        if (llt.info() != Eigen::Success)
            return 0.0;
        const Eigen::MatrixXd Li = llt.matrixL().solve(Eigen::MatrixXd::Identity(X[k].rows(), X[k].cols()));
        Eigen::MatrixXd M = Li * D[k] * Li.transpose();
        M = 0.5 * (M + M.transpose());
        const double e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        if (e < 0.0)
            alpha = std::min(alpha, -1.0 / e);
    }
    return alpha;
}

struct BlockUse {
    std::size_t variable;
    const Eigen::MatrixXd* value;
};

}  // namespace

Solution InteriorPointSolver::solve(const Problem& prob, const Settings& settings) const {
    prob.validate();
    const std::size_t nb = prob.block_count();
    const auto nv = static_cast<Eigen::Index>(prob.variable_count());

    std::vector<std::vector<BlockUse>> uses(nb);
    for (std::size_t i = 0; i < prob.A.size(); ++i)
        for (const auto& t : prob.A[i])
            uses[t.block].push_back({i, &t.value});

    Eigen::Index total_dim = 0;
    for (auto s : prob.block_sizes)
        total_dim += s;
    const double n_dim = static_cast<double>(total_dim);

    double max_a = 0.0;
    double max_ratio = 0.0;
    for (std::size_t i = 0; i < prob.A.size(); ++i) {
        double na = 0.0;
        for (const auto& t : prob.A[i])
            na += t.value.squaredNorm();
        na = std::sqrt(na);
        max_a = std::max(max_a, na);
        max_ratio = std::max(max_ratio, (1.0 + std::abs(prob.b(static_cast<Eigen::Index>(i)))) / (1.0 + na));
    }
    const double norm_c = frobenius(prob.C);
    const double norm_b = prob.b.norm();

    // Starting point scaled from the data.
    const double alpha0 = 10.0 * n_dim * max_ratio;
    const double beta0 = 10.0 * (1.0 + std::max(max_a, norm_c)) / std::sqrt(n_dim);

    Solution sol;
    sol.y = Eigen::VectorXd::Zero(nv);
    Blocks X(nb), Z(nb), Zinv(nb), Fd(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        const auto s = prob.block_sizes[k];
        X[k] = alpha0 * Eigen::MatrixXd::Identity(s, s);
        Z[k] = beta0 * Eigen::MatrixXd::Identity(s, s);
    }

    Eigen::VectorXd rp(nv);
    Eigen::MatrixXd M(nv, nv);
    Blocks W;

    // Degenerate optimal faces make the Schur matrix singular near the end; keep the
    // iterate with the smallest combined residual and fall back to it on a non-optimal exit.
    Solution best;
    double best_score = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter <= settings.max_iterations; ++iter) {
        sol.iterations = iter;
        for (std::size_t k = 0; k < nb; ++k) {
            Eigen::LLT<Eigen::MatrixXd> llt(Z[k]);
            if (llt.info() != Eigen::Success) {
                sol.status = Status::NumericalFailure;
                sol.X = X;
                sol.Z = Z;
                return sol;
            }
            Zinv[k] = llt.solve(Eigen::MatrixXd::Identity(Z[k].rows(), Z[k].cols()));
            Zinv[k] = 0.5 * (Zinv[k] + Zinv[k].transpose());
        }

        // Residuals.
        for (Eigen::Index i = 0; i < nv; ++i) {
            double ax = 0.0;
            for (const auto& t : prob.A[static_cast<std::size_t>(i)])
                ax += trace_product(t.value, X[t.block]);
            rp(i) = prob.b(i) - ax;
        }
        Blocks Aty = prob.slack(sol.y);  // sum y_i A_i - C
        for (std::size_t k = 0; k < nb; ++k)
            Fd[k] = Aty[k] - Z[k];

        double pobj = 0.0;
        double mu = 0.0;
        for (std::size_t k = 0; k < nb; ++k) {
            pobj += trace_product(prob.C[k], X[k]);
            mu += trace_product(X[k], Z[k]);
        }
        mu /= n_dim;
        const double dobj = prob.b.dot(sol.y);

        sol.primal_objective = pobj;
        sol.dual_objective = dobj;
        sol.relative_gap = std::abs(dobj - pobj) / (1.0 + std::abs(dobj) + std::abs(pobj));
        sol.primal_infeasibility = rp.norm() / (1.0 + norm_b);
        sol.dual_infeasibility = frobenius(Fd) / (1.0 + norm_c);

        if (!std::isfinite(sol.relative_gap) || !std::isfinite(mu)) {
            sol.status = Status::NumericalFailure;
            break;
        }
        const double score = std::max({sol.relative_gap, sol.primal_infeasibility, sol.dual_infeasibility});
        if (score < best_score) {
            best_score = score;
            best = sol;
            best.X = X;
            best.Z = Z;
        }
        if (sol.relative_gap < settings.tolerance && sol.primal_infeasibility < settings.tolerance &&
            sol.dual_infeasibility < settings.tolerance) {
            sol.status = Status::Optimal;
            break;
        }
        if (iter == settings.max_iterations) {
            sol.status = Status::MaxIterations;
            break;
        }

        // Schur complement M_ij = tr(A_i Z^{-1} A_j X).
        M.setZero();
        for (std::size_t k = 0; k < nb; ++k) {
            const auto& use = uses[k];
            W.resize(use.size());
            for (std::size_t a = 0; a < use.size(); ++a)
                W[a] = Zinv[k] * (*use[a].value) * X[k];
            for (std::size_t a = 0; a < use.size(); ++a)
                for (std::size_t c = 0; c < use.size(); ++c)
                    M(static_cast<Eigen::Index>(use[a].variable), static_cast<Eigen::Index>(use[c].variable)) +=
                        trace_product(*use[a].value, W[c]);
        }
        M = 0.5 * (M + M.transpose());
        Eigen::LLT<Eigen::MatrixXd> chol(M);
        Eigen::LDLT<Eigen::MatrixXd> ldlt;
        const bool use_llt = chol.info() == Eigen::Success;
        if (!use_llt)
            ldlt.compute(M);

        const auto direction = [&](const Blocks& Rc, Eigen::VectorXd& dy, Blocks& dX, Blocks& dZ) {
            Eigen::VectorXd rhs = -rp;
            for (std::size_t k = 0; k < nb; ++k) {
                const Eigen::MatrixXd T = Zinv[k] * (Rc[k] - Fd[k] * X[k]);
                for (const auto& u : uses[k])
                    rhs(static_cast<Eigen::Index>(u.variable)) += trace_product(*u.value, T);
            }
            const auto schur_solve = [&](const Eigen::VectorXd& r) {
                return use_llt ? Eigen::VectorXd(chol.solve(r)) : Eigen::VectorXd(ldlt.solve(r));
            };
            dy = schur_solve(rhs);
            dy += schur_solve(rhs - M * dy);
            dZ = Fd;
            for (std::size_t k = 0; k < nb; ++k)
                for (const auto& u : uses[k])
                    dZ[k] += dy(static_cast<Eigen::Index>(u.variable)) * (*u.value);
            dX.resize(nb);
            for (std::size_t k = 0; k < nb; ++k) {
                Eigen::MatrixXd d = Zinv[k] * (Rc[k] - dZ[k] * X[k]);
                dX[k] = 0.5 * (d + d.transpose());
            }
        };

        // Predictor.
        Blocks Rc(nb);
        for (std::size_t k = 0; k < nb; ++k)
            Rc[k] = -Z[k] * X[k];
        Eigen::VectorXd dy_aff;
        Blocks dX_aff, dZ_aff;
        direction(Rc, dy_aff, dX_aff, dZ_aff);
        const double ap_aff = std::min(1.0, max_step(X, dX_aff));
        const double ad_aff = std::min(1.0, max_step(Z, dZ_aff));
        double mu_aff = 0.0;
        for (std::size_t k = 0; k < nb; ++k)
            mu_aff += trace_product(X[k] + ap_aff * dX_aff[k], Z[k] + ad_aff * dZ_aff[k]);
        mu_aff /= n_dim;
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

        // Corrector.
        for (std::size_t k = 0; k < nb; ++k) {
            const auto s = prob.block_sizes[k];
            Rc[k] = sigma * mu * Eigen::MatrixXd::Identity(s, s) - Z[k] * X[k] - dZ_aff[k] * dX_aff[k];
        }
        Eigen::VectorXd dy;
        Blocks dX, dZ;
        direction(Rc, dy, dX, dZ);
        const double ap = std::min(1.0, settings.step_fraction * max_step(X, dX));
        const double ad = std::min(1.0, settings.step_fraction * max_step(Z, dZ));
        if (!(ap > 0.0) || !(ad > 0.0) || !dy.allFinite()) {
            sol.status = Status::NumericalFailure;
            break;
        }
        for (std::size_t k = 0; k < nb; ++k) {
            X[k] += ap * dX[k];
            Z[k] += ad * dZ[k];
        }
        sol.y += ad * dy;
    }

    sol.X = std::move(X);
    sol.Z = std::move(Z);
    if (sol.status != Status::Optimal && best_score < std::numeric_limits<double>::infinity()) {
        const Status status = sol.status;
        const int iterations = sol.iterations;
        sol = std::move(best);
        sol.status = status;
        sol.iterations = iterations;
    }
    return sol;
}

CenterResult analytic_center(const Problem& prob, const Eigen::VectorXd& y0, int max_iterations, double tolerance) {
    prob.validate();
    const std::size_t nb = prob.block_count();
    const auto nv = static_cast<Eigen::Index>(prob.variable_count());
    if (y0.size() != nv)
        throw std::invalid_argument("analytic center: start point has the wrong length");

    const auto factor = [&](const Eigen::VectorXd& y, Blocks& Zinv) {
        const Blocks Z = prob.slack(y);
        Zinv.resize(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            Eigen::LLT<Eigen::MatrixXd> llt(Z[k]);
            if (llt.info() != Eigen::Success)
                return false;
            Zinv[k] = llt.solve(Eigen::MatrixXd::Identity(Z[k].rows(), Z[k].cols()));
        }
        return true;
    };

    CenterResult res;
    res.y = y0;
    Blocks Zinv;
    if (!factor(res.y, Zinv))
        throw std::invalid_argument("analytic center: start point is not strictly feasible");

    Eigen::VectorXd g(nv);
    Eigen::MatrixXd H(nv, nv);
    Blocks ZA;
    for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
        g.setZero();
        H.setZero();
        for (std::size_t k = 0; k < nb; ++k) {
            std::vector<std::size_t> vars;
            ZA.clear();
            for (std::size_t i = 0; i < prob.A.size(); ++i)
                for (const auto& t : prob.A[i])
                    if (t.block == k) {
                        vars.push_back(i);
                        ZA.push_back(Zinv[k] * t.value);
                    }
            for (std::size_t a = 0; a < vars.size(); ++a) {
                const auto ia = static_cast<Eigen::Index>(vars[a]);
                g(ia) -= ZA[a].trace();
                for (std::size_t c = 0; c < vars.size(); ++c)
                    H(ia, static_cast<Eigen::Index>(vars[c])) += trace_product(ZA[a], ZA[c]);
            }
        }
        H = 0.5 * (H + H.transpose());
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        const Eigen::VectorXd d = -ldlt.solve(g);
        const double dec2 = -g.dot(d);
        res.newton_decrement = std::sqrt(std::max(dec2, 0.0));
        if (!d.allFinite())
            break;
        if (res.newton_decrement < tolerance) {
            res.converged = true;
            break;
        }
        double alpha = res.newton_decrement > 0.25 ? 1.0 / (1.0 + res.newton_decrement) : 1.0;
        Eigen::VectorXd next = res.y + alpha * d;
        while (!factor(next, Zinv)) {
            alpha *= 0.5;
            if (alpha < 1e-12)
                return res;
            next = res.y + alpha * d;
        }
        res.y = std::move(next);
    }
    return res;
}

}  // namespace phobs::sdp
