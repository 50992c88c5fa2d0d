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

#include "phobs/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "phobs/symmetric_eigen.hpp"

namespace phobs {

std::string to_string(GainMode mode) { return mode == GainMode::Constant ? "const" : "sched"; }

GainMode gain_mode_from_string(const std::string& s) {
    if (s == "const" || s == "constant")
        return GainMode::Constant;
    if (s == "sched" || s == "scheduled")
        return GainMode::Scheduled;
    throw std::invalid_argument("unknown gain mode '" + s + "' (expected const or sched)");
}

std::string to_string(FeasibilityStatus s) {
    switch (s) {
        case FeasibilityStatus::Feasible: return "feasible";
        case FeasibilityStatus::Infeasible: return "infeasible";
        case FeasibilityStatus::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::size_t LMIProblem::variable_count() const {
    const auto d = static_cast<std::size_t>(state_dim());
    const auto m = static_cast<std::size_t>(output_dim());
    return d * (d + 1) / 2 + gain_count * d * m;
}

void LMIProblem::validate() const {
    if (constraints.empty())
        throw std::invalid_argument("LMI problem without constraints");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("decay rate must be finite and non-negative");
    if (!(delta > 0.0) || !(p_floor > 0.0) || !(trace_cap > p_floor))
        throw std::invalid_argument("LMI margins must satisfy delta > 0, 0 < floor < trace cap");
    const Eigen::Index d = state_dim();
    const Eigen::Index m = output_dim();
    for (const auto& c : constraints) {
        if (c.A_bar.rows() != d || c.A_bar.cols() != d || c.C_bar.rows() != m || c.C_bar.cols() != d)
            throw std::invalid_argument("inconsistent vertex dimensions");
        if (!c.A_bar.allFinite() || !c.C_bar.allFinite())
            throw std::invalid_argument("non-finite vertex data");
        if (c.gain >= gain_count)
            throw std::invalid_argument("constraint references a missing gain");
    }
}

LMIProblem build_problem(const VertexSet& V, double lambda, GainMode mode) {
    if (V.size() == 0)
        throw std::invalid_argument("empty vertex set");
    LMIProblem prob;
    prob.mode = mode;
    prob.lambda = lambda;
    double max_norm = 0.0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        prob.constraints.push_back({V.A_bar[i], V.C_bar[i], mode == GainMode::Constant ? 0 : i});
        max_norm = std::max(max_norm, V.A_bar[i].norm());
    }
    prob.gain_count = mode == GainMode::Constant ? 1 : V.size();
    const double two_n = static_cast<double>(V.state_dim());
    prob.delta = 1e-8 * (1.0 + max_norm);
    prob.trace_cap = two_n;
    prob.p_floor = 1e-8 * prob.trace_cap / two_n;
    prob.validate();
    return prob;
}

LMIProblem build_constant_problem(const VertexSet& V, double lambda) { return build_problem(V, lambda, GainMode::Constant); }

LMIProblem build_scheduled_problem(const VertexSet& V, double lambda) { return build_problem(V, lambda, GainMode::Scheduled); }

Eigen::MatrixXd lmi_residual(const LmiConstraint& c, const Eigen::MatrixXd& P, const Eigen::MatrixXd& K, double lambda) {
    const Eigen::MatrixXd PA = P * c.A_bar;
    const Eigen::MatrixXd KC = K * c.C_bar;
    Eigen::MatrixXd S = PA + PA.transpose() - KC - KC.transpose() + 2.0 * lambda * P;
    return 0.5 * (S + S.transpose());
}

VerificationReport verify_solution(const LMIProblem& prob, const Eigen::MatrixXd& P, const std::vector<Eigen::MatrixXd>& gains) {
    VerificationReport rep;
    const Eigen::Index d = prob.state_dim();
    if (P.rows() != d || P.cols() != d || gains.size() != prob.gain_count) {
        rep.message = "solution has the wrong shape";
        return rep;
    }
    if (!P.allFinite()) {
        rep.message = "P has non-finite entries";
        return rep;
    }
    const Eigen::MatrixXd Ps = 0.5 * (P + P.transpose());
    const auto pe = jacobi_eigen(Ps);
    rep.p_min_eigenvalue = pe.values(0);
    rep.p_max_eigenvalue = pe.values(pe.values.size() - 1);

    rep.max_residual_eigenvalue = -std::numeric_limits<double>::infinity();
    for (const auto& c : prob.constraints) {
        const double e = jacobi_max_eigenvalue(lmi_residual(c, Ps, gains[c.gain], prob.lambda));
        rep.vertex_max_eigenvalues.push_back(e);
        rep.max_residual_eigenvalue = std::max(rep.max_residual_eigenvalue, e);
    }

    std::ostringstream os;
    if (!(rep.p_min_eigenvalue > 0.0)) {
        os << "P not positive definite (min eigenvalue " << rep.p_min_eigenvalue << ")";
    } else if (!(rep.max_residual_eigenvalue < 0.0)) {
        os << "LMI residual not negative definite (max eigenvalue " << rep.max_residual_eigenvalue << ")";
    } else {
        rep.passed = true;
        os << "ok";
    }
    rep.message = os.str();
    return rep;
}

namespace {

// Scaled copy of the problem data: A' = A / sA, C' = C / sC, lambda' = lambda / sA.
// With K = sA K' / sC every residual satisfies S = sA S'.
struct Scaled {
    double sA = 1.0;
    double sC = 1.0;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> C;
    double lambda = 0.0;
    double delta = 0.0;
};

Scaled scale(const LMIProblem& prob) {
    Scaled s;
    double max_a = 0.0;
    double max_c = 0.0;
    for (const auto& c : prob.constraints) {
        max_a = std::max(max_a, c.A_bar.norm());
        max_c = std::max(max_c, c.C_bar.cwiseAbs().maxCoeff());
    }
    s.sA = 1.0 + max_a;
    s.sC = max_c > 0.0 ? max_c : 1.0;
    for (const auto& c : prob.constraints) {
        s.A.push_back(c.A_bar / s.sA);
        s.C.push_back(c.C_bar / s.sC);
    }
    s.lambda = prob.lambda / s.sA;
    s.delta = prob.delta / s.sA;
    return s;
}

// Variable layout shared by all stages: P (upper triangle), gains (column-major), then stage extras.
class Layout {
public:
    Layout(Eigen::Index d, Eigen::Index m, std::size_t gains) : d_(d), m_(m), gains_(gains) {}

    [[nodiscard]] std::size_t p_count() const { return static_cast<std::size_t>(d_ * (d_ + 1) / 2); }
    [[nodiscard]] std::size_t k_count() const { return static_cast<std::size_t>(d_ * m_); }
    [[nodiscard]] std::size_t base_count() const { return p_count() + gains_ * k_count(); }
    [[nodiscard]] std::size_t k_var(std::size_t g, std::size_t e) const { return p_count() + g * k_count() + e; }

    [[nodiscard]] Eigen::MatrixXd p_basis(std::size_t idx) const {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d_, d_);
        std::size_t k = 0;
        for (Eigen::Index c = 0; c < d_; ++c)
            for (Eigen::Index r = 0; r <= c; ++r, ++k)
                if (k == idx) {
                    E(r, c) = 1.0;
                    E(c, r) = 1.0;
                    return E;
                }
        throw std::out_of_range("P basis index");
    }

    [[nodiscard]] Eigen::MatrixXd k_basis(std::size_t e) const {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d_, m_);
        E(static_cast<Eigen::Index>(e) % d_, static_cast<Eigen::Index>(e) / d_) = 1.0;
        return E;
    }

    [[nodiscard]] Eigen::MatrixXd P(const Eigen::VectorXd& y) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d_, d_);
        for (std::size_t i = 0; i < p_count(); ++i)
            out += y(static_cast<Eigen::Index>(i)) * p_basis(i);
        return out;
    }

    [[nodiscard]] Eigen::MatrixXd K(const Eigen::VectorXd& y, std::size_t g) const {
        Eigen::MatrixXd out(d_, m_);
        for (std::size_t e = 0; e < k_count(); ++e)
            out(static_cast<Eigen::Index>(e) % d_, static_cast<Eigen::Index>(e) / d_) = y(static_cast<Eigen::Index>(k_var(g, e)));
        return out;
    }

    [[nodiscard]] Eigen::Index d() const { return d_; }
    [[nodiscard]] Eigen::Index m() const { return m_; }
    [[nodiscard]] std::size_t gains() const { return gains_; }

private:
    Eigen::Index d_, m_;
    std::size_t gains_;
};

// Adds -S_i(P, K) terms for vertex i to `blk`.
void add_vertex_terms(sdp::Problem& sdpp, std::size_t blk, const LMIProblem& prob, const Scaled& sc, const Layout& lay,
                      std::size_t i) {
    const Eigen::MatrixXd& A = sc.A[i];
    const Eigen::MatrixXd& C = sc.C[i];
    for (std::size_t v = 0; v < lay.p_count(); ++v) {
        const Eigen::MatrixXd E = lay.p_basis(v);
        const Eigen::MatrixXd EA = E * A;
        sdpp.add_term(v, blk, -(EA + EA.transpose() + 2.0 * sc.lambda * E));
    }
    const std::size_t g = prob.constraints[i].gain;
    for (std::size_t e = 0; e < lay.k_count(); ++e) {
        const Eigen::MatrixXd EC = lay.k_basis(e) * C;
        sdpp.add_term(lay.k_var(g, e), blk, EC + EC.transpose());
    }
}

// Floor, trace cap and gain box; shared by every formulation.
void add_normalization(sdp::Problem& sdpp, const LMIProblem& prob, const Layout& lay, double box) {
    const Eigen::Index d = lay.d();
    {
        const auto blk = sdpp.add_block(d);
        for (std::size_t v = 0; v < lay.p_count(); ++v)
            sdpp.add_term(v, blk, lay.p_basis(v));
        sdpp.C[blk] = prob.p_floor * Eigen::MatrixXd::Identity(d, d);
    }
    {
        const auto blk = sdpp.add_block(1);
        for (std::size_t v = 0; v < lay.p_count(); ++v)
            sdpp.add_term(v, blk, Eigen::MatrixXd::Constant(1, 1, -lay.p_basis(v).trace()));
        sdpp.C[blk](0, 0) = -prob.trace_cap;
    }
    for (std::size_t g = 0; g < lay.gains(); ++g)
        for (std::size_t e = 0; e < lay.k_count(); ++e)
            for (const double sign : {1.0, -1.0}) {
                const auto blk = sdpp.add_block(1);
                sdpp.add_term(lay.k_var(g, e), blk, Eigen::MatrixXd::Constant(1, 1, sign));
                sdpp.C[blk](0, 0) = -box;
            }
}

// minimize t  s.t.  S_i <= t I, normalization.
sdp::Problem build_phase_one(const LMIProblem& prob, const Scaled& sc, const Layout& lay, double box) {
    sdp::Problem sdpp;
    for (std::size_t i = 0; i < lay.base_count(); ++i)
        sdpp.add_variable(0.0);
    const std::size_t t = sdpp.add_variable(1.0);
    const Eigen::Index d = lay.d();
    for (std::size_t i = 0; i < prob.constraints.size(); ++i) {
        const auto blk = sdpp.add_block(d);
        add_vertex_terms(sdpp, blk, prob, sc, lay, i);
        sdpp.add_term(t, blk, Eigen::MatrixXd::Identity(d, d));
    }
    add_normalization(sdpp, prob, lay, box);
    return sdpp;
}

// The strict set  -delta I - S_i > 0, normalization; its analytic center picks the gains.
sdp::Problem build_barrier(const LMIProblem& prob, const Scaled& sc, const Layout& lay, double box) {
    sdp::Problem sdpp;
    for (std::size_t i = 0; i < lay.base_count(); ++i)
        sdpp.add_variable(0.0);
    const Eigen::Index d = lay.d();
    for (std::size_t i = 0; i < prob.constraints.size(); ++i) {
        const auto blk = sdpp.add_block(d);
        add_vertex_terms(sdpp, blk, prob, sc, lay, i);
        sdpp.C[blk] = sc.delta * Eigen::MatrixXd::Identity(d, d);
    }
    add_normalization(sdpp, prob, lay, box);
    return sdpp;
}

// minimize s  s.t.  Z_b(y) + s I >= 0 for every block of the barrier problem.
sdp::Problem build_interior_search(const sdp::Problem& barrier) {
    sdp::Problem sdpp = barrier;
    sdpp.b.setZero();
    const std::size_t s = sdpp.add_variable(1.0);
    for (std::size_t k = 0; k < sdpp.block_count(); ++k)
        sdpp.add_term(s, k, Eigen::MatrixXd::Identity(sdpp.block_sizes[k], sdpp.block_sizes[k]));
    return sdpp;
}

bool converged(const sdp::Solution& s, double tol) {
    return s.relative_gap < tol && s.primal_infeasibility < tol && s.dual_infeasibility < tol;
}

void extract(const Layout& lay, const Scaled& sc, const Eigen::VectorXd& y, Eigen::MatrixXd& P, std::vector<Eigen::MatrixXd>& K) {
    P = lay.P(y);
    K.clear();
    for (std::size_t g = 0; g < lay.gains(); ++g)
        K.push_back(sc.sA * lay.K(y, g) / sc.sC);
}

}  // namespace

FeasibilityResult solve_feasibility(const LMIProblem& prob, const FeasibilityOptions& options, const sdp::Backend* backend) {
    prob.validate();
    const sdp::InteriorPointSolver builtin;
    const sdp::Backend& solver = backend != nullptr ? *backend : builtin;

    const Scaled sc = scale(prob);
    const Layout lay(prob.state_dim(), prob.output_dim(), prob.gain_count);
    FeasibilityResult res;

    const auto p1 = solver.solve(build_phase_one(prob, sc, lay, options.gain_box), options.solver);
    res.iterations += p1.iterations;
    res.phase1_t = sc.sA * p1.dual_objective;
    res.phase1_lower_bound = sc.sA * p1.primal_objective;
    res.phase1_gap = p1.relative_gap;
    const bool p1_converged = converged(p1, 1e-8);

    std::ostringstream detail;
    detail << "phase I: " << sdp::to_string(p1.status) << ", t* = " << res.phase1_t << ", gap " << p1.relative_gap;

    if (p1.y.allFinite()) {
        extract(lay, sc, p1.y, res.P, res.gains);
        res.verification = verify_solution(prob, res.P, res.gains);
        res.worst_eigenvalue = res.verification.max_residual_eigenvalue;
    }
    if (p1_converged && p1.primal_objective > 0.0) {
        res.status = FeasibilityStatus::Infeasible;
        res.detail = detail.str();
        return res;
    }
    if (!p1.y.allFinite() || res.phase1_t > -prob.delta) {
        res.status = FeasibilityStatus::Inconclusive;
        detail << "; margin " << -res.phase1_t << " below delta " << prob.delta;
        res.detail = detail.str();
        return res;
    }

    if (options.center) {
        for (double box = options.center_box; box <= options.gain_box * (1.0 + 1e-12); box *= 10.0) {
            const sdp::Problem barrier = build_barrier(prob, sc, lay, box);
            const auto start = solver.solve(build_interior_search(barrier), options.solver);
            res.iterations += start.iterations;
            if (!start.y.allFinite() || !(start.dual_objective < 0.0))
                continue;
            const Eigen::VectorXd y0 = start.y.head(static_cast<Eigen::Index>(lay.base_count()));
            sdp::CenterResult center;
            try {
                center = sdp::analytic_center(barrier, y0);
            } catch (const std::invalid_argument&) {
                continue;
            }
            res.center_iterations = center.iterations;
            Eigen::MatrixXd P;
            std::vector<Eigen::MatrixXd> K;
            extract(lay, sc, center.y, P, K);
            auto rep = verify_solution(prob, P, K);
            if (rep.passed && rep.max_residual_eigenvalue <= -0.5 * prob.delta) {
                res.P = std::move(P);
                res.gains = std::move(K);
                res.verification = std::move(rep);
                res.centered = true;
                res.center_box = box;
                detail << "; centered (box " << box << ", " << center.iterations << " Newton steps"
                       << (center.converged ? "" : ", not converged") << ")";
                break;
            }
        }
        if (!res.centered)
            detail << "; centering failed, kept phase I point";
    }

    res.worst_eigenvalue = res.verification.max_residual_eigenvalue;
    if (res.verification.passed && res.worst_eigenvalue <= -0.5 * prob.delta) {
        res.status = FeasibilityStatus::Feasible;
    } else {
        res.status = FeasibilityStatus::Inconclusive;
        detail << "; verification: " << res.verification.message;
    }
    res.detail = detail.str();
    return res;
}

}  // namespace phobs
