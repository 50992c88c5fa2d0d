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

#include "phobs/synthesis.hpp"

#include <cmath>
#include <stdexcept>

#include "phobs/symmetric_eigen.hpp"

namespace phobs {

Eigen::MatrixXd SynthesisResult::gain(const Eigen::VectorXd& h) const {
    if (mode == GainMode::Constant)
        return gains.front();
    if (static_cast<std::size_t>(h.size()) != gains.size())
        throw std::invalid_argument("weight vector length does not match the vertex gains");
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(gains.front().rows(), gains.front().cols());
    for (std::size_t i = 0; i < gains.size(); ++i)
        L += h(static_cast<Eigen::Index>(i)) * gains[i];
    return L;
}

double condition_number(const Eigen::MatrixXd& P) {
    const auto e = jacobi_eigen(P);
    const double lo = e.values(0);
    const double hi = e.values(e.values.size() - 1);
    if (!(lo > 0.0))
        throw std::domain_error("condition number of a matrix that is not positive definite");
    return std::sqrt(hi / lo);
}

SynthesisResult assemble_result(const VertexSet& V, double lambda, GainMode mode, const Eigen::MatrixXd& P,
                                const std::vector<Eigen::MatrixXd>& K) {
    SynthesisResult r;
    r.mode = mode;
    r.P = 0.5 * (P + P.transpose());
    r.K = K;
    r.lambda = lambda;
    r.bounds = V.bounds;
    r.verification = verify_solution(build_problem(V, lambda, mode), r.P, K);
    const Eigen::LLT<Eigen::MatrixXd> llt(r.P);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("P is not positive definite; gains cannot be recovered");
    for (const auto& k : K)
        r.gains.push_back(llt.solve(k));
    r.kappa = condition_number(r.P);
    return r;
}

SynthesisOutcome synthesize(const VertexSet& V, double lambda, GainMode mode, const FeasibilityOptions& options) {
    SynthesisOutcome out;
    out.feasibility = solve_feasibility(build_problem(V, lambda, mode), options);
    out.status = out.feasibility.status;
    if (out.status == FeasibilityStatus::Feasible)
        out.result = assemble_result(V, lambda, mode, out.feasibility.P, out.feasibility.gains);
    return out;
}

DecayRateResult max_decay_rate(const VertexSet& V, GainMode mode, double tol, const FeasibilityOptions& options) {
    if (!(tol > 0.0))
        throw std::invalid_argument("bisection tolerance must be positive");
    DecayRateResult res;
    FeasibilityOptions probe_opts = options;
    probe_opts.center = false;

    const auto probe = [&](double lambda) {
        const auto f = solve_feasibility(build_problem(V, lambda, mode), probe_opts);
        res.probes.push_back({lambda, f.status, f.worst_eigenvalue});
        if (f.status == FeasibilityStatus::Inconclusive)
            ++res.inconclusive;
        return f.status == FeasibilityStatus::Feasible;
    };

    if (!probe(0.0)) {
        res.zero_infeasible = true;
        return res;
    }
    constexpr double cap = 1024.0;
    double lo = 0.0;
    double hi = 1.0;
    while (probe(hi)) {
        lo = hi;
        if (hi >= cap) {
            res.capped = true;
            break;
        }
        hi *= 2.0;
    }
    if (!res.capped) {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            if (probe(mid))
                lo = mid;
            else
                hi = mid;
        }
    }
    res.lower = lo;
    res.upper = res.capped ? lo : hi;
    res.lambda_max = lo;

    const auto final_design = synthesize(V, lo, mode, options);
    if (final_design.result)
        res.certificate = final_design.result;
    return res;
}

Eigen::MatrixXd scheduled_gain(const SynthesisResult& result, const WeightVector& h) {
    if (result.mode != GainMode::Scheduled)
        throw std::invalid_argument("scheduled_gain needs a scheduled design");
    return result.gain(h.h);
}

}  // namespace phobs
