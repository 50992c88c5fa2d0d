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

#include "phobs/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace phobs {

namespace {

struct Interval {
    double lo;
    double hi;
};

Interval product(Interval a, Interval b) {
    const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

// Every corner of the q-box; 2^n points.
std::vector<Eigen::VectorXd> box_corners(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const auto n = static_cast<std::size_t>(lo.size());
    std::vector<Eigen::VectorXd> out;
    out.reserve(std::size_t{1} << n);
    for (std::size_t c = 0; c < (std::size_t{1} << n); ++c) {
        Eigen::VectorXd q = lo;
        for (std::size_t s = 0; s < n; ++s)
            if (corner_is_high(c, s))
                q(static_cast<Eigen::Index>(s)) = hi(static_cast<Eigen::Index>(s));
        out.push_back(std::move(q));
    }
    return out;
}

std::string param_name(ParamKind kind, const PHSystem& sys, Eigen::Index j, Eigen::Index r, Eigen::Index c) {
    const bool scalar = sys.n() == 1 && sys.m() == 1;
    std::ostringstream os;
    switch (kind) {
        case ParamKind::InputJacobian:
            os << "a";
            if (!scalar)
                os << "[" << j << "](" << r << "," << c << ")";
            break;
        case ParamKind::Input:
            os << "u";
            if (!scalar)
                os << "[" << j << "]";
            break;
        case ParamKind::Beta:
            os << "beta";
            if (!scalar)
                os << "(" << r << "," << c << ")";
            break;
        case ParamKind::InputMap:
            os << "g";
            if (!scalar)
                os << "(" << r << "," << c << ")";
            break;
    }
    return os.str();
}

}  // namespace

void OperatingDomain::validate() const {
    const auto n = q_min.size();
    if (n == 0 || q_max.size() != n || p_min.size() != n || p_max.size() != n)
        throw std::invalid_argument("operating domain: q and p bounds must share a positive dimension");
    if (u_min.size() == 0 || u_max.size() != u_min.size())
        throw std::invalid_argument("operating domain: u bounds must share a positive dimension");
    const auto ordered = [](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        return lo.allFinite() && hi.allFinite() && (hi - lo).minCoeff() >= 0.0;
    };
    if (!ordered(q_min, q_max) || !ordered(p_min, p_max) || !ordered(u_min, u_max))
        throw std::invalid_argument("operating domain: bounds must be finite with min <= max");
}

bool OperatingDomain::contains(const StateVec& x, double rel_tol) const {
    const auto inside = [rel_tol](const Eigen::VectorXd& v, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double slack = rel_tol * (hi(i) - lo(i));
            if (v(i) < lo(i) - slack || v(i) > hi(i) + slack)
                return false;
        }
        return true;
    };
    return inside(x.q, q_min, q_max) && inside(x.p, p_min, p_max);
}

const SchedulingParameter& ParameterBounds::find(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name)
            return p;
    throw std::out_of_range("no scheduling parameter named '" + name + "'");
}

std::vector<bool> VertexSet::corner(std::size_t i) const {
    std::vector<bool> bits(bounds.count());
    for (std::size_t j = 0; j < bits.size(); ++j)
        bits[j] = corner_is_high(i, j);
    return bits;
}

ParameterBounds compute_parameter_bounds(const PHSystem& sys, const OperatingDomain& dom) {
    dom.validate();
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    if (dom.q_min.size() != n || dom.u_min.size() != m)
        throw std::invalid_argument("operating domain dimensions do not match the system");
    if (sys.input_map().check_box)
        sys.input_map().check_box(dom.q_min, dom.q_max);

    const auto corners = box_corners(dom.q_min, dom.q_max);

    // Entry-wise extremes of a^(j)(q) and g2(q) over the q-box corners.
    std::vector<Eigen::MatrixXd> a_lo(static_cast<std::size_t>(m), Eigen::MatrixXd::Constant(n, n, INFINITY));
    std::vector<Eigen::MatrixXd> a_hi(static_cast<std::size_t>(m), Eigen::MatrixXd::Constant(n, n, -INFINITY));
    Eigen::MatrixXd g_lo = Eigen::MatrixXd::Constant(n, m, INFINITY);
    Eigen::MatrixXd g_hi = Eigen::MatrixXd::Constant(n, m, -INFINITY);
    for (const auto& q : corners) {
        const auto a = a_eval(sys, q);
        for (std::size_t j = 0; j < a.size(); ++j) {
            a_lo[j] = a_lo[j].cwiseMin(a[j]);
            a_hi[j] = a_hi[j].cwiseMax(a[j]);
        }
        const auto g = g2_eval(sys, q);
        g_lo = g_lo.cwiseMin(g);
        g_hi = g_hi.cwiseMax(g);
    }

    // Interval of v = M^{-1} p over the p-box.
    std::vector<Interval> v(static_cast<std::size_t>(n), Interval{0.0, 0.0});
    for (Eigen::Index s = 0; s < n; ++s)
        for (Eigen::Index r = 0; r < n; ++r) {
            const Interval term = product({sys.M_inv()(s, r), sys.M_inv()(s, r)}, {dom.p_min(r), dom.p_max(r)});
            v[static_cast<std::size_t>(s)].lo += term.lo;
            v[static_cast<std::size_t>(s)].hi += term.hi;
        }

    ParameterBounds out;
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c)
                out.params.push_back({param_name(ParamKind::InputJacobian, sys, j, r, c), ParamKind::InputJacobian, j, r,
                                      c, a_lo[static_cast<std::size_t>(j)](r, c), a_hi[static_cast<std::size_t>(j)](r, c)});
    for (Eigen::Index j = 0; j < m; ++j)
        out.params.push_back({param_name(ParamKind::Input, sys, j, 0, 0), ParamKind::Input, j, 0, 0,
                              std::min(0.0, dom.u_min(j)), dom.u_max(j)});
    // beta(j, c) = sum_s a^(j)(s, c) v_s, bounded by interval arithmetic (corner products per term).
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index c = 0; c < n; ++c) {
            Interval acc{0.0, 0.0};
            for (Eigen::Index s = 0; s < n; ++s) {
                const Interval t = product({a_lo[static_cast<std::size_t>(j)](s, c), a_hi[static_cast<std::size_t>(j)](s, c)},
                                           v[static_cast<std::size_t>(s)]);
                acc.lo += t.lo;
                acc.hi += t.hi;
            }
            out.params.push_back({param_name(ParamKind::Beta, sys, j, j, c), ParamKind::Beta, j, j, c, acc.lo, acc.hi});
        }
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index j = 0; j < m; ++j)
            out.params.push_back({param_name(ParamKind::InputMap, sys, j, r, j), ParamKind::InputMap, j, r, j, g_lo(r, j),
                                  g_hi(r, j)});
    return out;
}

VertexSet enumerate_vertices(const PHSystem& sys, const ParameterBounds& bounds) {
    const Eigen::Index n = sys.n();
    const Eigen::Index m = sys.m();
    for (const auto& p : bounds.params)
        if (!std::isfinite(p.min) || !std::isfinite(p.max) || p.min > p.max)
            throw std::invalid_argument("parameter '" + p.name + "' has invalid bounds");
    if (bounds.count() > 20)
        throw std::invalid_argument("too many scheduling parameters for vertex enumeration");

    const Eigen::MatrixXd A0 = drift_matrix(sys);
    VertexSet V;
    V.bounds = bounds;
    const std::size_t nv = bounds.vertex_count();
    V.A_bar.reserve(nv);
    V.C_bar.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::vector<Eigen::MatrixXd> a(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(n, n));
        Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(m, n);
        Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(n, m);
        for (std::size_t k = 0; k < bounds.count(); ++k) {
            const auto& p = bounds.params[k];
            const double value = corner_is_high(i, k) ? p.max : p.min;
            switch (p.kind) {
                case ParamKind::InputJacobian: a[static_cast<std::size_t>(p.j)](p.row, p.col) = value; break;
                case ParamKind::Input: u(p.j) = value; break;
                case ParamKind::Beta: beta(p.row, p.col) = value; break;
                case ParamKind::InputMap: g2(p.row, p.col) = value; break;
            }
        }
        Eigen::MatrixXd A = A0;
        for (Eigen::Index j = 0; j < m; ++j)
            A.bottomLeftCorner(n, n) += a[static_cast<std::size_t>(j)] * u(j);
        Eigen::MatrixXd C(m, 2 * n);
        C << beta, g2.transpose() * sys.M_inv();
        V.A_bar.push_back(std::move(A));
        V.C_bar.push_back(std::move(C));
    }
    return V;
}

std::vector<double> scheduling_values(const PHSystem& sys, const ParameterBounds& bounds, const StateVec& xhat,
                                      const Eigen::VectorXd& u) {
    const auto a = a_eval(sys, xhat.q);
    const Eigen::MatrixXd beta = beta_eval(sys, xhat.q, xhat.p);
    const Eigen::MatrixXd g2 = g2_eval(sys, xhat.q);
    std::vector<double> theta;
    theta.reserve(bounds.count());
    for (const auto& p : bounds.params) {
        switch (p.kind) {
            case ParamKind::InputJacobian: theta.push_back(a[static_cast<std::size_t>(p.j)](p.row, p.col)); break;
            case ParamKind::Input: theta.push_back(u(p.j)); break;
            case ParamKind::Beta: theta.push_back(beta(p.row, p.col)); break;
            case ParamKind::InputMap: theta.push_back(g2(p.row, p.col)); break;
        }
    }
    return theta;
}

WeightVector weights_from_values(const ParameterBounds& bounds, const std::vector<double>& theta) {
    WeightVector w;
    w.h.resize(static_cast<Eigen::Index>(bounds.vertex_count()));
    w.h(0) = 1.0;
    Eigen::Index filled = 1;
    for (std::size_t k = 0; k < bounds.count(); ++k) {
        const auto& p = bounds.params[k];
        double mu = 0.0;
        if (!p.degenerate()) {
            mu = (theta[k] - p.min) / (p.max - p.min);
            if (mu < 0.0 || mu > 1.0) {
                w.clamped = true;
                mu = std::clamp(mu, 0.0, 1.0);
            }
        }
        // Bit k of the vertex index selects the high weight of parameter k.
        for (Eigen::Index i = 0; i < filled; ++i) {
            w.h(i + filled) = w.h(i) * mu;
            w.h(i) *= 1.0 - mu;
        }
        filled *= 2;
    }
    return w;
}

WeightVector weights(const PHSystem& sys, const ParameterBounds& bounds, const StateVec& xhat, const Eigen::VectorXd& u) {
    return weights_from_values(bounds, scheduling_values(sys, bounds, xhat, u));
}

Eigen::MatrixXd jacobian_gamma(const PHSystem& sys, const StateVec& xbar, const Eigen::VectorXd& u,
                               const Eigen::MatrixXd& L) {
    const Eigen::Index n = sys.n();
    const auto a = a_eval(sys, xbar.q);
    Eigen::MatrixXd Jg = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < sys.m(); ++j)
        Jg.bottomLeftCorner(n, n) += a[static_cast<std::size_t>(j)] * u(j);
    Eigen::MatrixXd C(sys.m(), 2 * n);
    C << beta_eval(sys, xbar.q, xbar.p), gamma_cap_eval(sys, xbar.q);
    return Jg - L * C;
}

Eigen::MatrixXd reconstruct(const WeightVector& h, const VertexSet& V, const Eigen::MatrixXd& L) {
    if (static_cast<std::size_t>(h.h.size()) != V.size())
        throw std::invalid_argument("weight vector length does not match the vertex count");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(V.state_dim(), V.state_dim());
    for (std::size_t i = 0; i < V.size(); ++i)
        out += h.h(static_cast<Eigen::Index>(i)) * (V.A_bar[i] - L * V.C_bar[i]);
    return out;
}

GaussLegendre gauss_legendre(int order) {
    if (order < 1)
        throw std::invalid_argument("Gauss-Legendre order must be positive");
    GaussLegendre gl;
    gl.nodes.resize(static_cast<std::size_t>(order));
    gl.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        gl.nodes[static_cast<std::size_t>(i)] = x;
        gl.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return gl;
}

namespace {

constexpr int kQuadratureOrder = 20;

Eigen::VectorXd integrate_segment(const std::function<Eigen::VectorXd(double)>& f, const GaussLegendre& gl, double a,
                                  double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    Eigen::VectorXd acc;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        Eigen::VectorXd v = gl.weights[i] * f(mid + half * gl.nodes[i]);
        if (acc.size() == 0)
            acc = std::move(v);
        else
            acc += v;
    }
    return half * acc;
}

Eigen::VectorXd adaptive(const std::function<Eigen::VectorXd(double)>& f, const GaussLegendre& gl, double a, double b,
                         const Eigen::VectorXd& whole, int depth) {
    const double mid = 0.5 * (a + b);
    Eigen::VectorXd left = integrate_segment(f, gl, a, mid);
    Eigen::VectorXd right = integrate_segment(f, gl, mid, b);
    Eigen::VectorXd split = left + right;
    const double scale = std::max(split.norm(), 1e-300);
    if (depth >= 6 || (split - whole).norm() <= 1e-13 * scale)
        return split;
    return adaptive(f, gl, a, mid, left, depth + 1) + adaptive(f, gl, mid, b, right, depth + 1);
}

}  // namespace

double mean_value_check(const PHSystem& sys, const StateVec& x, const StateVec& xhat, const Eigen::VectorXd& u,
                        const Eigen::MatrixXd& L, const JacobianFn& jacobian) {
    static const GaussLegendre gl = gauss_legendre(kQuadratureOrder);
    const StateVec err = x - xhat;
    const Eigen::VectorXd e = err.stacked();
    const auto jac = [&](const StateVec& xbar) {
        return jacobian ? jacobian(xbar) : jacobian_gamma(sys, xbar, u, L);
    };
    const std::function<Eigen::VectorXd(double)> integrand = [&](double s) -> Eigen::VectorXd {
        return jac(xhat + s * err) * e;
    };
    const Eigen::VectorXd whole = integrate_segment(integrand, gl, 0.0, 1.0);
    const Eigen::VectorXd integral = adaptive(integrand, gl, 0.0, 1.0, whole, 0);
    const Eigen::VectorXd lhs = gamma_eval(sys, x, u, L) - gamma_eval(sys, xhat, u, L);
    return (lhs - integral).norm();
}

}  // namespace phobs
