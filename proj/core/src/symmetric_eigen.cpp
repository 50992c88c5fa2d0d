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

#include "phobs/symmetric_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace phobs {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& A) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            if (i != j)
                s += A(i, j) * A(i, j);
    return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& A_in, int max_sweeps) {
    if (A_in.rows() != A_in.cols())
        throw std::invalid_argument("jacobi_eigen: matrix must be square");
    if (!A_in.allFinite())
        throw std::invalid_argument("jacobi_eigen: matrix has non-finite entries");

    const Eigen::Index n = A_in.rows();
    Eigen::MatrixXd A = 0.5 * (A_in + A_in.transpose());
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    const double target = 1e-12 * A.norm();

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        const double off = off_diagonal_norm(A);
        if (off <= target || off == 0.0)
            break;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0)
                    continue;
                // Rotation angle that annihilates A(p, q).
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p);
                    const double vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
    }
    out.sweeps = sweep;
    return out;
}

double jacobi_max_eigenvalue(const Eigen::MatrixXd& A) { return jacobi_eigen(A).values.maxCoeff(); }

double jacobi_min_eigenvalue(const Eigen::MatrixXd& A) { return jacobi_eigen(A).values.minCoeff(); }

}  // namespace phobs
