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

#include <Eigen/Dense>

namespace phobs {

struct SymmetricEigen {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, same order as values
    int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 times the Frobenius norm of the input. Only the symmetric part of `A` is used.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& A, int max_sweeps = 100);

double jacobi_max_eigenvalue(const Eigen::MatrixXd& A);
double jacobi_min_eigenvalue(const Eigen::MatrixXd& A);

}  // namespace phobs
