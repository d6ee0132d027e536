// Copyright 2026 The backflow-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared helpers for the test suites: seeded random states and operators.

#pragma once

#include <random>

#include "backflow/core_types.hpp"

namespace backflow::testutil {

inline MatrixXc random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    MatrixXc m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

inline MatrixXc random_hermitian(int d, std::mt19937_64& rng) {
    const MatrixXc a = random_matrix(d, d, rng);
    return 0.5 * (a + a.adjoint());
}

// Ginibre ensemble: G G^+ / Tr, full rank with probability one.
inline DensityMatrix random_density(int d, std::mt19937_64& rng) {
    const MatrixXc g = random_matrix(d, d, rng);
    return DensityMatrix::normalized(g * g.adjoint());
}

inline MatrixXc random_unitary(int d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<MatrixXc> qr(random_matrix(d, d, rng));
    return qr.householderQ() * MatrixXc::Identity(d, d);
}

}  // namespace backflow::testutil
