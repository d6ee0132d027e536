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

#include <gtest/gtest.h>

#include <cmath>

#include "backflow/core_types.hpp"
#include "test_util.hpp"

using namespace backflow;

TEST(HermitianEig, IdentityHasUnitEigenvalues) {
    const auto e = hermitian_eig(MatrixXc::Identity(2, 2));
    EXPECT_NEAR(e.values(0), 1.0, 1e-15);
    EXPECT_NEAR(e.values(1), 1.0, 1e-15);
}

TEST(HermitianEig, DiagonalSortedDescending) {
    MatrixXc m = MatrixXc::Zero(2, 2);
    m(0, 0) = 0.3;
    m(1, 1) = 0.7;
    const auto e = hermitian_eig(m);
    EXPECT_NEAR(e.values(0), 0.7, 1e-15);
    EXPECT_NEAR(e.values(1), 0.3, 1e-15);
}

TEST(HermitianEig, RandomReconstruction) {
    std::mt19937_64 rng(11);
    for (int d : {2, 3, 5, 8}) {
        const MatrixXc m = testutil::random_hermitian(d, rng);
        const auto e = hermitian_eig(m);
        const MatrixXc back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LE((back - m).norm(), 1e-10 * m.norm());
        EXPECT_LE((e.vectors.adjoint() * e.vectors - MatrixXc::Identity(d, d)).norm(), 1e-10);
        for (int k = 0; k + 1 < d; ++k) EXPECT_GE(e.values(k), e.values(k + 1));
    }
}

TEST(HermitianEig, RejectsNonHermitian) {
    MatrixXc m = MatrixXc::Zero(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(hermitian_eig(m), ContractViolation);
}

TEST(PsdSqrt, Identity) {
    EXPECT_LE((psd_sqrt(MatrixXc::Identity(3, 3)) - MatrixXc::Identity(3, 3)).norm(), 1e-14);
}

TEST(PsdSqrt, Diagonal) {
    MatrixXc m = MatrixXc::Zero(2, 2);
    m(0, 0) = 4.0 / 13.0;
    m(1, 1) = 9.0 / 13.0;
    const MatrixXc r = psd_sqrt(m);
    EXPECT_NEAR(r(0, 0).real(), 2.0 / std::sqrt(13.0), 1e-14);
    EXPECT_NEAR(r(1, 1).real(), 3.0 / std::sqrt(13.0), 1e-14);
    EXPECT_NEAR(std::abs(r(0, 1)), 0.0, 1e-14);
}

TEST(PsdSqrt, SquaresBack) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const MatrixXc m = testutil::random_density(3, rng).matrix();
        const MatrixXc r = psd_sqrt(m);
        EXPECT_LE((r * r - m).norm(), 1e-9);
    }
}

TEST(PsdSqrt, ScalesWithRootOfFactor) {
    std::mt19937_64 rng(6);
    const MatrixXc m = testutil::random_density(3, rng).matrix();
    for (double c : {0.25, 4.0}) EXPECT_LE((psd_sqrt(c * m) - std::sqrt(c) * psd_sqrt(m)).norm(), 1e-10);
}

TEST(PsdSqrt, ClipsNoiseButRejectsNegative) {
    MatrixXc m = MatrixXc::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -5e-11;
    EXPECT_NO_THROW(psd_sqrt(m));
    m(1, 1) = -1e-6;
    EXPECT_THROW(psd_sqrt(m), NotPsdError);
}

TEST(Vectorize, ColumnStacking) {
    Eigen::Matrix2d m;
    m << 1, 2, 3, 4;
    const Eigen::VectorXd v = vectorize(m);
    EXPECT_EQ(v(0), 1);
    EXPECT_EQ(v(1), 3);
    EXPECT_EQ(v(2), 2);
    EXPECT_EQ(v(3), 4);
    EXPECT_EQ(devectorize(v, 2), MatrixXr(m));
}

TEST(Vectorize, ZeroMatrix) { EXPECT_EQ(vectorize(MatrixXc::Zero(3, 3)).norm(), 0.0); }

TEST(Vectorize, DevectorizeRejectsWrongLength) {
    EXPECT_THROW(devectorize(VectorXc::Zero(5), 2), ContractViolation);
}

TEST(Vectorize, KroneckerActionMatchesDirectProduct) {
    std::mt19937_64 rng(7);
    for (int d : {2, 3}) {
        const MatrixXc a = testutil::random_matrix(d, d, rng);
        const MatrixXc b = testutil::random_matrix(d, d, rng);
        const MatrixXc x = testutil::random_matrix(d, d, rng);
        const VectorXc lhs = vectorize(MatrixXc(a * x * b));
        const VectorXc rhs = kron(MatrixXc(b.transpose()), a) * vectorize(x);
        EXPECT_LE((lhs - rhs).norm(), 1e-12);
        EXPECT_LE((left_mult(a) * vectorize(x) - vectorize(MatrixXc(a * x))).norm(), 1e-12);
        EXPECT_LE((right_mult(b) * vectorize(x) - vectorize(MatrixXc(x * b))).norm(), 1e-12);
        EXPECT_EQ(devectorize(vectorize(x), d), x);
    }
}

TEST(DensityMatrix, ValidatesInvariants) {
    MatrixXc m = MatrixXc::Identity(2, 2) * 0.5;
    EXPECT_NO_THROW(DensityMatrix{m});
    m(0, 0) = 0.6;
    EXPECT_THROW(DensityMatrix{m}, ContractViolation);  // trace
    MatrixXc h = MatrixXc::Identity(2, 2) * 0.5;
    h(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{h}, ContractViolation);  // not Hermitian
    MatrixXc neg = MatrixXc::Zero(2, 2);
    neg(0, 0) = 1.2;
    neg(1, 1) = -0.2;
    EXPECT_THROW(DensityMatrix{neg}, ContractViolation);
    EXPECT_THROW(DensityMatrix::maximally_mixed(9), ContractViolation);
}

TEST(DensityMatrix, PureAndMixedFactories) {
    const auto p = DensityMatrix::pure(ops::ket(3, 1));
    EXPECT_NEAR(p(1, 1).real(), 1.0, 1e-15);
    const auto mm = DensityMatrix::maximally_mixed(4);
    EXPECT_NEAR(mm(2, 2).real(), 0.25, 1e-15);
}

TEST(ProbabilityVector, ValidatesInvariants) {
    EXPECT_NO_THROW(ProbabilityVector(Eigen::Vector2d(0.3, 0.7)));
    EXPECT_THROW(ProbabilityVector(Eigen::Vector2d(0.3, 0.6)), ContractViolation);
    EXPECT_THROW(ProbabilityVector(Eigen::Vector2d(-0.1, 1.1)), ContractViolation);
    EXPECT_NEAR(ProbabilityVector::uniform(4)(3), 0.25, 1e-15);
}

TEST(RateMatrix, ColumnSumsEnforcedButNotSigns) {
    MatrixXr w(2, 2);
    w << 1, -1, -1, 1;  // negative rates are allowed
    EXPECT_NO_THROW(RateMatrix{w});
    w(0, 0) = 2;
    EXPECT_THROW(RateMatrix{w}, ContractViolation);
    const auto s = RateMatrix::symmetric(3, 0.5);
    EXPECT_NEAR(s.matrix()(0, 0), -1.0, 1e-15);
}

TEST(SuperoperatorSample, TraceAnnihilation) {
    const MatrixXc g = ops::gksl_superoperator(ops::sigma_x(), {ops::sigma_minus()}, {0.7});
    EXPECT_TRUE(is_trace_annihilating({2, g, 0.0}));
    EXPECT_FALSE(is_trace_annihilating({2, MatrixXc::Identity(4, 4), 0.0}));
    EXPECT_EQ(hilbert_dim_of(9), 3);
    EXPECT_THROW(hilbert_dim_of(5), ContractViolation);
}

TEST(GkslSuperoperator, MatchesDirectAction) {
    std::mt19937_64 rng(3);
    const MatrixXc h = testutil::random_hermitian(3, rng);
    const MatrixXc l = testutil::random_matrix(3, 3, rng);
    const MatrixXc rho = testutil::random_density(3, rng).matrix();
    const MatrixXc g = ops::gksl_superoperator(h, {l}, {0.4});
    const cplx i1(0, 1);
    const MatrixXc direct =
        -i1 * (h * rho - rho * h) + 0.4 * (l * rho * l.adjoint() - 0.5 * (l.adjoint() * l * rho + rho * l.adjoint() * l));
    EXPECT_LE((g * vectorize(rho) - vectorize(direct)).norm(), 1e-12);
}

TEST(TimeGrid, UniformConstruction) {
    const auto g = TimeGrid::uniform(20.0, 1e-3);
    EXPECT_EQ(g.size(), 20001u);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_NEAR(g.t_max(), 20.0, 1e-12);
    EXPECT_TRUE(g.is_uniform());
    EXPECT_EQ(g.nearest(0.0104), 10u);
    EXPECT_EQ(g.coarsened(2).size(), 10001u);
}

TEST(TimeGrid, RejectsBadPoints) {
    EXPECT_THROW(TimeGrid(std::vector<double>{0.1, 0.2}), ContractViolation);
    EXPECT_THROW(TimeGrid(std::vector<double>{0.0, 0.2, 0.2}), ContractViolation);
    EXPECT_THROW(TimeGrid::uniform(1.0, 0.0), ContractViolation);
    const TimeGrid nu(std::vector<double>{0.0, 0.1, 0.3});
    EXPECT_FALSE(nu.is_uniform());
    EXPECT_THROW(nu.dt(), ContractViolation);
}
