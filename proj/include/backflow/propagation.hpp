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

// propagation.hpp: time-local (TCL) and memory-kernel (TC) solvers and
// propagator families Phi(t, 0).
//
// States are handled through their linear representation: vec(rho) in the
// column-stacking convention for quantum states (d^2 entries) and the
// probability vector itself for classical ones. Quantum objects use
// Scalar = cplx, classical ones Scalar = double.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "backflow/core_types.hpp"

namespace backflow {

enum class Kind { quantum, classical };

// Generator G(t) acting on the linear state representation.
template <class Scalar>
struct TclGenerator {
    int dim = 0;  // length of the state vector: d^2 or n
    std::function<Matrix<Scalar>(double)> evaluate;
};

// K(tau) in x'(t) = int_0^t K(t - s) x(s) ds.
template <class Scalar>
struct MemoryKernel {
    int dim = 0;
    std::function<Matrix<Scalar>(double)> evaluate;
    double decay_scale = 1.0;  // hint for the step-size check
};

template <class Scalar>
struct PropagatorFamily {
    TimeGrid grid;
    std::vector<Matrix<Scalar>> maps;  // Phi(t_i, 0)

    std::size_t size() const { return maps.size(); }
};

using QuantumGenerator = TclGenerator<cplx>;
using ClassicalGenerator = TclGenerator<double>;
using QuantumKernel = MemoryKernel<cplx>;
using ClassicalKernel = MemoryKernel<double>;
using QuantumFamily = PropagatorFamily<cplx>;
using ClassicalFamily = PropagatorFamily<double>;

// Exact Markovian embedding of a classical exponential-memory process: the
// observed vector is the first `observed_dim` entries of an augmented state
// evolving under a constant generator; the auxiliary sector starts at zero.
struct MarkovEmbedding {
    int observed_dim = 0;
    MatrixXr generator;
};

// Row functional that every generator must annihilate: Tr for quantum
// (vec(I)), the all-ones row for classical.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> conserved_functional(int dim) {
    if constexpr (std::is_same_v<Scalar, double>) {
        return VectorXr::Ones(dim);
    } else {
        return trace_functional(hilbert_dim_of(dim));
    }
}

template <class Scalar>
double conservation_defect(const Matrix<Scalar>& g) {
    return (conserved_functional<Scalar>(static_cast<int>(g.rows())).transpose() * g).norm();
}

namespace detail {

inline void check_uniform(const TimeGrid& grid, const char* who) {
    if (!grid.is_uniform()) throw ContractViolation(std::string(who) + ": grid must be uniform");
}

// Classical 4th-order Runge-Kutta for X' = A(t) X on the grid points.
template <class Scalar, class OnStep>
void rk4_steps(const std::function<Matrix<Scalar>(double)>& a, Matrix<Scalar> x, const TimeGrid& grid,
               OnStep&& on_step) {
    on_step(std::size_t{0}, x);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t = grid[i];
        const double h = grid[i + 1] - t;
        const Matrix<Scalar> a0 = a(t);
        const Matrix<Scalar> am = a(t + 0.5 * h);
        const Matrix<Scalar> a1 = a(t + h);
        const Matrix<Scalar> k1 = a0 * x;
        const Matrix<Scalar> k2 = am * (x + (0.5 * h) * k1);
        const Matrix<Scalar> k3 = am * (x + (0.5 * h) * k2);
        const Matrix<Scalar> k4 = a1 * (x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw IntegrationDiverged("rk4: non-finite state", grid[i + 1]);
        on_step(i + 1, x);
    }
}

// Product-trapezoidal scheme for X'(t) = int_0^t K(t - s) X(s) ds:
//   F_n     = dt [K_n X_0 / 2 + sum_{j=1}^{n-1} K_{n-j} X_j + K_0 X_n / 2]
//   X_{n+1} = X_n + dt/2 (F_n + F_{n+1})
// which is linear-implicit in X_{n+1} through K_0. Second order; columns of
// X conserve any functional that annihilates every K(tau).
template <class Scalar>
std::vector<Matrix<Scalar>> volterra_trapezoid(const MemoryKernel<Scalar>& kernel, const Matrix<Scalar>& x0,
                                               const TimeGrid& grid) {
    check_uniform(grid, "solve_tc");
    const int dim = kernel.dim;
    if (x0.rows() != dim) throw ContractViolation("solve_tc: initial state dimension mismatch");
    const auto cols = static_cast<int>(x0.cols());
    const std::size_t n_pts = grid.size();
    const double dt = grid.dt();
    const std::size_t dd = static_cast<std::size_t>(dim) * dim;
    const std::size_t dc = static_cast<std::size_t>(dim) * cols;

    std::vector<Scalar> ks(n_pts * dd);
    for (std::size_t j = 0; j < n_pts; ++j) {
        const Matrix<Scalar> k = kernel.evaluate(static_cast<double>(j) * dt);
        if (k.rows() != dim || k.cols() != dim) throw ContractViolation("solve_tc: kernel sample has wrong shape");
        if (!k.allFinite()) throw IntegrationDiverged("solve_tc: kernel sample not finite", static_cast<double>(j) * dt);
        std::copy(k.data(), k.data() + dd, ks.begin() + static_cast<std::ptrdiff_t>(j * dd));
    }
    std::vector<Scalar> xs(n_pts * dc);
    std::copy(x0.data(), x0.data() + dc, xs.begin());

    using MapM = Eigen::Map<const Matrix<Scalar>>;
    const MapM k0(ks.data(), dim, dim);
    const Matrix<Scalar> lhs = Matrix<Scalar>::Identity(dim, dim) - (0.25 * dt * dt) * k0;
    const Eigen::PartialPivLU<Matrix<Scalar>> lu(lhs);

    Matrix<Scalar> f_n = Matrix<Scalar>::Zero(dim, cols);  // F_0 = 0
    Matrix<Scalar> hist(dim, cols);
    for (std::size_t n = 0; n + 1 < n_pts; ++n) {
        // hist = K_{n+1} X_0 / 2 + sum_{j=1}^{n} K_{n+1-j} X_j
        hist.setZero();
        Scalar* acc = hist.data();
        auto accumulate = [&](std::size_t lag, std::size_t j, double w) {
            const Scalar* kk = ks.data() + lag * dd;
            const Scalar* xx = xs.data() + j * dc;
            for (int c = 0; c < cols; ++c)
                for (int m = 0; m < dim; ++m) {
                    const Scalar xm = w * xx[m + dim * c];
                    const Scalar* kcol = kk + static_cast<std::size_t>(dim) * m;
                    Scalar* out = acc + static_cast<std::size_t>(dim) * c;
                    for (int r = 0; r < dim; ++r) out[r] += kcol[r] * xm;
                }
        };
        accumulate(n + 1, 0, 0.5);
        for (std::size_t j = 1; j <= n; ++j) accumulate(n + 1 - j, j, 1.0);

        const Eigen::Map<const Matrix<Scalar>> x_n(xs.data() + n * dc, dim, cols);
        const Matrix<Scalar> rhs = x_n + (0.5 * dt) * f_n + (0.5 * dt * dt) * hist;
        const Matrix<Scalar> x_next = lu.solve(rhs);
        if (!x_next.allFinite()) throw IntegrationDiverged("solve_tc: non-finite state", grid[n + 1]);
        std::copy(x_next.data(), x_next.data() + dc, xs.begin() + static_cast<std::ptrdiff_t>((n + 1) * dc));
        f_n = dt * hist + (0.5 * dt) * (k0 * x_next);
    }

    std::vector<Matrix<Scalar>> out;
    out.reserve(n_pts);
    for (std::size_t i = 0; i < n_pts; ++i) out.emplace_back(Eigen::Map<const Matrix<Scalar>>(xs.data() + i * dc, dim, cols));
    return out;
}

inline DensityMatrix to_density(const VectorXc& v, double t, double drift_tol) {
    const int d = hilbert_dim_of(v.size());
    const MatrixXc m = devectorize(v, d);
    if (std::abs(m.trace() - cplx(1.0)) > drift_tol) throw IntegrationDiverged("trace drifted beyond tolerance", t);
    try {
        return DensityMatrix::normalized(m);
    } catch (const ContractViolation& e) {
        throw IntegrationDiverged(std::string("state validation failed: ") + e.what(), t);
    }
}

inline ProbabilityVector to_probability(const VectorXr& v, double t, double drift_tol) {
    if (std::abs(v.sum() - 1.0) > drift_tol) throw IntegrationDiverged("normalisation drifted beyond tolerance", t);
    try {
        return ProbabilityVector::normalized(v);
    } catch (const ContractViolation& e) {
        throw IntegrationDiverged(std::string("state validation failed: ") + e.what(), t);
    }
}

template <class Scalar>
void check_generator_sample(const Matrix<Scalar>& g, int dim, double t) {
    if (g.rows() != dim || g.cols() != dim) throw ContractViolation("generator sample has wrong shape");
    if (!g.allFinite()) throw IntegrationDiverged("generator sample not finite", t);
    const double tol = default_tolerances().trace_annihilation * std::max(1.0, g.norm());
    if (conservation_defect<Scalar>(g) > tol)
        throw ContractViolation("generator sample at t = " + std::to_string(t) + " does not conserve trace/normalisation");
}

}  // namespace detail

inline constexpr double tcl_drift_tolerance = 1e-8;
inline constexpr double tc_drift_tolerance = 1e-6;

// ------------------------------ TCL -----------------------------------------

inline QuantumTrajectory solve_tcl(const QuantumGenerator& gen, const DensityMatrix& initial, const TimeGrid& grid) {
    detail::check_uniform(grid, "solve_tcl");
    if (initial.dim() * initial.dim() != gen.dim) throw ContractViolation("solve_tcl: initial state dimension mismatch");
    auto checked = [&gen](double t) {
        MatrixXc g = gen.evaluate(t);
        detail::check_generator_sample<cplx>(g, gen.dim, t);
        return g;
    };
    QuantumTrajectory traj{grid, {}, {}};
    traj.states.reserve(grid.size());
    detail::rk4_steps<cplx>(checked, MatrixXc(vectorize(initial.matrix())), grid, [&](std::size_t i, const MatrixXc& x) {
        traj.states.push_back(detail::to_density(x.col(0), grid[i], tcl_drift_tolerance));
    });
    return traj;
}

inline ClassicalTrajectory solve_tcl(const ClassicalGenerator& gen, const ProbabilityVector& initial,
                                     const TimeGrid& grid) {
    detail::check_uniform(grid, "solve_tcl");
    if (initial.dim() != gen.dim) throw ContractViolation("solve_tcl: initial state dimension mismatch");
    auto checked = [&gen](double t) {
        MatrixXr g = gen.evaluate(t);
        detail::check_generator_sample<double>(g, gen.dim, t);
        return g;
    };
    ClassicalTrajectory traj{grid, {}, {}};
    traj.states.reserve(grid.size());
    detail::rk4_steps<double>(checked, MatrixXr(initial.vector()), grid, [&](std::size_t i, const MatrixXr& x) {
        traj.states.push_back(detail::to_probability(x.col(0), grid[i], tcl_drift_tolerance));
    });
    return traj;
}

// ------------------------------ TC ------------------------------------------

namespace detail {
inline std::vector<std::string> tc_warnings(double decay_scale, const TimeGrid& grid) {
    std::vector<std::string> w;
    if (grid.dt() > decay_scale / 20.0)
        w.push_back("solve_tc: dt = " + std::to_string(grid.dt()) + " exceeds decay_scale/20 = " +
                    std::to_string(decay_scale / 20.0));
    return w;
}
}  // namespace detail

inline QuantumTrajectory solve_tc(const QuantumKernel& kernel, const DensityMatrix& initial, const TimeGrid& grid) {
    if (initial.dim() * initial.dim() != kernel.dim) throw ContractViolation("solve_tc: initial state dimension mismatch");
    detail::check_uniform(grid, "solve_tc");
    const auto xs = detail::volterra_trapezoid<cplx>(kernel, MatrixXc(vectorize(initial.matrix())), grid);
    QuantumTrajectory traj{grid, {}, detail::tc_warnings(kernel.decay_scale, grid)};
    traj.states.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) traj.states.push_back(detail::to_density(xs[i].col(0), grid[i], tc_drift_tolerance));
    return traj;
}

inline ClassicalTrajectory solve_tc(const ClassicalKernel& kernel, const ProbabilityVector& initial,
                                    const TimeGrid& grid) {
    if (initial.dim() != kernel.dim) throw ContractViolation("solve_tc: initial state dimension mismatch");
    detail::check_uniform(grid, "solve_tc");
    const auto xs = detail::volterra_trapezoid<double>(kernel, MatrixXr(initial.vector()), grid);
    ClassicalTrajectory traj{grid, {}, detail::tc_warnings(kernel.decay_scale, grid)};
    traj.states.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) traj.states.push_back(detail::to_probability(xs[i].col(0), grid[i], tc_drift_tolerance));
    return traj;
}

// ------------------------------ propagators ---------------------------------

namespace detail {
template <class Scalar>
void check_family(const PropagatorFamily<Scalar>& fam, double tol) {
    const int dim = static_cast<int>(fam.maps.front().rows());
    const auto r = conserved_functional<Scalar>(dim);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        if ((r.transpose() * fam.maps[i] - r.transpose()).norm() > tol)
            throw IntegrationDiverged("propagator is not trace preserving", fam.grid[i]);
    }
}
}  // namespace detail

// Columns of Phi(t, 0) are the propagated basis vectors (vectorised |i><j|
// for quantum, canonical basis vectors for classical).
template <class Scalar>
PropagatorFamily<Scalar> build_propagator(const TclGenerator<Scalar>& gen, const TimeGrid& grid) {
    detail::check_uniform(grid, "build_propagator");
    auto checked = [&gen](double t) {
        Matrix<Scalar> g = gen.evaluate(t);
        detail::check_generator_sample<Scalar>(g, gen.dim, t);
        return g;
    };
    PropagatorFamily<Scalar> fam{grid, {}};
    fam.maps.reserve(grid.size());
    detail::rk4_steps<Scalar>(checked, Matrix<Scalar>::Identity(gen.dim, gen.dim), grid,
                              [&](std::size_t, const Matrix<Scalar>& x) { fam.maps.push_back(x); });
    detail::check_family(fam, tcl_drift_tolerance);
    return fam;
}

template <class Scalar>
PropagatorFamily<Scalar> build_propagator(const MemoryKernel<Scalar>& kernel, const TimeGrid& grid) {
    PropagatorFamily<Scalar> fam{grid,
                                 detail::volterra_trapezoid<Scalar>(kernel, Matrix<Scalar>::Identity(kernel.dim, kernel.dim), grid)};
    detail::check_family(fam, tc_drift_tolerance);
    return fam;
}

inline ClassicalFamily build_propagator(const MarkovEmbedding& emb, const TimeGrid& grid) {
    detail::check_uniform(grid, "build_propagator");
    const int n = emb.observed_dim;
    const auto full = static_cast<int>(emb.generator.rows());
    if (n <= 0 || n > full || emb.generator.cols() != full) throw ContractViolation("MarkovEmbedding: bad dimensions");
    MatrixXr x0 = MatrixXr::Zero(full, n);
    x0.topRows(n).setIdentity();
    const MatrixXr a = emb.generator;
    ClassicalFamily fam{grid, {}};
    fam.maps.reserve(grid.size());
    detail::rk4_steps<double>([&a](double) { return a; }, x0, grid,
                              [&](std::size_t, const MatrixXr& x) { fam.maps.push_back(x.topRows(n)); });
    detail::check_family(fam, tcl_drift_tolerance);
    return fam;
}

// Family sampled from a closed-form propagator.
template <class Scalar>
PropagatorFamily<Scalar> sample_propagator(const std::function<Matrix<Scalar>(double)>& phi, const TimeGrid& grid) {
    PropagatorFamily<Scalar> fam{grid, {}};
    fam.maps.reserve(grid.size());
    for (double t : grid.points()) fam.maps.push_back(phi(t));
    detail::check_family(fam, tcl_drift_tolerance);
    return fam;
}

inline QuantumTrajectory apply_family(const QuantumFamily& fam, const DensityMatrix& initial) {
    const VectorXc v0 = vectorize(initial.matrix());
    if (fam.maps.front().cols() != v0.size()) throw ContractViolation("apply_family: dimension mismatch");
    QuantumTrajectory traj{fam.grid, {}, {}};
    traj.states.reserve(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i)
        traj.states.push_back(detail::to_density(fam.maps[i] * v0, fam.grid[i], tcl_drift_tolerance));
    return traj;
}

inline ClassicalTrajectory apply_family(const ClassicalFamily& fam, const ProbabilityVector& initial) {
    if (fam.maps.front().cols() != initial.dim()) throw ContractViolation("apply_family: dimension mismatch");
    ClassicalTrajectory traj{fam.grid, {}, {}};
    traj.states.reserve(fam.size());
    for (std::size_t i = 0; i < fam.size(); ++i)
        traj.states.push_back(detail::to_probability(fam.maps[i] * initial.vector(), fam.grid[i], tc_drift_tolerance));
    return traj;
}

}  // namespace backflow
