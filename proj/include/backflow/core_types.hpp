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

// core_types.hpp: states, operators, grids, trajectories and the small dense
// linear algebra they need.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace backflow {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using MatrixXr = Eigen::MatrixXd;
using VectorXr = Eigen::VectorXd;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ------------------------------- errors -------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition or invariant broken by the caller.
struct ContractViolation : Error {
    using Error::Error;
};

// Numerical failure: divergence, singular propagator, non-PSD spectrum.
struct NumericalError : Error {
    using Error::Error;
};

struct NotPsdError : NumericalError {
    using NumericalError::NumericalError;
};

struct IntegrationDiverged : NumericalError {
    IntegrationDiverged(const std::string& what, double t)
        : NumericalError(what + " (t = " + std::to_string(t) + ")"), time(t) {}
    double time;
};

struct GeneratorSingularity : NumericalError {
    GeneratorSingularity(const std::string& what, double t)
        : NumericalError(what + " (t = " + std::to_string(t) + ")"), time(t) {}
    double time;
};

// ------------------------------ tolerances ----------------------------------

struct Tolerances {
    double hermitian = 1e-12;
    double trace = 1e-12;
    double psd = 1e-10;          // eigenvalues in [-psd, 0) are float noise
    double psd_hard = 1e-8;      // below -psd_hard psd_sqrt refuses
    double probability = 1e-12;  // entries >= -probability, sum within it
    double column_sum = 1e-10;   // rate matrices
    double trace_annihilation = 1e-10;
    double eig_hermitian = 1e-10;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// Dense storage only.
inline constexpr int max_hilbert_dim = 8;
inline constexpr int max_classical_dim = 16;

// ------------------------------ linear algebra ------------------------------

struct HermitianEig {
    VectorXr values;    // descending
    MatrixXc vectors;   // columns, unitary
};

inline double hermiticity_defect(const MatrixXc& m) {
    return (m - m.adjoint()).norm();
}

inline HermitianEig hermitian_eig(const MatrixXc& m, double tol = default_tolerances().eig_hermitian) {
    if (m.rows() != m.cols()) throw ContractViolation("hermitian_eig: matrix is not square");
    const double scale = std::max(1.0, m.norm());
    if (hermiticity_defect(m) > tol * scale) throw ContractViolation("hermitian_eig: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver failed");
    // Eigen sorts ascending.
    const Eigen::Index n = m.rows();
    HermitianEig out{VectorXr(n), MatrixXc(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = es.eigenvalues()(n - 1 - k);
        out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
    }
    return out;
}

inline MatrixXc psd_sqrt(const MatrixXc& m, const Tolerances& tol = default_tolerances()) {
    auto eig = hermitian_eig(m, tol.eig_hermitian);
    VectorXr root(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double v = eig.values(k);
        if (v < -tol.psd_hard) throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(v) + " below -psd_hard");
        root(k) = std::sqrt(std::max(v, 0.0));
    }
    MatrixXc r = eig.vectors * root.cast<cplx>().asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (r + r.adjoint());
}

// Column stacking: vec(m)(i + rows*j) = m(i, j). With this convention
// vec(A X B) = (B^T kron A) vec(X).
template <class Derived>
auto vectorize(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(m.size());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) v(i + m.rows() * j) = m(i, j);
    return v;
}

template <class Derived>
auto devectorize(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows) {
    using Scalar = typename Derived::Scalar;
    if (rows <= 0 || v.cols() != 1 || v.size() != rows * rows)
        throw ContractViolation("devectorize: length is not rows^2");
    Matrix<Scalar> m(rows, rows);
    for (Eigen::Index j = 0; j < rows; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = v(i + rows * j);
    return m;
}

template <class A, class B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    using Scalar = typename A::Scalar;
    Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Superoperators of X -> A X and X -> X B.
inline MatrixXc left_mult(const MatrixXc& a) {
    return kron(MatrixXc::Identity(a.rows(), a.rows()), a);
}
inline MatrixXc right_mult(const MatrixXc& b) {
    return kron(MatrixXc(b.transpose()), MatrixXc::Identity(b.rows(), b.rows()));
}

// Row vector r with r * vec(X) = Tr X.
inline VectorXc trace_functional(int d) {
    return vectorize(MatrixXc::Identity(d, d));
}

// ------------------------------ state types ---------------------------------

class DensityMatrix {
public:
    explicit DensityMatrix(MatrixXc entries, const Tolerances& tol = default_tolerances())
        : rho_(std::move(entries)) {
        validate(tol);
    }

    // Re-Hermitise and rescale to unit trace before validating; used for
    // integrator output whose drift has already been bounded.
    static DensityMatrix normalized(const MatrixXc& m, const Tolerances& tol = default_tolerances()) {
        MatrixXc h = 0.5 * (m + m.adjoint());
        const double tr = h.trace().real();
        if (!(std::abs(tr) > 0.0)) throw ContractViolation("DensityMatrix: zero trace");
        return DensityMatrix(h / tr, tol);
    }

    static DensityMatrix pure(const VectorXc& psi) {
        const double n = psi.norm();
        if (!(n > 0.0)) throw ContractViolation("DensityMatrix::pure: zero vector");
        VectorXc u = psi / n;
        return normalized(u * u.adjoint());
    }

    static DensityMatrix maximally_mixed(int d) {
        return DensityMatrix(MatrixXc::Identity(d, d) / static_cast<double>(d));
    }

    int dim() const { return static_cast<int>(rho_.rows()); }
    const MatrixXc& matrix() const { return rho_; }
    cplx operator()(int i, int j) const { return rho_(i, j); }

private:
    void validate(const Tolerances& tol) const {
        if (rho_.rows() != rho_.cols() || rho_.rows() < 1) throw ContractViolation("DensityMatrix: not square");
        if (rho_.rows() > max_hilbert_dim) throw ContractViolation("DensityMatrix: dimension above 8");
        if (!rho_.allFinite()) throw ContractViolation("DensityMatrix: non-finite entries");
        if (hermiticity_defect(rho_) > tol.hermitian) throw ContractViolation("DensityMatrix: not Hermitian");
        if (std::abs(rho_.trace() - cplx(1.0)) > tol.trace) throw ContractViolation("DensityMatrix: trace != 1");
        Eigen::SelfAdjointEigenSolver<MatrixXc> es(rho_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol.psd)
            throw ContractViolation("DensityMatrix: negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
    }

    MatrixXc rho_;
};

class ProbabilityVector {
public:
    explicit ProbabilityVector(VectorXr p, const Tolerances& tol = default_tolerances()) : p_(std::move(p)) {
        if (p_.size() < 1 || p_.size() > max_classical_dim) throw ContractViolation("ProbabilityVector: dimension out of range");
        if (!p_.allFinite()) throw ContractViolation("ProbabilityVector: non-finite entries");
        if (p_.minCoeff() < -tol.probability) throw ContractViolation("ProbabilityVector: negative entry");
        if (std::abs(p_.sum() - 1.0) > tol.probability) throw ContractViolation("ProbabilityVector: does not sum to 1");
    }

    static ProbabilityVector normalized(const VectorXr& p, const Tolerances& tol = default_tolerances()) {
        const double s = p.sum();
        if (!(std::abs(s) > 0.0)) throw ContractViolation("ProbabilityVector: zero sum");
        return ProbabilityVector(p / s, tol);
    }

    static ProbabilityVector uniform(int n) { return ProbabilityVector(VectorXr::Constant(n, 1.0 / n)); }
    static ProbabilityVector basis(int n, int k) {
        VectorXr p = VectorXr::Zero(n);
        p(k) = 1.0;
        return ProbabilityVector(p);
    }

    int dim() const { return static_cast<int>(p_.size()); }
    const VectorXr& vector() const { return p_; }
    double operator()(int i) const { return p_(i); }

private:
    VectorXr p_;
};

// Classical generator W: W(i,j) is the rate j -> i, columns sum to zero.
// The sign of the off-diagonals is not checked; that is what the
// divisibility test is for.
class RateMatrix {
public:
    explicit RateMatrix(MatrixXr w, double column_tol = default_tolerances().column_sum) : w_(std::move(w)) {
        if (w_.rows() != w_.cols() || w_.rows() < 1 || w_.rows() > max_classical_dim)
            throw ContractViolation("RateMatrix: bad shape");
        if (!w_.allFinite()) throw ContractViolation("RateMatrix: non-finite entries");
        const double scale = std::max(1.0, w_.cwiseAbs().maxCoeff());
        if (w_.colwise().sum().cwiseAbs().maxCoeff() > column_tol * scale)
            throw ContractViolation("RateMatrix: column sums are not zero");
    }

    // Symmetric generator with every off-diagonal rate equal to `rate`.
    static RateMatrix symmetric(int n, double rate) {
        MatrixXr w = MatrixXr::Constant(n, n, rate);
        w.diagonal().setConstant(-(n - 1) * rate);
        return RateMatrix(w);
    }

    int dim() const { return static_cast<int>(w_.rows()); }
    const MatrixXr& matrix() const { return w_; }

private:
    MatrixXr w_;
};

struct SuperoperatorSample {
    int dim = 0;        // Hilbert dimension d; entries are d^2 x d^2
    MatrixXc entries;
    double time = 0.0;
};

inline double trace_annihilation_defect(const MatrixXc& g, int d) {
    return (trace_functional(d).transpose() * g).norm();
}

inline bool is_trace_annihilating(const SuperoperatorSample& s, double tol = default_tolerances().trace_annihilation) {
    return trace_annihilation_defect(s.entries, s.dim) <= tol * std::max(1.0, s.entries.norm());
}

inline int hilbert_dim_of(Eigen::Index superop_rows) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(superop_rows))));
    if (static_cast<Eigen::Index>(d) * d != superop_rows) throw ContractViolation("superoperator size is not a square");
    return d;
}

// ------------------------------ time grids ----------------------------------

class TimeGrid {
public:
    // Uniform grid 0, dt, ..., t_max; t_max is rounded to a whole number of steps.
    static TimeGrid uniform(double t_max, double dt) {
        if (!(t_max > 0.0) || !(dt > 0.0) || dt > t_max) throw ContractViolation("TimeGrid: need 0 < dt <= t_max");
        const long long n = std::llround(t_max / dt);
        std::vector<double> pts(static_cast<std::size_t>(n) + 1);
        for (long long i = 0; i <= n; ++i) pts[static_cast<std::size_t>(i)] = static_cast<double>(i) * dt;
        TimeGrid g(std::move(pts));
        g.dt_ = dt;
        return g;
    }

    explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2) throw ContractViolation("TimeGrid: need at least two points");
        if (points_.front() != 0.0) throw ContractViolation("TimeGrid: first point must be 0");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i] > points_[i - 1])) throw ContractViolation("TimeGrid: points not strictly increasing");
        const double h = points_[1] - points_[0];
        bool uni = true;
        for (std::size_t i = 1; i < points_.size() && uni; ++i)
            uni = std::abs((points_[i] - points_[i - 1]) - h) <= 1e-9 * std::max(1.0, h);
        if (uni) dt_ = h;
    }

    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double t_max() const { return points_.back(); }
    const std::vector<double>& points() const { return points_; }
    bool is_uniform() const { return dt_.has_value(); }
    double dt() const {
        if (!dt_) throw ContractViolation("TimeGrid: grid is not uniform");
        return *dt_;
    }

    // Index of the grid point closest to t.
    std::size_t nearest(double t) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), t);
        if (it == points_.end()) return points_.size() - 1;
        std::size_t i = static_cast<std::size_t>(it - points_.begin());
        if (i > 0 && std::abs(points_[i - 1] - t) <= std::abs(points_[i] - t)) --i;
        return i;
    }

    // Every `stride`-th point; used for refinement error estimates.
    TimeGrid coarsened(std::size_t stride) const {
        std::vector<double> pts;
        for (std::size_t i = 0; i < points_.size(); i += stride) pts.push_back(points_[i]);
        return TimeGrid(std::move(pts));
    }

private:
    std::vector<double> points_;
    std::optional<double> dt_;
};

struct Interval {
    double start = 0.0;
    double end = 0.0;
    bool contains(double t) const { return t >= start && t <= end; }
};

template <class State>
struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
    std::vector<std::string> warnings;

    std::size_t size() const { return states.size(); }
    const State& operator[](std::size_t i) const { return states[i]; }
};

using QuantumTrajectory = Trajectory<DensityMatrix>;
using ClassicalTrajectory = Trajectory<ProbabilityVector>;

// ------------------------------ small helpers -------------------------------

namespace ops {

inline MatrixXc sigma_x() {
    MatrixXc m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}
inline MatrixXc sigma_y() {
    MatrixXc m(2, 2);
    m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    return m;
}
inline MatrixXc sigma_z() {
    MatrixXc m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}
// |0><1|: lowers |1> (excited) to |0> (ground)
inline MatrixXc sigma_minus() {
    MatrixXc m = MatrixXc::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}
inline MatrixXc sigma_plus() { return sigma_minus().adjoint(); }

inline VectorXc ket(int d, int k) {
    VectorXc v = VectorXc::Zero(d);
    v(k) = 1.0;
    return v;
}

// Superoperator of rho -> -i[H, rho] + sum_k rate_k (L rho L^+ - 1/2 {L^+ L, rho}).
inline MatrixXc gksl_superoperator(const MatrixXc& hamiltonian, const std::vector<MatrixXc>& jumps,
                                   const std::vector<double>& rates) {
    if (jumps.size() != rates.size()) throw ContractViolation("gksl_superoperator: rates/jumps size mismatch");
    const Eigen::Index d = hamiltonian.rows();
    const cplx i1(0.0, 1.0);
    MatrixXc g = -i1 * (left_mult(hamiltonian) - right_mult(hamiltonian));
    for (std::size_t k = 0; k < jumps.size(); ++k) {
        const MatrixXc& l = jumps[k];
        if (l.rows() != d) throw ContractViolation("gksl_superoperator: jump operator dimension");
        const MatrixXc ldl = l.adjoint() * l;
        g += rates[k] * (kron(MatrixXc(l.conjugate()), l) - 0.5 * left_mult(ldl) - 0.5 * right_mult(ldl));
    }
    return g;
}

}  // namespace ops

}  // namespace backflow
