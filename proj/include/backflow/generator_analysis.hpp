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

// generator_analysis.hpp: exact TCL generators from propagator families,
// canonical GKSL decomposition and divisibility tests.

#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "backflow/core_types.hpp"
#include "backflow/propagation.hpp"

namespace backflow {

inline constexpr double default_rate_tolerance = 1e-7;
inline constexpr double default_condition_limit = 1e8;
inline constexpr double extracted_annihilation_tolerance = 1e-7;
// Safety factor on the round-off estimate of an extracted sample; the 4th-order
// stencil alone contributes 1.5.
inline constexpr double extraction_noise_factor = 24.0;

// Generator sampled on a grid. Points where Phi(t) was too ill-conditioned to
// invert are marked invalid and grouped into `gaps`.
template <class Scalar>
struct SampledGenerator {
    TimeGrid grid;
    std::vector<Matrix<Scalar>> samples;
    std::vector<char> valid;
    std::vector<Interval> gaps;
    // Round-off scale of each sample: storage error of Phi differentiated on
    // the grid and amplified by Phi^{-1}, ~ u cond(Phi) / dt. Zero for
    // analytic samples.
    std::vector<double> noise_floor;

    int dim() const { return static_cast<int>(samples.front().rows()); }

    // Continuous generator for solve_tcl: cubic Lagrange interpolation through
    // the four nearest samples. Throws inside gaps.
    TclGenerator<Scalar> as_tcl_generator() const {
        const SampledGenerator* self = this;
        return TclGenerator<Scalar>{dim(), [self](double t) { return self->interpolate(t); }};
    }

    Matrix<Scalar> interpolate(double t) const {
        const double dt = grid.dt();
        const auto n = static_cast<long long>(grid.size());
        long long i = static_cast<long long>(std::floor(t / dt));
        i = std::clamp(i - 1, 0LL, n - 4);
        Matrix<Scalar> out = Matrix<Scalar>::Zero(dim(), dim());
        for (long long a = i; a < i + 4; ++a) {
            if (!valid[static_cast<std::size_t>(a)]) throw GeneratorSingularity("generator undefined inside a gap", t);
            double w = 1.0;
            for (long long b = i; b < i + 4; ++b)
                if (b != a) w *= (t - grid[static_cast<std::size_t>(b)]) / (grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b)]);
            out += w * samples[static_cast<std::size_t>(a)];
        }
        return out;
    }
};

using QuantumSampledGenerator = SampledGenerator<cplx>;
using ClassicalSampledGenerator = SampledGenerator<double>;

namespace detail {

inline std::vector<Interval> runs_to_intervals(const TimeGrid& grid, const std::vector<char>& valid) {
    std::vector<Interval> gaps;
    for (std::size_t i = 0; i < valid.size();) {
        if (valid[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < valid.size() && !valid[j + 1]) ++j;
        gaps.push_back({grid[i], grid[j]});
        i = j + 1;
    }
    return gaps;
}

// 4th-order first derivative at point i of a uniformly sampled sequence:
// centred five-point stencil inside, one-sided five-point at the ends.
template <class Scalar>
Matrix<Scalar> derivative_4th(const std::vector<Matrix<Scalar>>& f, std::size_t i, double h) {
    const std::size_t n = f.size();
    const double s = 1.0 / (12.0 * h);
    if (i >= 2 && i + 2 < n) return s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    if (i == 0) return s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    if (i == 1) return s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    if (i == n - 1)
        return -s * (-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]);
    return -s * (-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]);
}

}  // namespace detail

enum class SingularPolicy { gap, raise };

// G(t) = dPhi/dt Phi(t)^{-1}. Ill-conditioned points become gaps (or raise
// GeneratorSingularity under SingularPolicy::raise).
template <class Scalar>
SampledGenerator<Scalar> extract_tcl_generator(const PropagatorFamily<Scalar>& family,
                                               double condition_limit = default_condition_limit,
                                               SingularPolicy policy = SingularPolicy::gap) {
    const TimeGrid& grid = family.grid;
    if (!grid.is_uniform()) throw ContractViolation("extract_tcl_generator: grid must be uniform");
    if (family.size() < 5) throw ContractViolation("extract_tcl_generator: need at least 5 grid points");
    const double h = grid.dt();
    const int dim = static_cast<int>(family.maps.front().rows());

    SampledGenerator<Scalar> out{grid, {}, std::vector<char>(family.size(), 1), {}, std::vector<double>(family.size(), 0.0)};
    out.samples.reserve(family.size());
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Matrix<Scalar>& phi = family.maps[i];
        Eigen::JacobiSVD<Matrix<Scalar>> svd(phi);
        const auto& sv = svd.singularValues();
        const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
        if (!(cond <= condition_limit)) {
            if (policy == SingularPolicy::raise)
                throw GeneratorSingularity("propagator ill-conditioned (cond = " + std::to_string(cond) + ")", grid[i]);
            out.valid[i] = 0;
            out.samples.push_back(Matrix<Scalar>::Zero(dim, dim));
            continue;
        }
        const Matrix<Scalar> dphi = detail::derivative_4th(family.maps, i, h);
        const double defect = conservation_defect<Scalar>(dphi);
        if (defect > extracted_annihilation_tolerance * std::max(1.0, dphi.norm()))
            throw NumericalError("extract_tcl_generator: propagator derivative at t = " + std::to_string(grid[i]) +
                                 " does not conserve the trace (defect " + std::to_string(defect) + ")");
        // G phi = dphi  <=>  phi^T G^T = dphi^T
        Matrix<Scalar> g = phi.transpose().fullPivLu().solve(dphi.transpose()).transpose();
        // Round-off in dphi is amplified by phi^{-1} near the condition limit;
        // project it out so every sample annihilates the trace exactly.
        const auto r = conserved_functional<Scalar>(dim);
        g -= r * (r.transpose() * g) / r.squaredNorm();
        out.noise_floor[i] = extraction_noise_factor * std::numeric_limits<double>::epsilon() * cond / h;
        out.samples.push_back(std::move(g));
    }
    out.gaps = detail::runs_to_intervals(grid, out.valid);
    return out;
}

// Samples an analytic generator on a grid; non-finite samples become gaps.
template <class Scalar>
SampledGenerator<Scalar> sample_generator(const TclGenerator<Scalar>& gen, const TimeGrid& grid) {
    SampledGenerator<Scalar> out{grid, {}, std::vector<char>(grid.size(), 1), {}, std::vector<double>(grid.size(), 0.0)};
    out.samples.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Matrix<Scalar> g = gen.evaluate(grid[i]);
        if (!g.allFinite()) {
            out.valid[i] = 0;
            g = Matrix<Scalar>::Zero(gen.dim, gen.dim);
        }
        out.samples.push_back(std::move(g));
    }
    out.gaps = detail::runs_to_intervals(grid, out.valid);
    return out;
}

// ------------------------------ GKSL form -----------------------------------

// Generalised Gell-Mann matrices, Hilbert-Schmidt orthonormal and traceless.
// Order: symmetric (j<k) pairs lexicographically, then antisymmetric pairs in
// the same order, then diagonal l = 1..d-1. For d = 2 this is
// (sigma_x, sigma_y, sigma_z) / sqrt(2).
inline std::vector<MatrixXc> gell_mann_basis(int d) {
    if (d < 2 || d > max_hilbert_dim) throw ContractViolation("gell_mann_basis: dimension out of range");
    std::vector<MatrixXc> basis;
    const double r2 = std::sqrt(2.0);
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            MatrixXc m = MatrixXc::Zero(d, d);
            m(j, k) = m(k, j) = 1.0 / r2;
            basis.push_back(m);
        }
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            MatrixXc m = MatrixXc::Zero(d, d);
            m(j, k) = cplx(0.0, -1.0 / r2);
            m(k, j) = cplx(0.0, 1.0 / r2);
            basis.push_back(m);
        }
    for (int l = 1; l < d; ++l) {
        MatrixXc m = MatrixXc::Zero(d, d);
        const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int j = 0; j < l; ++j) m(j, j) = norm;
        m(l, l) = -l * norm;
        basis.push_back(m);
    }
    return basis;
}

struct CanonicalGkslForm {
    double time = 0.0;
    MatrixXc hamiltonian;             // Hermitian, traceless
    VectorXr rates;                   // descending, d^2 - 1 entries
    std::vector<MatrixXc> jump_ops;   // HS-orthonormal, traceless

    int dim() const { return static_cast<int>(hamiltonian.rows()); }

    MatrixXc reassemble() const {
        return ops::gksl_superoperator(hamiltonian, jump_ops, std::vector<double>(rates.data(), rates.data() + rates.size()));
    }
};

// Expands g(rho) = sum_{ij} c_ij F_i rho F_j^+ over {F_0 = I/sqrt(d), F_1..}.
// The traceless block of c is the Kossakowski matrix; its eigenvalues are the
// canonical rates and its eigenvectors give the jump operators. The c_{i0}
// column carries the Hamiltonian.
inline CanonicalGkslForm gksl_canonical_decompose(const MatrixXc& g, int d, const std::vector<MatrixXc>& traceless_basis,
                                                  double time = 0.0) {
    const int n2 = d * d;
    if (g.rows() != n2 || g.cols() != n2) throw ContractViolation("gksl_canonical_decompose: superoperator shape");
    if (static_cast<int>(traceless_basis.size()) != n2 - 1)
        throw ContractViolation("gksl_canonical_decompose: basis must have d^2 - 1 elements");
    if (trace_annihilation_defect(g, d) > extracted_annihilation_tolerance * std::max(1.0, g.norm()))
        throw ContractViolation("gksl_canonical_decompose: generator does not annihilate the trace (t = " +
                                std::to_string(time) + ")");

    std::vector<MatrixXc> f;
    f.reserve(static_cast<std::size_t>(n2));
    f.push_back(MatrixXc::Identity(d, d) / std::sqrt(static_cast<double>(d)));
    for (const auto& b : traceless_basis) f.push_back(b);

    // c_ij = <conj(F_j) kron F_i, g>_HS since vec(F_i X F_j^+) = (conj(F_j) kron F_i) vec(X).
    // Entry-wise: c_ij = sum_{qs} F_j(q,s) m_i(q,s), m_i(q,s) = sum_{pr} conj(F_i(p,r)) g(p+dq, r+ds).
    MatrixXc c(n2, n2);
    MatrixXc m(d, d);
    for (int i = 0; i < n2; ++i) {
        const MatrixXc& fi = f[static_cast<std::size_t>(i)];
        for (int q = 0; q < d; ++q)
            for (int s = 0; s < d; ++s) {
                cplx acc = 0.0;
                for (int p = 0; p < d; ++p)
                    for (int r = 0; r < d; ++r) acc += std::conj(fi(p, r)) * g(p + d * q, r + d * s);
                m(q, s) = acc;
            }
        for (int j = 0; j < n2; ++j) c(i, j) = f[static_cast<std::size_t>(j)].cwiseProduct(m).sum();
    }

    MatrixXc fop = MatrixXc::Zero(d, d);
    for (int i = 1; i < n2; ++i) fop += c(i, 0) * f[static_cast<std::size_t>(i)];
    fop /= std::sqrt(static_cast<double>(d));
    MatrixXc h = cplx(0.0, 0.5) * (fop - fop.adjoint());
    h = 0.5 * (h + h.adjoint());

    MatrixXc a = c.bottomRightCorner(n2 - 1, n2 - 1);
    a = 0.5 * (a + a.adjoint());
    auto eig = hermitian_eig(a, 1e300);  // already symmetrised

    CanonicalGkslForm out;
    out.time = time;
    out.hamiltonian = h;
    out.rates = eig.values;
    for (int k = 0; k < n2 - 1; ++k) {
        MatrixXc l = MatrixXc::Zero(d, d);
        for (int i = 0; i < n2 - 1; ++i) l += eig.vectors(i, k) * traceless_basis[static_cast<std::size_t>(i)];
        out.jump_ops.push_back(l);
    }
    return out;
}

inline CanonicalGkslForm gksl_canonical_decompose(const SuperoperatorSample& g) {
    return gksl_canonical_decompose(g.entries, g.dim, gell_mann_basis(g.dim), g.time);
}

inline CanonicalGkslForm gksl_canonical_decompose(const MatrixXc& g, int d, double time = 0.0) {
    return gksl_canonical_decompose(g, d, gell_mann_basis(d), time);
}

// ------------------------------ divisibility --------------------------------

struct DivisibilityReport {
    bool divisible = true;
    double min_rate = std::numeric_limits<double>::infinity();
    std::optional<double> first_violation_time;
    std::vector<double> times;
    std::vector<VectorXr> rate_traces;  // empty vector at gap points
    std::vector<Interval> gaps;
    double max_reassembly_error = 0.0;  // quantum only
    double max_noise_floor = 0.0;       // largest per-sample round-off allowance used
};

namespace detail {
// A rate counts as negative only beyond the tolerance plus the sample's
// round-off scale; near the condition limit the extracted rates cannot
// resolve smaller values.
inline void record_rates(DivisibilityReport& rep, double m, double floor, double t, double tol) {
    rep.min_rate = std::min(rep.min_rate, m);
    rep.max_noise_floor = std::max(rep.max_noise_floor, floor);
    if (m < -(tol + floor)) {
        rep.divisible = false;
        if (!rep.first_violation_time) rep.first_violation_time = t;
    }
}
}  // namespace detail

inline DivisibilityReport check_cp_divisible(const QuantumSampledGenerator& gen, double rate_tolerance = default_rate_tolerance) {
    const int d = hilbert_dim_of(gen.dim());
    const auto basis = gell_mann_basis(d);
    DivisibilityReport rep;
    rep.gaps = gen.gaps;
    rep.times = gen.grid.points();
    rep.rate_traces.resize(gen.samples.size());
    // Per-point decompositions are independent.
    for (std::size_t i = 0; i < gen.samples.size(); ++i) {
        if (!gen.valid[i]) continue;
        CanonicalGkslForm form;
        try {
            form = gksl_canonical_decompose(gen.samples[i], d, basis, gen.grid[i]);
        } catch (const ContractViolation& e) {
            throw NumericalError(std::string("check_cp_divisible: ") + e.what());
        }
        rep.max_reassembly_error = std::max(rep.max_reassembly_error, (form.reassemble() - gen.samples[i]).norm());
        rep.rate_traces[i] = form.rates;
        detail::record_rates(rep, form.rates.minCoeff(), gen.noise_floor[i], gen.grid[i], rate_tolerance);
    }
    return rep;
}

// Off-diagonal entries W_ij(t), i != j, in column-stacked order.
inline VectorXr off_diagonal_rates(const MatrixXr& w) {
    const auto n = w.rows();
    VectorXr out(n * (n - 1));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) out(k++) = w(i, j);
    return out;
}

inline DivisibilityReport check_classical_divisible(const ClassicalSampledGenerator& gen,
                                                    double rate_tolerance = default_rate_tolerance) {
    DivisibilityReport rep;
    rep.gaps = gen.gaps;
    rep.times = gen.grid.points();
    rep.rate_traces.resize(gen.samples.size());
    for (std::size_t i = 0; i < gen.samples.size(); ++i) {
        if (!gen.valid[i]) continue;
        const auto& w = gen.samples[i];
        const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
        if (w.colwise().sum().cwiseAbs().maxCoeff() > extracted_annihilation_tolerance * scale)
            throw ContractViolation("check_classical_divisible: column sums not zero at t = " + std::to_string(gen.grid[i]));
        rep.rate_traces[i] = off_diagonal_rates(w);
        const double m = rep.rate_traces[i].size() ? rep.rate_traces[i].minCoeff() : 0.0;
        detail::record_rates(rep, m, gen.noise_floor[i], gen.grid[i], rate_tolerance);
    }
    return rep;
}

}  // namespace backflow
