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

// netfd.hpp: thermo-field doubling of a density matrix, the extended entropy
// and its classical / intrinsic split with the decomposed backflow.

#pragma once

#include <cmath>
#include <utility>

#include "backflow/core_types.hpp"
#include "backflow/information.hpp"
#include "backflow/regime.hpp"

namespace backflow {

// |Psi_rho> = (rho^{1/2} kron 1) sum_n |n>|n~> in H kron H~. Amplitude of
// |n>|m~> sits at index n + d*m, i.e. amplitudes = vec(rho^{1/2}).
struct ThermoFieldState {
    int dim = 0;
    VectorXc amplitudes;
};

inline ThermoFieldState thermofield_vector(const DensityMatrix& rho) {
    return ThermoFieldState{rho.dim(), vectorize(psd_sqrt(rho.matrix()))};
}

// Tr_{H~} |Psi><Psi| computed from the amplitude matrix M (M_nm = psi[n + d m])
// as M M^+, without forming the d^2 x d^2 projector.
inline DensityMatrix extended_reduced_density(const ThermoFieldState& psi) {
    if (psi.amplitudes.size() != static_cast<Eigen::Index>(psi.dim) * psi.dim)
        throw ContractViolation("extended_reduced_density: amplitude length is not dim^2");
    const double nrm = psi.amplitudes.norm();
    if (std::abs(nrm - 1.0) > 1e-10) throw ContractViolation("extended_reduced_density: state is not normalised");
    const MatrixXc m = devectorize(psi.amplitudes, psi.dim);
    return DensityMatrix::normalized(m * m.adjoint());
}

inline DensityMatrix extended_reduced_density_of(const DensityMatrix& rho) {
    return extended_reduced_density(thermofield_vector(rho));
}

inline double extended_entropy(const DensityMatrix& rho_a) { return von_neumann_entropy(rho_a); }

// ------------------------------ two-state split -----------------------------

struct TwoStateNetfdParams {
    double p = 0.5;
    cplx c = 0.0;

    double b_qe() const { return std::norm(c); }

    void validate(double tol = 1e-12) const {
        if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("TwoStateNetfdParams: p outside [0, 1]");
        if (b_qe() > p * (1.0 - p) + tol)
            throw ContractViolation("TwoStateNetfdParams: b_qe = " + std::to_string(b_qe()) + " exceeds p(1-p) = " +
                                    std::to_string(p * (1.0 - p)) + " (not PSD)");
    }

    MatrixXc matrix() const {
        MatrixXc m(2, 2);
        m << p, c, std::conj(c), 1.0 - p;
        return m;
    }
};

struct TwoStateSplit {
    double s_hat = 0.0;
    double s_cl = 0.0;
    double s_qe = 0.0;  // residual S_hat - S_cl, <= 0 for 2x2 states
};

inline double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

inline TwoStateSplit decompose_two_state(const TwoStateNetfdParams& params) {
    params.validate();
    const double delta = params.p - 0.5;
    const double r = std::sqrt(delta * delta + params.b_qe());
    const double hi = std::min(1.0, 0.5 + r);
    const double lo = std::max(0.0, 0.5 - r);
    TwoStateSplit out;
    out.s_hat = -xlogx(hi) - xlogx(lo);
    out.s_cl = binary_entropy(params.p);
    out.s_qe = std::min(0.0, out.s_hat - out.s_cl);
    return out;
}

inline std::pair<double, double> two_state_split(const DensityMatrix& rho) {
    if (rho.dim() != 2) throw ContractViolation("two-state split needs a 2x2 state");
    const auto s = decompose_two_state({rho(0, 0).real(), rho(0, 1)});
    return {s.s_cl, s.s_qe};
}

// ------------------------------ decomposed backflow -------------------------

// Steps where one series rises while the other strictly falls break the
// additivity of positive parts. The rise intervals coincide when those
// conflicting steps cover less than two grid steps.
struct RiseCoincidence {
    bool coincident = false;
    double conflict_measure = 0.0;
};

inline RiseCoincidence rise_coincidence(const InfoSeries& a, const InfoSeries& b, double noise = 1e-13) {
    if (a.values.size() != b.values.size()) throw ContractViolation("rise_coincidence: length mismatch");
    RiseCoincidence out;
    for (std::size_t i = 0; i + 1 < a.values.size(); ++i) {
        if (a.skipped(i) || a.skipped(i + 1)) continue;
        const double da = a.values[i + 1] - a.values[i];
        const double db = b.values[i + 1] - b.values[i];
        if ((da > noise && db < -noise) || (db > noise && da < -noise)) out.conflict_measure += a.grid[i + 1] - a.grid[i];
    }
    const double dt = a.grid[1] - a.grid[0];
    out.coincident = out.conflict_measure < 2.0 * dt;
    return out;
}

struct DecomposedBackflow {
    double n_total = 0.0;
    double n_cl = 0.0;
    double n_qe = 0.0;
    Regime regime = Regime::monotone;
    bool bound_holds = true;   // n_total <= n_cl + n_qe + 1e-8
    RiseCoincidence coincidence;
};

inline constexpr double subadditivity_slack = 1e-8;

inline DecomposedBackflow decomposed_backflow(const InfoSeries& s_cl, const InfoSeries& s_qe,
                                              double epsilon_n = default_epsilon_n) {
    if (s_cl.values.size() != s_qe.values.size() || s_cl.grid.points() != s_qe.grid.points())
        throw ContractViolation("decomposed_backflow: series are on different grids");
    if (s_cl.skip_intervals.size() != s_qe.skip_intervals.size())
        throw ContractViolation("decomposed_backflow: skip intervals differ");
    InfoSeries total{s_cl.grid, {}, MeasureTag::extended_entropy, s_cl.skip_intervals};
    total.values.reserve(s_cl.values.size());
    for (std::size_t i = 0; i < s_cl.values.size(); ++i) total.values.push_back(s_cl.values[i] + s_qe.values[i]);

    DecomposedBackflow out;
    out.n_cl = backflow_functional(s_cl);
    out.n_qe = backflow_functional(s_qe);
    out.n_total = backflow_functional(total);
    out.bound_holds = out.n_total <= out.n_cl + out.n_qe + subadditivity_slack;
    out.regime = classify(out.n_cl, out.n_qe, epsilon_n);
    out.coincidence = rise_coincidence(s_cl, s_qe);
    return out;
}

// s_cl and s_qe series of a qubit trajectory.
inline std::pair<InfoSeries, InfoSeries> two_state_series(const QuantumTrajectory& traj, std::vector<Interval> skip = {}) {
    InfoSeries cl{traj.grid, {}, MeasureTag::s_cl, skip};
    InfoSeries qe{traj.grid, {}, MeasureTag::s_qe, std::move(skip)};
    cl.values.reserve(traj.size());
    qe.values.reserve(traj.size());
    for (const auto& rho : traj.states) {
        const auto [a, b] = two_state_split(rho);
        cl.values.push_back(a);
        qe.values.push_back(b);
    }
    return {std::move(cl), std::move(qe)};
}

}  // namespace backflow
