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

// information.hpp: entropies, divergences, distances, information series and
// the backflow functional (total positive variation of I(t)).
//
// Natural logarithms throughout (nats).

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "backflow/core_types.hpp"

namespace backflow {

enum class MeasureTag { vn_entropy, rel_entropy, kl, trace_distance, extended_entropy, s_cl, s_qe };

inline std::string_view to_string(MeasureTag t) {
    switch (t) {
        case MeasureTag::vn_entropy: return "vn_entropy";
        case MeasureTag::rel_entropy: return "rel_entropy";
        case MeasureTag::kl: return "kl";
        case MeasureTag::trace_distance: return "trace_distance";
        case MeasureTag::extended_entropy: return "extended_entropy";
        case MeasureTag::s_cl: return "s_cl";
        case MeasureTag::s_qe: return "s_qe";
    }
    return "?";
}

inline std::optional<MeasureTag> measure_from_string(std::string_view s) {
    for (auto t : {MeasureTag::vn_entropy, MeasureTag::rel_entropy, MeasureTag::kl, MeasureTag::trace_distance,
                   MeasureTag::extended_entropy, MeasureTag::s_cl, MeasureTag::s_qe})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

inline constexpr double support_weight_tol = 1e-10;
inline constexpr double support_eig_tol = 1e-12;

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double shannon_entropy(const VectorXr& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) s -= xlogx(std::max(p(i), 0.0));
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
    const auto eig = hermitian_eig(rho.matrix());
    return std::max(0.0, shannon_entropy(eig.values.cwiseMax(0.0)));
}

// D(rho || sigma); +infinity when supp(rho) is not inside supp(sigma).
inline double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw ContractViolation("relative_entropy: dimension mismatch");
    const auto er = hermitian_eig(rho.matrix());
    const auto es = hermitian_eig(sigma.matrix());
    double cross = 0.0;  // Tr rho log sigma
    for (Eigen::Index k = 0; k < es.values.size(); ++k) {
        const double w = (es.vectors.col(k).adjoint() * rho.matrix() * es.vectors.col(k))(0, 0).real();
        const double s = es.values(k);
        if (s < support_eig_tol) {
            if (w > support_weight_tol) return std::numeric_limits<double>::infinity();
            continue;
        }
        cross += w * std::log(s);
    }
    double self = 0.0;
    for (Eigen::Index k = 0; k < er.values.size(); ++k) self += xlogx(std::max(er.values(k), 0.0));
    return std::max(0.0, self - cross);
}

inline double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q) {
    if (p.dim() != q.dim()) throw ContractViolation("kl_divergence: dimension mismatch");
    double d = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double pi = std::max(p(i), 0.0);
        if (pi <= 0.0) continue;
        if (q(i) < support_eig_tol) {
            if (pi > support_weight_tol) return std::numeric_limits<double>::infinity();
            continue;
        }
        d += pi * std::log(pi / q(i));
    }
    return std::max(0.0, d);
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw ContractViolation("trace_distance: dimension mismatch");
    const auto e = hermitian_eig(rho.matrix() - sigma.matrix());
    return std::min(1.0, 0.5 * e.values.cwiseAbs().sum());
}

// Total-variation distance; the classical trace distance.
inline double trace_distance(const ProbabilityVector& p, const ProbabilityVector& q) {
    if (p.dim() != q.dim()) throw ContractViolation("trace_distance: dimension mismatch");
    return 0.5 * (p.vector() - q.vector()).cwiseAbs().sum();
}

// ------------------------------ series --------------------------------------

struct InfoSeries {
    TimeGrid grid;
    std::vector<double> values;
    MeasureTag measure_tag = MeasureTag::vn_entropy;
    std::vector<Interval> skip_intervals;

    bool skipped(std::size_t i) const {
        for (const auto& iv : skip_intervals)
            if (iv.contains(grid[i])) return true;
        return false;
    }
};

// Reference for distance-type measures: a fixed state or a second trajectory
// on the same grid (pair evolution).
using QuantumReference = std::variant<std::monostate, DensityMatrix, const QuantumTrajectory*>;
using ClassicalReference = std::variant<std::monostate, ProbabilityVector, const ClassicalTrajectory*>;

namespace detail {
template <class State, class Ref>
const State& reference_at(const Ref& ref, std::size_t i, std::size_t n) {
    if (std::holds_alternative<State>(ref)) return std::get<State>(ref);
    const auto* traj = std::get<const Trajectory<State>*>(ref);
    if (traj == nullptr || traj->size() != n) throw ContractViolation("series_from_trajectory: reference trajectory length mismatch");
    return traj->states[i];
}
}  // namespace detail

// Defined in netfd.hpp, which is pulled in at the end of this header.
inline double extended_entropy(const DensityMatrix& rho_a);
inline DensityMatrix extended_reduced_density_of(const DensityMatrix& rho);
inline std::pair<double, double> two_state_split(const DensityMatrix& rho);

inline InfoSeries series_from_trajectory(const QuantumTrajectory& traj, MeasureTag tag, const QuantumReference& ref = {},
                                         std::vector<Interval> skip = {}) {
    InfoSeries s{traj.grid, {}, tag, std::move(skip)};
    s.values.reserve(traj.size());
    const bool needs_ref = tag == MeasureTag::rel_entropy || tag == MeasureTag::trace_distance;
    if (needs_ref && std::holds_alternative<std::monostate>(ref))
        throw ContractViolation("series_from_trajectory: measure " + std::string(to_string(tag)) + " needs a reference");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& rho = traj.states[i];
        switch (tag) {
            case MeasureTag::vn_entropy: s.values.push_back(von_neumann_entropy(rho)); break;
            case MeasureTag::rel_entropy:
                s.values.push_back(relative_entropy(rho, detail::reference_at<DensityMatrix>(ref, i, traj.size())));
                break;
            case MeasureTag::trace_distance:
                s.values.push_back(trace_distance(rho, detail::reference_at<DensityMatrix>(ref, i, traj.size())));
                break;
            case MeasureTag::extended_entropy: s.values.push_back(extended_entropy(extended_reduced_density_of(rho))); break;
            case MeasureTag::s_cl: s.values.push_back(two_state_split(rho).first); break;
            case MeasureTag::s_qe: s.values.push_back(two_state_split(rho).second); break;
            default: throw ContractViolation("series_from_trajectory: unsupported quantum measure");
        }
    }
    return s;
}

inline InfoSeries series_from_trajectory(const ClassicalTrajectory& traj, MeasureTag tag, const ClassicalReference& ref = {},
                                         std::vector<Interval> skip = {}) {
    InfoSeries s{traj.grid, {}, tag, std::move(skip)};
    s.values.reserve(traj.size());
    const bool needs_ref = tag == MeasureTag::kl || tag == MeasureTag::trace_distance;
    if (needs_ref && std::holds_alternative<std::monostate>(ref))
        throw ContractViolation("series_from_trajectory: measure " + std::string(to_string(tag)) + " needs a reference");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& p = traj.states[i];
        switch (tag) {
            case MeasureTag::vn_entropy: s.values.push_back(shannon_entropy(p.vector())); break;
            case MeasureTag::kl:
                s.values.push_back(kl_divergence(p, detail::reference_at<ProbabilityVector>(ref, i, traj.size())));
                break;
            case MeasureTag::trace_distance:
                s.values.push_back(trace_distance(p, detail::reference_at<ProbabilityVector>(ref, i, traj.size())));
                break;
            default:
                throw ContractViolation("series_from_trajectory: measure " + std::string(to_string(tag)) +
                                        " is not defined on classical states");
        }
    }
    return s;
}

// ------------------------------ backflow ------------------------------------

// N_I = sum over consecutive non-skipped pairs of max(I_{i+1} - I_i, 0).
// Pairs touching a non-finite value are ignored.
inline double backflow_functional(const InfoSeries& s) {
    if (s.values.size() != s.grid.size()) throw ContractViolation("backflow_functional: values/grid size mismatch");
    std::size_t usable = 0;
    std::vector<char> skip(s.values.size());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        skip[i] = s.skipped(i);
        if (!skip[i]) ++usable;
    }
    if (usable < 2) throw ContractViolation("backflow_functional: need at least 2 non-skipped points");
    double n = 0.0;
    for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
        if (skip[i] || skip[i + 1]) continue;
        const double a = s.values[i], b = s.values[i + 1];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if (b > a) n += b - a;
    }
    return n;
}

struct BackflowSummary {
    double value = 0.0;
    double tail_residual = 0.0;    // I(t_max) - min_t I(t)
    std::size_t non_finite_points = 0;
    double refinement_error = 0.0; // |N(grid) - N(every other point)|
};

inline InfoSeries subsample(const InfoSeries& s, std::size_t stride) {
    InfoSeries out{s.grid.coarsened(stride), {}, s.measure_tag, s.skip_intervals};
    for (std::size_t i = 0; i < s.values.size(); i += stride) out.values.push_back(s.values[i]);
    return out;
}

inline BackflowSummary backflow_summary(const InfoSeries& s) {
    BackflowSummary out;
    out.value = backflow_functional(s);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!std::isfinite(s.values[i])) {
            ++out.non_finite_points;
            continue;
        }
        if (!s.skipped(i)) lo = std::min(lo, s.values[i]);
    }
    const double last = s.values.back();
    out.tail_residual = std::isfinite(last) && std::isfinite(lo) ? last - lo : std::numeric_limits<double>::infinity();
    if (s.values.size() >= 5) {
        try {
            out.refinement_error = std::abs(out.value - backflow_functional(subsample(s, 2)));
        } catch (const ContractViolation&) {
            out.refinement_error = 0.0;
        }
    }
    return out;
}

// Restriction of a series to the grid window [first, last] (indices).
inline InfoSeries window(const InfoSeries& s, std::size_t first, std::size_t last) {
    if (!(first < last && last < s.values.size())) throw ContractViolation("window: bad index range");
    std::vector<double> pts;
    for (std::size_t i = first; i <= last; ++i) pts.push_back(s.grid[i] - s.grid[first]);
    InfoSeries out{TimeGrid(std::move(pts)), {}, s.measure_tag, {}};
    for (std::size_t i = first; i <= last; ++i) out.values.push_back(s.values[i]);
    for (const auto& iv : s.skip_intervals) out.skip_intervals.push_back({iv.start - s.grid[first], iv.end - s.grid[first]});
    return out;
}

}  // namespace backflow

#include "backflow/netfd.hpp"
