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

// phase_diagram.hpp: the end-to-end analysis of one model (trajectory,
// propagator, extracted generator, divisibility, information series,
// backflow, classical/intrinsic split, regime) and parameter sweeps over it.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "backflow/core_types.hpp"
#include "backflow/generator_analysis.hpp"
#include "backflow/information.hpp"
#include "backflow/models.hpp"
#include "backflow/netfd.hpp"
#include "backflow/propagation.hpp"
#include "backflow/regime.hpp"

namespace backflow {

// ------------------------------ revival detector ----------------------------

struct RevivalResult {
    bool revival = false;
    std::vector<double> peak_times;
    std::vector<double> peak_values;
};

// Strict local maxima on the grid; a revival is a peak exceeding some earlier
// peak by more than epsilon_n.
inline RevivalResult revival_detector(const InfoSeries& s, double epsilon_n = default_epsilon_n) {
    if (s.values.size() < 3) throw ContractViolation("revival_detector: need at least 3 points");
    RevivalResult out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < s.values.size(); ++i) {
        const double v = s.values[i];
        if (!(v > s.values[i - 1] && v > s.values[i + 1])) continue;
        out.peak_times.push_back(s.grid[i]);
        out.peak_values.push_back(v);
        if (v > best + epsilon_n && std::isfinite(best)) out.revival = true;
        best = std::max(best, v);
    }
    return out;
}

// ------------------------------ single analysis -----------------------------

struct AnalysisOptions {
    double dt = 1e-3;
    double t_max = 20.0;
    std::vector<MeasureTag> measures;  // empty: model defaults
    double epsilon_n = default_epsilon_n;
    double rate_tolerance = default_rate_tolerance;
    double condition_limit = default_condition_limit;
    bool divisibility = true;

    TimeGrid grid() const { return TimeGrid::uniform(t_max, dt); }
};

struct MeasureResult {
    MeasureTag tag;
    BackflowSummary summary;
};

struct BackflowReport {
    ModelConfig model;
    std::vector<MeasureResult> measures;
    double n_total = 0.0;
    double n_cl = 0.0;
    double n_qe = 0.0;
    bool bound_holds = true;
    bool coincident = false;
    std::optional<bool> divisible;
    std::optional<double> min_rate;
    std::optional<double> first_violation_time;
    std::vector<Interval> gaps;
    RevivalResult revival;
    Regime regime = Regime::monotone;
    bool marginal = false;
    std::vector<std::string> warnings;

    const MeasureResult* measure(MeasureTag t) const {
        for (const auto& m : measures)
            if (m.tag == t) return &m;
        return nullptr;
    }
};

using AnyTrajectory = std::variant<QuantumTrajectory, ClassicalTrajectory>;
using AnyFamily = std::variant<std::monostate, QuantumFamily, ClassicalFamily>;

inline std::vector<MeasureTag> default_measures(const Model& m) {
    if (m.kind == Kind::quantum) {
        std::vector<MeasureTag> v{MeasureTag::vn_entropy};
        if (m.quantum_reference) v.push_back(MeasureTag::rel_entropy);
        if (m.quantum_pair) v.push_back(MeasureTag::trace_distance);
        v.push_back(MeasureTag::extended_entropy);
        if (m.dim == 2) {
            v.push_back(MeasureTag::s_cl);
            v.push_back(MeasureTag::s_qe);
        }
        return v;
    }
    std::vector<MeasureTag> v{MeasureTag::vn_entropy};
    if (m.classical_reference) v.push_back(MeasureTag::kl);
    if (m.classical_pair) v.push_back(MeasureTag::trace_distance);
    return v;
}

// Phi(t, 0) on the grid when the model provides one.
inline AnyFamily model_family(const Model& m, const TimeGrid& grid) {
    switch (m.propagation) {
        case Propagation::closed_form_series: return std::monostate{};
        case Propagation::closed_form_propagator:
            if (m.kind == Kind::quantum) return sample_propagator<cplx>(m.quantum_propagator, grid);
            return sample_propagator<double>(m.classical_propagator, grid);
        case Propagation::generator:
            if (m.kind == Kind::quantum) return build_propagator(*m.quantum_generator, grid);
            return build_propagator(*m.classical_generator, grid);
        case Propagation::kernel: return build_propagator(*m.classical_kernel, grid);
        case Propagation::embedding: return build_propagator(*m.embedding, grid);
    }
    return std::monostate{};
}

inline QuantumTrajectory sample_series(const Model& m, const TimeGrid& grid) {
    QuantumTrajectory traj{grid, {}, {}};
    traj.states.reserve(grid.size());
    for (double t : grid.points()) traj.states.push_back(m.quantum_series(t));
    return traj;
}

inline AnyTrajectory model_trajectory(const Model& m, const AnyFamily& fam, const TimeGrid& grid, bool pair = false) {
    if (m.kind == Kind::quantum) {
        if (std::holds_alternative<std::monostate>(fam)) {
            if (pair) throw ContractViolation("model_trajectory: model has no pair state");
            return sample_series(m, grid);
        }
        return apply_family(std::get<QuantumFamily>(fam), pair ? *m.quantum_pair : *m.quantum_initial);
    }
    auto traj = apply_family(std::get<ClassicalFamily>(fam), pair ? *m.classical_pair : *m.classical_initial);
    if (m.propagation == Propagation::kernel) traj.warnings = detail::tc_warnings(m.classical_kernel->decay_scale, grid);
    return traj;
}

// Convenience: trajectory of the model's initial state.
inline AnyTrajectory simulate(const Model& m, const TimeGrid& grid) { return model_trajectory(m, model_family(m, grid), grid); }

namespace detail {

template <class Traj, class Ref>
InfoSeries series_for(MeasureTag tag, const Traj& traj, const Traj* pair, const Ref& reference) {
    if (tag == MeasureTag::trace_distance) {
        if (!pair) throw ContractViolation("measure trace_distance needs a pair state");
        return series_from_trajectory(traj, tag, pair);
    }
    return series_from_trajectory(traj, tag, reference);
}

// Marginal: n_cl or n_qe lies within ten refinement errors of the threshold.
inline void tag_marginal(BackflowReport& r, double err_cl, double err_qe, double eps) {
    if (std::abs(r.n_cl - eps) <= 10.0 * err_cl || std::abs(r.n_qe - eps) <= 10.0 * err_qe) r.marginal = true;
}

}  // namespace detail

// Runs the whole pipeline. Numerical failures propagate as exceptions.
inline BackflowReport analyze(const Model& m, const AnalysisOptions& opt) {
    const TimeGrid grid = opt.grid();
    BackflowReport rep;
    rep.model = m.config;
    const AnyFamily fam = model_family(m, grid);

    if (opt.divisibility && !std::holds_alternative<std::monostate>(fam)) {
        DivisibilityReport div;
        if (m.kind == Kind::quantum) {
            const auto gen = extract_tcl_generator(std::get<QuantumFamily>(fam), opt.condition_limit);
            div = check_cp_divisible(gen, opt.rate_tolerance);
        } else {
            const auto gen = extract_tcl_generator(std::get<ClassicalFamily>(fam), opt.condition_limit);
            div = check_classical_divisible(gen, opt.rate_tolerance);
        }
        rep.divisible = div.divisible;
        rep.min_rate = div.min_rate;
        rep.first_violation_time = div.first_violation_time;
        rep.gaps = div.gaps;
    }

    const auto measures = opt.measures.empty() ? default_measures(m) : opt.measures;
    const bool want_pair = std::find(measures.begin(), measures.end(), MeasureTag::trace_distance) != measures.end();
    const AnyTrajectory traj = model_trajectory(m, fam, grid);
    std::optional<AnyTrajectory> pair;
    if (want_pair) pair = model_trajectory(m, fam, grid, true);

    double err_cl = 0.0, err_qe = 0.0;
    for (MeasureTag tag : measures) {
        InfoSeries s = std::visit(
            [&](const auto& tr) -> InfoSeries {
                using T = std::decay_t<decltype(tr)>;
                const T* pp = pair ? &std::get<T>(*pair) : nullptr;
                if constexpr (std::is_same_v<T, QuantumTrajectory>) {
                    QuantumReference ref;
                    if (m.quantum_reference) ref = *m.quantum_reference;
                    return detail::series_for(tag, tr, pp, ref);
                } else {
                    ClassicalReference ref;
                    if (m.classical_reference) ref = *m.classical_reference;
                    return detail::series_for(tag, tr, pp, ref);
                }
            },
            traj);
        rep.measures.push_back({tag, backflow_summary(s)});
    }

    // Classical/intrinsic split: exact for qubits; classical states carry no
    // coherence, so n_cl is the KL (else Shannon) backflow and n_qe = 0.
    if (m.kind == Kind::quantum && m.dim == 2) {
        const auto& qt = std::get<QuantumTrajectory>(traj);
        const auto [cl, qe] = two_state_series(qt);
        const auto dec = decomposed_backflow(cl, qe, opt.epsilon_n);
        rep.n_total = dec.n_total;
        rep.n_cl = dec.n_cl;
        rep.n_qe = dec.n_qe;
        rep.bound_holds = dec.bound_holds;
        rep.coincident = dec.coincidence.coincident;
        InfoSeries mag = qe;
        for (double& v : mag.values) v = std::abs(v);
        rep.revival = revival_detector(mag, opt.epsilon_n);
        err_cl = backflow_summary(cl).refinement_error;
        err_qe = backflow_summary(qe).refinement_error;
    } else if (m.kind == Kind::classical) {
        const auto& ct = std::get<ClassicalTrajectory>(traj);
        const InfoSeries s = m.classical_reference ? series_from_trajectory(ct, MeasureTag::kl, *m.classical_reference)
                                                   : series_from_trajectory(ct, MeasureTag::vn_entropy);
        const auto sum = backflow_summary(s);
        rep.n_cl = rep.n_total = sum.value;
        rep.n_qe = 0.0;
        rep.coincident = true;
        rep.revival = revival_detector(s, opt.epsilon_n);
        err_cl = sum.refinement_error;
    } else {
        rep.warnings.push_back("classical/intrinsic split is only defined for two-level systems");
        const auto* ext = rep.measure(MeasureTag::extended_entropy);
        rep.n_total = ext ? ext->summary.value : 0.0;
    }
    rep.regime = classify(rep.n_cl, rep.n_qe, opt.epsilon_n);
    detail::tag_marginal(rep, err_cl, err_qe, opt.epsilon_n);

    // Divisible with an invariant reference forbids relative-entropy backflow.
    if (rep.divisible.value_or(false)) {
        const auto* rel = rep.measure(m.kind == Kind::quantum ? MeasureTag::rel_entropy : MeasureTag::kl);
        if (rel && rel->summary.value > 1e-5)
            throw NumericalError("divisible dynamics produced relative-entropy backflow " + std::to_string(rel->summary.value));
    }
    for (const auto& w : std::visit([](const auto& t) { return t.warnings; }, traj)) rep.warnings.push_back(w);
    return rep;
}

// ------------------------------ sweeps --------------------------------------

struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    int steps = 2;

    double value(int k) const { return steps == 1 ? min : min + (max - min) * k / (steps - 1); }
};

struct SweepSpec {
    ModelConfig model;  // fixed parameters
    std::vector<SweepAxis> axes;
    AnalysisOptions options;
    int threads = 1;

    void validate() const {
        if (axes.empty() || axes.size() > 2) throw ContractViolation("SweepSpec: need 1 or 2 axes");
        for (const auto& a : axes) {
            if (a.steps < 1) throw ContractViolation("SweepSpec: axis " + a.name + " needs at least 1 step");
            if (a.steps > 1 && !(a.max > a.min)) throw ContractViolation("SweepSpec: axis " + a.name + " has an empty range");
        }
        if (threads < 1) throw ContractViolation("SweepSpec: threads must be >= 1");
        // Every corner of the lattice must be a valid model configuration.
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < (axes.size() > 1 ? 2 : 1); ++j) {
                ModelConfig c = model;
                set_axis(c, axes[0].name, i ? axes[0].max : axes[0].min);
                if (axes.size() > 1) set_axis(c, axes[1].name, j ? axes[1].max : axes[1].min);
                resolve_config(c);
            }
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.steps);
        return n;
    }

    // First axis varies slowest.
    std::vector<double> coordinates(std::size_t index) const {
        std::vector<double> out(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            const auto s = static_cast<std::size_t>(axes[k].steps);
            out[k] = axes[k].value(static_cast<int>(index % s));
            index /= s;
        }
        return out;
    }
};

struct SweepRow {
    std::size_t index = 0;
    std::vector<double> coords;
    std::optional<BackflowReport> report;
    std::string error;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<MeasureTag> measures;
    std::vector<SweepRow> rows;
};

inline SweepRow run_point(const SweepSpec& spec, std::size_t index) {
    SweepRow row{index, spec.coordinates(index), std::nullopt, {}};
    try {
        ModelConfig cfg = spec.model;
        for (std::size_t k = 0; k < spec.axes.size(); ++k) set_axis(cfg, spec.axes[k].name, row.coords[k]);
        row.report = analyze(build_model(cfg), spec.options);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

// Lattice points run on a worker pool; rows are stored by lattice index.
inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult res{spec, spec.options.measures, std::vector<SweepRow>(spec.size())};
    if (res.measures.empty()) res.measures = default_measures(build_model(spec.model));
    SweepSpec fixed = spec;
    fixed.options.measures = res.measures;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < res.rows.size(); i = next++) res.rows[i] = run_point(fixed, i);
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), res.rows.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return res;
}

// ------------------------------ summaries -----------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

inline std::string sweep_csv(const SweepResult& r) {
    std::ostringstream os;
    os << "index";
    for (const auto& a : r.spec.axes) os << ',' << a.name;
    for (auto t : r.measures) os << ",N_" << to_string(t);
    os << ",n_total,n_cl,n_qe,divisible,min_rate,first_violation,revival,regime,marginal,error\n";
    for (const auto& row : r.rows) {
        os << row.index;
        for (double c : row.coords) os << ',' << format_double(c);
        if (!row.report) {
            for (std::size_t k = 0; k < r.measures.size() + 10; ++k) os << ',';
            os << csv_escape(row.error) << '\n';
            continue;
        }
        const auto& rep = *row.report;
        for (auto t : r.measures) {
            const auto* m = rep.measure(t);
            os << ',' << (m ? format_double(m->summary.value) : "");
        }
        os << ',' << format_double(rep.n_total) << ',' << format_double(rep.n_cl) << ',' << format_double(rep.n_qe) << ',';
        if (rep.divisible) os << (*rep.divisible ? "true" : "false");
        os << ',' << (rep.min_rate ? format_double(*rep.min_rate) : "") << ','
           << (rep.first_violation_time ? format_double(*rep.first_violation_time) : "") << ','
           << (rep.revival.revival ? "true" : "false") << ',' << to_string(rep.regime) << ','
           << (rep.marginal ? "true" : "false") << ",\n";
    }
    return os.str();
}

// Boundary estimate between neighbouring lattice points along the first axis
// where the regime changes: the midpoint of the bracketing pair.
struct BoundaryEstimate {
    std::vector<double> lower;  // coordinates of the lattice point before the change
    std::vector<double> upper;
    double midpoint = 0.0;      // along the first axis
    Regime from = Regime::monotone;
    Regime to = Regime::monotone;
};

struct SweepSummary {
    std::map<Regime, std::size_t> regime_counts;
    std::size_t failed_rows = 0;
    std::size_t marginal_rows = 0;
    std::vector<BoundaryEstimate> boundaries;
};

inline SweepSummary summarize(const SweepResult& r) {
    SweepSummary s;
    for (const auto& row : r.rows) {
        if (!row.report) {
            ++s.failed_rows;
            continue;
        }
        ++s.regime_counts[row.report->regime];
        if (row.report->marginal) ++s.marginal_rows;
    }
    const std::size_t inner = r.spec.axes.size() > 1 ? static_cast<std::size_t>(r.spec.axes[1].steps) : 1;
    for (std::size_t i = 0; i + inner < r.rows.size(); ++i) {
        const auto& a = r.rows[i];
        const auto& b = r.rows[i + inner];
        if (!a.report || !b.report || a.report->regime == b.report->regime) continue;
        s.boundaries.push_back({a.coords, b.coords, 0.5 * (a.coords[0] + b.coords[0]), a.report->regime, b.report->regime});
    }
    return s;
}

}  // namespace backflow
