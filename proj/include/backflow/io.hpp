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

// io.hpp: CSV and JSON export, atomic file writes.
//
// Complex matrices go to JSON as row-major nested arrays of [re, im] pairs.
// Matrix-valued CSV columns follow column-stacking order (row index fastest).

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "json.hpp"

#include "backflow/core_types.hpp"
#include "backflow/generator_analysis.hpp"
#include "backflow/information.hpp"
#include "backflow/models.hpp"
#include "backflow/netfd.hpp"
#include "backflow/phase_diagram.hpp"

namespace backflow::io {

using nlohmann::json;

// Writes to a sibling temporary file and renames it over the target, so a
// reader never sees a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw Error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

inline json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

inline json to_json(const MatrixXc& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({number(m(i, j).real()), number(m(i, j).imag())});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const MatrixXr& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const std::vector<Interval>& ivs) {
    json out = json::array();
    for (const auto& iv : ivs) out.push_back({number(iv.start), number(iv.end)});
    return out;
}

inline json to_json(const ModelConfig& c) {
    json p = json::object();
    for (const auto& [k, v] : c.params) p[k] = number(v);
    json out{{"name", c.name}, {"params", p}};
    if (!c.choices.empty()) out["choices"] = c.choices;
    return out;
}

// ------------------------------ CSV -----------------------------------------

inline std::string trajectory_csv(const QuantumTrajectory& traj) {
    std::ostringstream os;
    const int d = traj.states.front().dim();
    os << 't';
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) os << ",rho_" << i << j << "_re,rho_" << i << j << "_im";
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_double(traj.grid[k]);
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i)
                os << ',' << format_double(traj.states[k](i, j).real()) << ',' << format_double(traj.states[k](i, j).imag());
        os << '\n';
    }
    return os.str();
}

inline std::string trajectory_csv(const ClassicalTrajectory& traj) {
    std::ostringstream os;
    const int n = traj.states.front().dim();
    os << 't';
    for (int i = 0; i < n; ++i) os << ",p" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_double(traj.grid[k]);
        for (int i = 0; i < n; ++i) os << ',' << format_double(traj.states[k](i));
        os << '\n';
    }
    return os.str();
}

template <class Scalar>
std::string generator_csv(const SampledGenerator<Scalar>& gen) {
    constexpr bool cx = !std::is_same_v<Scalar, double>;
    const int n = gen.dim();
    std::ostringstream os;
    os << "t,valid";
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if constexpr (cx)
                os << ",g_" << i << '_' << j << "_re,g_" << i << '_' << j << "_im";
            else
                os << ",w_" << i << '_' << j;
        }
    os << '\n';
    for (std::size_t k = 0; k < gen.samples.size(); ++k) {
        os << format_double(gen.grid[k]) << ',' << (gen.valid[k] ? 1 : 0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (!gen.valid[k]) {
                    os << (cx ? ",," : ",");
                    continue;
                }
                if constexpr (cx)
                    os << ',' << format_double(gen.samples[k](i, j).real()) << ',' << format_double(gen.samples[k](i, j).imag());
                else
                    os << ',' << format_double(gen.samples[k](i, j));
            }
        os << '\n';
    }
    return os.str();
}

inline std::string rates_csv(const DivisibilityReport& rep) {
    std::size_t width = 0;
    for (const auto& r : rep.rate_traces) width = std::max<std::size_t>(width, static_cast<std::size_t>(r.size()));
    std::ostringstream os;
    os << 't';
    for (std::size_t k = 0; k < width; ++k) os << ",rate_" << k;
    os << '\n';
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        os << format_double(rep.times[i]);
        const auto& r = rep.rate_traces[i];
        for (std::size_t k = 0; k < width; ++k) {
            os << ',';
            if (static_cast<Eigen::Index>(k) < r.size()) os << format_double(r(static_cast<Eigen::Index>(k)));
        }
        os << '\n';
    }
    return os.str();
}

inline std::string series_csv(const std::vector<InfoSeries>& series) {
    if (series.empty()) throw ContractViolation("series_csv: nothing to write");
    std::ostringstream os;
    os << 't';
    for (const auto& s : series) os << ',' << to_string(s.measure_tag);
    os << '\n';
    for (std::size_t i = 0; i < series.front().values.size(); ++i) {
        os << format_double(series.front().grid[i]);
        for (const auto& s : series) os << ',' << format_double(s.values[i]);
        os << '\n';
    }
    return os.str();
}

inline std::string decomposition_csv(const QuantumTrajectory& traj) {
    std::ostringstream os;
    os << "t,s_hat,s_cl,s_qe\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& r = traj.states[i];
        const auto s = decompose_two_state({r(0, 0).real(), r(0, 1)});
        os << format_double(traj.grid[i]) << ',' << format_double(s.s_hat) << ',' << format_double(s.s_cl) << ','
           << format_double(s.s_qe) << '\n';
    }
    return os.str();
}

// ------------------------------ JSON ----------------------------------------

inline json to_json(const DivisibilityReport& r, bool quantum) {
    json out{{"divisible", r.divisible},
             {"min_rate", number(r.min_rate)},
             {"first_violation_time", r.first_violation_time ? number(*r.first_violation_time) : json(nullptr)},
             {"gaps", to_json(r.gaps)},
             {"max_noise_floor", number(r.max_noise_floor)},
             {"criterion", quantum ? "canonical GKSL rates >= -(tol + noise floor)" : "off-diagonal rates >= -(tol + noise floor)"}};
    if (quantum) out["max_reassembly_error"] = number(r.max_reassembly_error);
    return out;
}

inline json to_json(const DecomposedBackflow& d) {
    return {{"n_total", number(d.n_total)},
            {"n_cl", number(d.n_cl)},
            {"n_qe", number(d.n_qe)},
            {"regime", to_string(d.regime)},
            {"bound_holds", d.bound_holds},
            {"rise_intervals_coincide", d.coincidence.coincident},
            {"conflict_measure", number(d.coincidence.conflict_measure)}};
}

inline json to_json(const BackflowReport& r) {
    json measures = json::object();
    for (const auto& m : r.measures)
        measures[std::string(to_string(m.tag))] = {{"N", number(m.summary.value)},
                                                   {"tail_residual", number(m.summary.tail_residual)},
                                                   {"non_finite_points", m.summary.non_finite_points},
                                                   {"refinement_error", number(m.summary.refinement_error)}};
    json out{{"model", to_json(r.model)},
             {"measures", measures},
             {"n_total", number(r.n_total)},
             {"n_cl", number(r.n_cl)},
             {"n_qe", number(r.n_qe)},
             {"bound_holds", r.bound_holds},
             {"rise_intervals_coincide", r.coincident},
             {"regime", to_string(r.regime)},
             {"marginal", r.marginal},
             {"revival", r.revival.revival},
             {"revival_peaks", r.revival.peak_times.size()},
             {"warnings", r.warnings}};
    out["divisible"] = r.divisible ? json(*r.divisible) : json(nullptr);
    out["min_rate"] = r.min_rate ? number(*r.min_rate) : json(nullptr);
    out["first_violation_time"] = r.first_violation_time ? number(*r.first_violation_time) : json(nullptr);
    out["gaps"] = to_json(r.gaps);
    return out;
}

inline json to_json(const SweepResult& r, const SweepSummary& s) {
    json counts = json::object();
    for (auto reg : {Regime::monotone, Regime::classical_overshoot, Regime::intrinsic_revival, Regime::hybrid})
        counts[std::string(to_string(reg))] = s.regime_counts.count(reg) ? s.regime_counts.at(reg) : 0;
    json axes = json::array();
    for (const auto& a : r.spec.axes) axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"steps", a.steps}});
    json bounds = json::array();
    for (const auto& b : s.boundaries)
        bounds.push_back({{"lower", b.lower},
                          {"upper", b.upper},
                          {"midpoint", number(b.midpoint)},
                          {"from", to_string(b.from)},
                          {"to", to_string(b.to)}});
    return {{"model", to_json(r.spec.model)},
            {"axes", axes},
            {"points", r.rows.size()},
            {"failed_points", s.failed_rows},
            {"marginal_points", s.marginal_rows},
            {"regime_counts", counts},
            {"boundaries", bounds}};
}

inline json model_list_json() {
    json out = json::array();
    for (const auto& m : model_registry()) {
        json params = json::array();
        for (const auto& p : m.params) {
            json lo = std::isfinite(p.lower) ? json(p.lower) : json(nullptr);
            json hi = std::isfinite(p.upper) ? json(p.upper) : json(nullptr);
            params.push_back({{"name", p.name},
                              {"type", p.integer ? "integer" : "number"},
                              {"default", p.default_value},
                              {"minimum", lo},
                              {"maximum", hi},
                              {"exclusive_minimum", p.lower_open},
                              {"exclusive_maximum", p.upper_open},
                              {"description", p.description}});
        }
        json choices = json::array();
        for (const auto& c : m.choices)
            choices.push_back({{"name", c.name}, {"default", c.default_value}, {"options", c.options}, {"description", c.description}});
        out.push_back({{"name", m.name},
                       {"kind", m.kind == Kind::quantum ? "quantum" : "classical"},
                       {"description", m.description},
                       {"params", params},
                       {"choices", choices},
                       {"outputs", m.outputs}});
    }
    return out;
}

}  // namespace backflow::io
