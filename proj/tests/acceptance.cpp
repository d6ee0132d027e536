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

// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "backflow/backflow.hpp"
#include "test_util.hpp"

using namespace backflow;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome amplitude_damping_divisible() {
    AnalysisOptions opt;
    opt.t_max = 10.0;
    opt.measures = {MeasureTag::rel_entropy};
    const auto rep = analyze(build_model("amplitude_damping_qubit", {{"gamma", 1.0}}), opt);
    const double n = rep.measure(MeasureTag::rel_entropy)->summary.value;
    const bool div = rep.divisible.value_or(false);
    return {div && n <= 1e-6, fmt("divisible=%d N_rel=%.3e", div, n)};
}

Outcome classical_markov_kl() {
    const auto m = build_model("classical_markov", {{"n", 3}, {"rate", 1.0}});
    const auto traj = std::get<ClassicalTrajectory>(simulate(m, TimeGrid::uniform(10.0, 1e-3)));
    const auto s = series_from_trajectory(traj, MeasureTag::kl, *m.classical_reference);
    double worst = -INFINITY;
    for (std::size_t i = 0; i + 1 < s.values.size(); ++i) worst = std::max(worst, s.values[i + 1] - s.values[i]);
    const double n = backflow_functional(s);
    return {n <= 1e-6 && worst <= 1e-8, fmt("N_kl=%.3e max_increment=%.3e", n, worst)};
}

Outcome exp_kernel_divisibility() {
    const auto grid = TimeGrid::uniform(20.0, 1e-3);
    auto check = [&](double tau_m) {
        const auto m = build_model("classical_exp_kernel", {{"gamma", 1.0}, {"tau_m", tau_m}});
        const auto fam = std::get<ClassicalFamily>(model_family(m, grid));
        const auto div = check_classical_divisible(extract_tcl_generator(fam));
        const auto traj = std::get<ClassicalTrajectory>(model_trajectory(m, fam, grid));
        const double n = backflow_functional(series_from_trajectory(traj, MeasureTag::kl, *m.classical_reference));
        return std::pair{div, n};
    };
    const auto [d1, n1] = check(1.0);
    const auto [d2, n2] = check(0.05);
    const double crossing = 1.4605782808;
    const bool first = !d1.divisible && d1.first_violation_time && std::abs(*d1.first_violation_time - crossing) <= 0.05;
    const bool ok = first && n1 > 1e-3 && d2.divisible && n2 <= 1e-6;
    return {ok, fmt("tau_m=1: divisible=%d first_violation=%.5f N_kl=%.3e; tau_m=0.05: divisible=%d N_kl=%.3e", d1.divisible,
                    d1.first_violation_time.value_or(NAN), n1, d2.divisible, n2)};
}

Outcome mittag_leffler_checks() {
    const double half = mittag_leffler(0.5, -1.0);
    double worst_exp = 0.0;
    for (int i = 0; i <= 3000; ++i) {
        const double z = -30.0 * i / 3000.0;
        worst_exp = std::max(worst_exp, std::abs(mittag_leffler(1.0, z) - std::exp(z)) / std::exp(z));
    }
    bool monotone = true;
    for (double alpha : {0.3, 0.5, 0.7, 0.9, 1.0}) {
        double prev = mittag_leffler(alpha, 0.0);
        for (int i = 1; i < 1000; ++i) {
            const double v = mittag_leffler(alpha, -50.0 * i / 999.0);
            if (!(v > 0.0 && v < prev)) monotone = false;
            prev = v;
        }
    }
    const bool ok = std::abs(half - 0.4275836) <= 1e-6 && worst_exp <= 1e-12 && monotone;
    return {ok, fmt("E_0.5(-1)=%.10f exp_rel_err=%.2e monotone=%d", half, worst_exp, monotone)};
}

Outcome dephasing_rate_recovery() {
    const auto m = build_model("dephasing_qubit", {{"gamma0", 1.0}, {"a", 0.5}}, {{"f", "modulated"}});
    const auto grid = TimeGrid::uniform(10.0, 1e-3);
    const auto gen = extract_tcl_generator(build_propagator(*m.quantum_generator, grid));
    const auto rep = check_cp_divisible(gen);
    double worst = 0.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        const double t = rep.times[i];
        if (t < 0.05 - 1e-12 || t > 9.95 + 1e-12) continue;
        if (rep.rate_traces[i].size() == 0) return {false, fmt("gap at t=%.4f", t)};
        worst = std::max(worst, std::abs(rep.rate_traces[i](0) - (1.0 + 0.5 * std::sin(t))));
    }
    const bool ok = worst <= 1e-4 && rep.max_reassembly_error <= 1e-8;
    return {ok, fmt("rate_sup_err=%.3e reassembly_err=%.3e", worst, rep.max_reassembly_error)};
}

Outcome fractional_alpha_one() {
    const auto a = build_model("fractional_two_state", {{"alpha", 1.0}});
    const auto b = build_model("markov_two_state");
    double worst = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = i * 1e-3;
        worst = std::max(worst, (a.quantum_series(t).matrix() - b.quantum_series(t).matrix()).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-10, fmt("max_abs_diff=%.3e", worst)};
}

Outcome subadditivity() {
    std::vector<ModelConfig> cases;
    for (double p0 : {0.5, 0.65, 0.8}) {
        cases.push_back({"markov_two_state", {{"p0", p0}}, {}});
        for (double alpha : {0.3, 0.5, 0.9, 1.0}) cases.push_back({"fractional_two_state", {{"p0", p0}, {"alpha", alpha}}, {}});
    }
    for (const char* f : {"markov", "oscillatory", "modulated"}) cases.push_back({"dephasing_qubit", {}, {{"f", f}}});
    cases.push_back({"amplitude_damping_qubit", {}, {}});
    AnalysisOptions opt;
    opt.divisibility = false;
    opt.measures = {MeasureTag::vn_entropy};
    int checked = 0, coincident = 0;
    double worst_bound = -INFINITY, worst_sharp = 0.0;
    for (const auto& c : cases) {
        const auto rep = analyze(build_model(c), opt);
        ++checked;
        worst_bound = std::max(worst_bound, rep.n_total - (rep.n_cl + rep.n_qe));
        if (rep.coincident) {
            ++coincident;
            worst_sharp = std::max(worst_sharp, std::abs(rep.n_total - (rep.n_cl + rep.n_qe)));
        }
    }
    const bool ok = worst_bound <= 1e-8 && worst_sharp <= 1e-6;
    return {ok, fmt("trajectories=%d max(n_total-n_cl-n_qe)=%.3e coincident=%d max_sharp_gap=%.3e", checked, worst_bound,
                    coincident, worst_sharp)};
}

Outcome estimator_convergence() {
    auto n_at = [](double dt) {
        const auto g = TimeGrid::uniform(20.0, dt);
        InfoSeries s{g, {}, MeasureTag::s_qe, {}};
        for (double t : g.points()) s.values.push_back(0.25 * std::exp(-t) * std::pow(std::sin(5.0 * t), 2));
        return backflow_functional(s);
    };
    const double coarse = n_at(1e-3), fine = n_at(1e-4);
    const double analytic = 0.3953442012822864;
    const bool ok = std::abs(coarse - fine) <= 0.01 * fine && std::abs(fine - analytic) <= 0.01 * analytic;
    return {ok, fmt("N(1e-3)=%.7f N(1e-4)=%.7f analytic=%.7f", coarse, fine, analytic)};
}

Outcome phase_boundary() {
    SweepSpec spec{{"classical_exp_kernel", {{"gamma", 1.0}}, {}}, {{"gamma_tau_m", 0.05, 2.0, 20}}, {}, 2};
    spec.options.measures = {MeasureTag::kl};
    const auto a = run_sweep(spec);
    const auto b = run_sweep(spec);
    const auto sum = summarize(a);
    const double step = (2.0 - 0.05) / 19.0;
    const bool one = sum.boundaries.size() == 1 && sum.failed_rows == 0;
    const double mid = one ? sum.boundaries[0].midpoint : NAN;
    const bool identical = sweep_csv(a) == sweep_csv(b);
    const bool ok = one && std::abs(mid - 0.125) <= step && identical;
    return {ok, fmt("boundaries=%zu midpoint=%.4f step=%.4f identical_csv=%d", sum.boundaries.size(), mid, step, identical)};
}

Outcome netfd_round_trip() {
    std::mt19937_64 rng(1234);
    double worst = 0.0;
    for (int d : {2, 3})
        for (int i = 0; i < 100; ++i) {
            const auto rho = testutil::random_density(d, rng);
            worst = std::max(worst, (extended_reduced_density_of(rho).matrix() - rho.matrix()).cwiseAbs().maxCoeff());
        }
    return {worst <= 1e-10, fmt("max_abs_err=%.3e over 200 states", worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"amplitude damping is CP-divisible with no relative-entropy backflow", amplitude_damping_divisible},
        {"classical Markov chain has monotone KL divergence", classical_markov_kl},
        {"exponential kernel divisibility and KL overshoot", exp_kernel_divisibility},
        {"Mittag-Leffler accuracy, exp limit, monotonicity", mittag_leffler_checks},
        {"modulated dephasing rate recovery and GKSL reassembly", dephasing_rate_recovery},
        {"fractional two-state model reduces to Markov at alpha = 1", fractional_alpha_one},
        {"decomposed backflow subadditivity and sharp additivity", subadditivity},
        {"backflow estimator convergence", estimator_convergence},
        {"exponential kernel phase boundary and reproducibility", phase_boundary},
        {"thermo-field round trip", netfd_round_trip},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
