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
#include <numbers>

#include "backflow/backflow.hpp"

using namespace backflow;

namespace {

InfoSeries sampled(double t_max, double dt, const std::function<double(double)>& f) {
    const auto g = TimeGrid::uniform(t_max, dt);
    InfoSeries s{g, {}, MeasureTag::s_qe, {}};
    for (double t : g.points()) s.values.push_back(f(t));
    return s;
}

AnalysisOptions short_run(double t_max = 5.0) {
    AnalysisOptions o;
    o.t_max = t_max;
    return o;
}

}  // namespace

TEST(Classify, Regimes) {
    EXPECT_EQ(classify(0.0, 0.0), Regime::monotone);
    EXPECT_EQ(classify(1e-7, 5e-7), Regime::monotone);
    EXPECT_EQ(classify(0.1, 0.0), Regime::classical_overshoot);
    EXPECT_EQ(classify(0.0, 0.1), Regime::intrinsic_revival);
    EXPECT_EQ(classify(0.1, 0.2), Regime::hybrid);
    EXPECT_EQ(classify(0.1, 0.2, 0.5), Regime::monotone);
}

TEST(Classify, RejectsInvalidInput) {
    EXPECT_THROW(classify(-1e-3, 0.0), ContractViolation);
    EXPECT_THROW(classify(0.0, std::nan("")), ContractViolation);
}

TEST(Classify, StringRoundTrip) {
    for (auto r : {Regime::monotone, Regime::classical_overshoot, Regime::intrinsic_revival, Regime::hybrid})
        EXPECT_EQ(regime_from_string(to_string(r)), r);
    EXPECT_FALSE(regime_from_string("chaotic"));
}

TEST(Revival, DecayingPeaksAreNotRevivals) {
    const auto r = revival_detector(sampled(20.0, 1e-3, [](double t) { return std::exp(-t) * std::pow(std::sin(t), 2); }));
    EXPECT_FALSE(r.revival);
    EXPECT_GE(r.peak_times.size(), 5u);
    for (std::size_t i = 1; i < r.peak_values.size(); ++i) EXPECT_LT(r.peak_values[i], r.peak_values[i - 1]);
}

TEST(Revival, GrowingPeakIsRevival) {
    const auto r = revival_detector(sampled(20.0, 1e-3, [](double t) { return (1.0 + 0.1 * t) * std::pow(std::sin(t), 2); }));
    EXPECT_TRUE(r.revival);
}

TEST(Revival, MonotoneSeriesHasNoPeaks) {
    const auto r = revival_detector(sampled(5.0, 1e-2, [](double t) { return -t; }));
    EXPECT_TRUE(r.peak_times.empty());
    EXPECT_FALSE(r.revival);
}

TEST(Analyze, AmplitudeDampingIsDivisibleWithoutBackflow) {
    AnalysisOptions opt;
    opt.t_max = 10.0;
    const auto rep = analyze(build_model("amplitude_damping_qubit"), opt);
    ASSERT_TRUE(rep.divisible.has_value());
    EXPECT_TRUE(*rep.divisible);
    EXPECT_LE(rep.measure(MeasureTag::rel_entropy)->summary.value, 1e-6);
    EXPECT_LE(rep.measure(MeasureTag::trace_distance)->summary.value, 1e-9);
}

TEST(Analyze, MarkovTwoStateEquilibriumStartIsIntrinsic) {
    const auto rep = analyze(build_model("markov_two_state", {{"p0", 0.5}}), AnalysisOptions{});
    EXPECT_FALSE(rep.divisible.has_value());
    EXPECT_EQ(rep.n_cl, 0.0);
    EXPECT_NEAR(rep.n_qe, 0.42443, 1e-4);
    EXPECT_EQ(rep.regime, Regime::intrinsic_revival);
    EXPECT_TRUE(rep.bound_holds);
    EXPECT_FALSE(rep.revival.revival);
}

TEST(Analyze, TwoStateDecompositionValues) {
    struct Case {
        const char* model;
        double p0, n_total, n_cl, n_qe;
    };
    for (const auto& c : {Case{"markov_two_state", 0.8, 0.54819, 0.19274, 0.46441},
                          Case{"fractional_two_state", 0.5, 0.87048, 0.0, 0.87048},
                          Case{"fractional_two_state", 0.8, 0.98520, 0.19001, 0.88832}}) {
        const auto rep = analyze(build_model(c.model, {{"p0", c.p0}}), AnalysisOptions{});
        EXPECT_NEAR(rep.n_total, c.n_total, 1e-4) << c.model << " p0=" << c.p0;
        EXPECT_NEAR(rep.n_cl, c.n_cl, 1e-4) << c.model << " p0=" << c.p0;
        EXPECT_NEAR(rep.n_qe, c.n_qe, 1e-4) << c.model << " p0=" << c.p0;
        EXPECT_TRUE(rep.bound_holds);
    }
}

TEST(Analyze, FractionalMemoryIncreasesIntrinsicBackflow) {
    const auto half = analyze(build_model("fractional_two_state", {{"alpha", 0.5}}), AnalysisOptions{});
    const auto one = analyze(build_model("fractional_two_state", {{"alpha", 1.0}}), AnalysisOptions{});
    EXPECT_GT(half.n_qe, one.n_qe);
}

TEST(Analyze, UnderdampedKernelOvershoots) {
    const auto rep = analyze(build_model("classical_exp_kernel"), short_run(10.0));
    ASSERT_TRUE(rep.divisible.has_value());
    EXPECT_FALSE(*rep.divisible);
    ASSERT_TRUE(rep.first_violation_time.has_value());
    EXPECT_NEAR(*rep.first_violation_time, 1.4605782808, 0.05);
    EXPECT_GT(rep.measure(MeasureTag::kl)->summary.value, 1e-3);
    EXPECT_EQ(rep.regime, Regime::classical_overshoot);
    EXPECT_EQ(rep.n_qe, 0.0);
    EXPECT_FALSE(rep.marginal);
}

TEST(Analyze, ClassicalMarkovMonotone) {
    const auto rep = analyze(build_model("classical_markov"), short_run());
    EXPECT_TRUE(rep.divisible.value_or(false));
    EXPECT_EQ(rep.regime, Regime::monotone);
    EXPECT_TRUE(rep.warnings.empty());
}

TEST(Analyze, VolterraRouteCarriesStepWarning) {
    AnalysisOptions opt = short_run(1.0);
    opt.dt = 0.05;
    opt.divisibility = false;
    const auto rep = analyze(build_model("classical_exp_kernel", {{"tau_m", 0.05}}, {{"route", "volterra"}}), opt);
    EXPECT_FALSE(rep.warnings.empty());
}

TEST(Sweep, Lattice) {
    SweepSpec spec{{"classical_exp_kernel", {}, {}}, {{"gamma_tau_m", 0.0, 1.0, 3}, {"rate", 1.0, 2.0, 2}}, {}, 1};
    EXPECT_EQ(spec.size(), 6u);
    EXPECT_EQ(spec.coordinates(0), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(spec.coordinates(1), (std::vector<double>{0.0, 2.0}));
    EXPECT_EQ(spec.coordinates(5), (std::vector<double>{1.0, 2.0}));
    EXPECT_THROW(spec.validate(), ParameterError);  // tau_m = 0 at the lower corner
}

TEST(Sweep, SinglePointMarkov) {
    SweepSpec spec{{"classical_markov", {}, {}}, {{"rate", 1.0, 1.0, 1}}, short_run(), 1};
    const auto res = run_sweep(spec);
    ASSERT_EQ(res.rows.size(), 1u);
    ASSERT_TRUE(res.rows[0].report);
    EXPECT_EQ(res.rows[0].report->regime, Regime::monotone);
}

TEST(Sweep, ExpKernelBoundaryAndDeterminism) {
    SweepSpec spec{{"classical_exp_kernel", {}, {}}, {{"gamma_tau_m", 0.05, 2.0, 20}}, short_run(20.0), 3};
    spec.options.measures = {MeasureTag::kl};
    const auto a = run_sweep(spec);
    const auto s = summarize(a);
    EXPECT_EQ(s.failed_rows, 0u);
    ASSERT_EQ(s.boundaries.size(), 1u);
    EXPECT_EQ(s.boundaries[0].from, Regime::monotone);
    EXPECT_EQ(s.boundaries[0].to, Regime::classical_overshoot);
    const double step = (2.0 - 0.05) / 19;
    EXPECT_LE(std::abs(s.boundaries[0].midpoint - 0.125), step);
    spec.threads = 1;
    EXPECT_EQ(sweep_csv(a), sweep_csv(run_sweep(spec)));
}

TEST(Sweep, RowErrorsAreRecorded) {
    SweepSpec spec{{"markov_two_state", {{"p_eq", 1.0}}, {}}, {{"p0", 0.9, 1.0, 2}}, short_run(), 2};
    const auto res = run_sweep(spec);
    const auto s = summarize(res);
    EXPECT_EQ(s.failed_rows, 2u);
    for (const auto& row : res.rows) EXPECT_NE(row.error.find("p(1-p)"), std::string::npos);
    const auto csv = sweep_csv(res);
    EXPECT_NE(csv.find("p(1-p)"), std::string::npos);
}

TEST(Sweep, CsvShape) {
    SweepSpec spec{{"classical_markov", {}, {}}, {{"rate", 0.5, 1.0, 2}, {"n", 2, 3, 2}}, short_run(2.0), 2};
    const auto csv = sweep_csv(run_sweep(spec));
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    const auto header_fields = std::count(line.begin(), line.end(), ',');
    EXPECT_EQ(line.substr(0, 13), "index,rate,n,");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), header_fields);
    }
    EXPECT_EQ(rows, 4);
}

TEST(Format, Doubles) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("plain"), "plain");
}
