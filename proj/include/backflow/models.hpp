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

// models.hpp: built-in minimal models with closed forms to validate against.
//
// A model is built from a ModelConfig (name, real parameters, string
// choices). resolve_config fills defaults and rejects unknown or out-of-range
// entries, so every Model in circulation has checked parameters.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "backflow/core_types.hpp"
#include "backflow/propagation.hpp"
#include "backflow/special_functions.hpp"

namespace backflow {

// Bad model parameters, including combinations that produce a non-PSD state.
struct ParameterError : ContractViolation {
    using ContractViolation::ContractViolation;
};

struct ParamSpec {
    std::string name;
    double default_value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    bool lower_open = false;
    bool upper_open = false;
    bool integer = false;
    std::string description;

    bool admits(double v) const {
        if (!std::isfinite(v)) return false;
        if (lower_open ? !(v > lower) : !(v >= lower)) return false;
        if (upper_open ? !(v < upper) : !(v <= upper)) return false;
        return !integer || v == std::floor(v);
    }
};

struct ChoiceSpec {
    std::string name;
    std::string default_value;
    std::vector<std::string> options;
    std::string description;
};

struct ModelInfo {
    std::string name;
    Kind kind = Kind::quantum;
    std::string description;
    std::vector<ParamSpec> params;
    std::vector<ChoiceSpec> choices;
    std::vector<std::string> outputs;  // kernel, tcl_generator, embedding, closed_form_series, closed_form_propagator

    const ParamSpec* param(const std::string& n) const {
        for (const auto& p : params)
            if (p.name == n) return &p;
        return nullptr;
    }
    const ChoiceSpec* choice(const std::string& n) const {
        for (const auto& c : choices)
            if (c.name == n) return &c;
        return nullptr;
    }
};

namespace detail {
inline constexpr double inf = std::numeric_limits<double>::infinity();

inline ParamSpec positive(std::string n, double def, std::string desc) {
    return {std::move(n), def, 0.0, inf, true, false, false, std::move(desc)};
}
inline ParamSpec unit(std::string n, double def, std::string desc) {
    return {std::move(n), def, 0.0, 1.0, false, false, false, std::move(desc)};
}
inline ParamSpec order(double def = 0.5) {
    return {"alpha", def, 0.0, 1.0, true, false, false, "fractional order in (0, 1]"};
}
}  // namespace detail

inline const std::vector<ModelInfo>& model_registry() {
    using detail::positive;
    using detail::unit;
    static const std::vector<ModelInfo> reg = {
        {"markov_two_state",
         Kind::quantum,
         "qubit with exponential population relaxation and coherence 1/2 e^{-lambda t} sin(omega t)",
         {positive("lambda", 1.0, "decay rate"), positive("omega", 5.0, "oscillation frequency"),
          unit("p0", 0.8, "initial population of |0>"), unit("p_eq", 0.5, "equilibrium population of |0>")},
         {},
         {"closed_form_series"}},
        {"fractional_two_state",
         Kind::quantum,
         "markov_two_state with the exponential envelope replaced by E_alpha(-(lambda t)^alpha)",
         {detail::order(), positive("lambda", 1.0, "decay rate"), positive("omega", 5.0, "oscillation frequency"),
          unit("p0", 0.8, "initial population of |0>"), unit("p_eq", 0.5, "equilibrium population of |0>")},
         {},
         {"closed_form_series"}},
        {"classical_exp_kernel",
         Kind::classical,
         "n-state chain with kernel (gamma/tau_m) e^{-tau/tau_m} W, W symmetric with off-diagonal rate `rate`",
         {{"n", 2, 2, max_classical_dim / 2, false, false, true, "number of states"},
          positive("gamma", 1.0, "coupling"), positive("tau_m", 1.0, "memory time"),
          positive("rate", 1.0, "off-diagonal rate of W")},
         {{"route", "embedding", {"embedding", "volterra", "closed_form"}, "how the propagator is computed"}},
         {"kernel", "embedding", "closed_form_propagator"}},
        {"classical_fractional",
         Kind::classical,
         "symmetric two-state chain whose population difference relaxes as E_alpha(-(gamma t)^alpha)",
         {{"n", 2, 2, max_classical_dim, false, false, true, "number of states (closed form exists for 2 only)"},
          positive("gamma", 1.0, "relaxation rate"), detail::order()},
         {},
         {"closed_form_propagator"}},
        {"dephasing_qubit",
         Kind::quantum,
         "pure dephasing with jump sigma_z/sqrt(2) and rate -f'/f for a decoherence function f",
         {positive("lambda", 1.0, "decay rate of f"), positive("mu", 2.0, "oscillation frequency (oscillatory f)"),
          positive("gamma0", 1.0, "mean rate (modulated f)"),
          {"a", 0.5, -detail::inf, detail::inf, false, false, false, "modulation amplitude, rate gamma0 + a sin t"}},
         {{"f", "markov", {"markov", "oscillatory", "modulated"},
           "markov: e^{-lambda t}; oscillatory: e^{-lambda t/2} cos(mu t); modulated: exp(-gamma0 t - a(1 - cos t))"}},
         {"tcl_generator", "closed_form_propagator"}},
        {"amplitude_damping_qubit",
         Kind::quantum,
         "constant-rate thermal amplitude damping; decay gamma(n_th + 1), excitation gamma n_th",
         {positive("gamma", 1.0, "damping rate"),
          {"n_th", 0.5, 0.0, detail::inf, false, false, false, "thermal occupation"},
          {"omega0", 1.0, -detail::inf, detail::inf, false, false, false, "level splitting"}},
         {},
         {"tcl_generator"}},
        {"classical_markov",
         Kind::classical,
         "time-independent symmetric rate matrix on n states",
         {{"n", 3, 2, max_classical_dim, false, false, true, "number of states"},
          positive("rate", 1.0, "off-diagonal rate")},
         {},
         {"tcl_generator"}},
    };
    return reg;
}

inline const ModelInfo& model_info(const std::string& name) {
    for (const auto& m : model_registry())
        if (m.name == name) return m;
    throw ParameterError("unknown model '" + name + "'");
}

struct ModelConfig {
    std::string name;
    std::map<std::string, double> params;
    std::map<std::string, std::string> choices;
};

// Defaults filled in, unknown keys and out-of-range values rejected.
inline ModelConfig resolve_config(const ModelConfig& in) {
    const ModelInfo& info = model_info(in.name);
    ModelConfig out{in.name, {}, {}};
    for (const auto& [k, v] : in.params) {
        const ParamSpec* spec = info.param(k);
        if (!spec) throw ParameterError(in.name + ": unknown parameter '" + k + "'");
        if (!spec->admits(v)) throw ParameterError(in.name + ": parameter " + k + " = " + std::to_string(v) + " out of range");
    }
    for (const auto& [k, v] : in.choices) {
        const ChoiceSpec* spec = info.choice(k);
        if (!spec) throw ParameterError(in.name + ": unknown option '" + k + "'");
        if (std::find(spec->options.begin(), spec->options.end(), v) == spec->options.end())
            throw ParameterError(in.name + ": option " + k + " = '" + v + "' is not one of the allowed values");
    }
    for (const auto& p : info.params) out.params[p.name] = in.params.count(p.name) ? in.params.at(p.name) : p.default_value;
    for (const auto& c : info.choices) out.choices[c.name] = in.choices.count(c.name) ? in.choices.at(c.name) : c.default_value;
    return out;
}

// Sets one lattice coordinate. Besides plain parameters, "gamma_tau_m" sets
// tau_m = value / gamma so sweeps can run along the product.
inline void set_axis(ModelConfig& cfg, const std::string& axis, double value) {
    const ModelInfo& info = model_info(cfg.name);
    if (info.param(axis)) {
        cfg.params[axis] = value;
        return;
    }
    if (axis == "gamma_tau_m" && info.param("gamma") && info.param("tau_m")) {
        const double g = cfg.params.count("gamma") ? cfg.params.at("gamma") : info.param("gamma")->default_value;
        cfg.params["tau_m"] = value / g;
        return;
    }
    throw ParameterError(cfg.name + ": no parameter or derived axis named '" + axis + "'");
}

enum class Propagation { closed_form_series, closed_form_propagator, generator, kernel, embedding };

struct Model {
    ModelConfig config;
    Kind kind = Kind::quantum;
    int dim = 0;  // Hilbert dimension or number of classical states
    Propagation propagation = Propagation::generator;

    // quantum
    std::optional<DensityMatrix> quantum_initial;
    std::optional<DensityMatrix> quantum_pair;       // second initial state for pair distances
    std::optional<DensityMatrix> quantum_reference;  // invariant state
    std::optional<QuantumGenerator> quantum_generator;
    std::function<MatrixXc(double)> quantum_propagator;
    std::function<DensityMatrix(double)> quantum_series;

    // classical
    std::optional<ProbabilityVector> classical_initial;
    std::optional<ProbabilityVector> classical_pair;
    std::optional<ProbabilityVector> classical_reference;
    std::optional<ClassicalGenerator> classical_generator;
    std::optional<ClassicalKernel> classical_kernel;
    std::optional<MarkovEmbedding> embedding;
    std::function<MatrixXr(double)> classical_propagator;

    static Model make(ModelConfig cfg, Kind kind, int dim, Propagation prop) {
        Model m;
        m.config = std::move(cfg);
        m.kind = kind;
        m.dim = dim;
        m.propagation = prop;
        return m;
    }

    double param(const std::string& n) const { return config.params.at(n); }
    const std::string& choice(const std::string& n) const { return config.choices.at(n); }
};

// ------------------------------ two-state series ----------------------------

// Envelope e(t): p(t) = p_eq + (p0 - p_eq) e(t), b_qe(t) = 1/4 e(t)^2 sin^2(omega t).
struct TwoStateSeries {
    std::function<double(double)> envelope;
    double omega = 1.0;
    double p0 = 0.5;
    double p_eq = 0.5;

    double p(double t) const { return p_eq + (p0 - p_eq) * envelope(t); }
    double coherence(double t) const { return 0.5 * envelope(t) * std::sin(omega * t); }
    double b_qe(double t) const {
        const double c = coherence(t);
        return c * c;
    }

    DensityMatrix state(double t) const {
        const double pt = p(t);
        const double c = coherence(t);
        if (c * c > pt * (1.0 - pt) + 1e-12)
            throw ParameterError("two-state model: b_qe = " + std::to_string(c * c) + " exceeds p(1-p) = " +
                                 std::to_string(pt * (1.0 - pt)) + " at t = " + std::to_string(t) +
                                 "; the parameters do not give a positive state");
        MatrixXc m(2, 2);
        m << pt, c, c, 1.0 - pt;
        return DensityMatrix(m);
    }
};

inline TwoStateSeries markov_two_state_series(double lambda, double omega, double p0, double p_eq) {
    return {[lambda](double t) { return std::exp(-lambda * t); }, omega, p0, p_eq};
}

inline TwoStateSeries fractional_two_state_series(double alpha, double lambda, double omega, double p0, double p_eq) {
    if (alpha == 1.0) return markov_two_state_series(lambda, omega, p0, p_eq);
    auto ml = detail::cached_ml(alpha);
    return {[ml, lambda, alpha](double t) { return t == 0.0 ? 1.0 : (*ml)(-std::pow(lambda * t, alpha)); }, omega, p0,
            p_eq};
}

// ------------------------------ classical pieces ----------------------------

// Projector onto the uniform distribution, the invariant of a symmetric W.
inline MatrixXr uniform_projector(int n) { return MatrixXr::Constant(n, n, 1.0 / n); }

// Relaxation factor of the non-uniform modes for the exponential kernel:
// f'' + f'/tau_m + (gamma kappa / tau_m) f = 0, f(0) = 1, f'(0) = 0, where
// -kappa is the non-zero eigenvalue of W (kappa = n * rate).
inline double exp_kernel_mode(double gamma, double tau_m, double kappa, double t) {
    const double a = 0.5 / tau_m;
    const double disc = a * a - gamma * kappa / tau_m;
    if (disc < 0.0) {
        const double w = std::sqrt(-disc);
        return std::exp(-a * t) * (std::cos(w * t) + a / w * std::sin(w * t));
    }
    if (disc == 0.0) return std::exp(-a * t) * (1.0 + a * t);
    const double r = std::sqrt(disc);
    const double s1 = -a + r, s2 = -a - r;
    return (s1 * std::exp(s2 * t) - s2 * std::exp(s1 * t)) / (s1 - s2);
}

inline MarkovEmbedding embed_exponential_kernel(const RateMatrix& w, double gamma, double tau_m) {
    const int n = w.dim();
    MatrixXr a = MatrixXr::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n).setIdentity();
    a.bottomLeftCorner(n, n) = (gamma / tau_m) * w.matrix();
    a.bottomRightCorner(n, n) = -MatrixXr::Identity(n, n) / tau_m;
    return {n, a};
}

// ------------------------------ builders ------------------------------------

namespace detail {

inline Model build_two_state(const ModelConfig& cfg, const TwoStateSeries& s) {
    Model m = Model::make(cfg, Kind::quantum, 2, Propagation::closed_form_series);
    m.quantum_initial = s.state(0.0);
    m.quantum_series = [s](double t) { return s.state(t); };
    return m;
}

inline Model build_classical_exp_kernel(const ModelConfig& cfg) {
    const int n = static_cast<int>(cfg.params.at("n"));
    const double gamma = cfg.params.at("gamma"), tau_m = cfg.params.at("tau_m"), rate = cfg.params.at("rate");
    const RateMatrix w = RateMatrix::symmetric(n, rate);
    const std::string& route = cfg.choices.at("route");
    Model m = Model::make(cfg, Kind::classical, n,
            route == "volterra"    ? Propagation::kernel
            : route == "embedding" ? Propagation::embedding
                                   : Propagation::closed_form_propagator);
    const MatrixXr wm = w.matrix();
    m.classical_kernel = ClassicalKernel{n, [wm, gamma, tau_m](double tau) -> MatrixXr {
                                             return (gamma / tau_m) * std::exp(-tau / tau_m) * wm;
                                         },
                                         tau_m};
    m.embedding = embed_exponential_kernel(w, gamma, tau_m);
    const double kappa = n * rate;
    m.classical_propagator = [n, gamma, tau_m, kappa](double t) -> MatrixXr {
        const MatrixXr pi = uniform_projector(n);
        return pi + exp_kernel_mode(gamma, tau_m, kappa, t) * (MatrixXr::Identity(n, n) - pi);
    };
    m.classical_initial = ProbabilityVector::basis(n, 0);
    m.classical_pair = ProbabilityVector::basis(n, 1);
    m.classical_reference = ProbabilityVector::uniform(n);
    return m;
}

inline Model build_classical_fractional(const ModelConfig& cfg) {
    const int n = static_cast<int>(cfg.params.at("n"));
    if (n != 2) throw ParameterError("classical_fractional: closed form is available for n = 2 only");
    const double gamma = cfg.params.at("gamma"), alpha = cfg.params.at("alpha");
    Model m = Model::make(cfg, Kind::classical, 2, Propagation::closed_form_propagator);
    m.classical_propagator = [gamma, alpha](double t) -> MatrixXr {
        const MatrixXr pi = uniform_projector(2);
        return pi + ml_envelope(alpha, gamma, t) * (MatrixXr::Identity(2, 2) - pi);
    };
    m.classical_initial = ProbabilityVector::basis(2, 0);
    m.classical_pair = ProbabilityVector::basis(2, 1);
    m.classical_reference = ProbabilityVector::uniform(2);
    return m;
}

// L(t) rho = gamma(t) (J rho J - rho / 2) with J = sigma_z / sqrt(2), which
// multiplies the coherences by exactly f(t).
inline Model build_dephasing(const ModelConfig& cfg) {
    const std::string& kind = cfg.choices.at("f");
    const double lambda = cfg.params.at("lambda"), mu = cfg.params.at("mu");
    const double g0 = cfg.params.at("gamma0"), a = cfg.params.at("a");
    std::function<double(double)> f, rate;
    if (kind == "markov") {
        f = [lambda](double t) { return std::exp(-lambda * t); };
        rate = [lambda](double) { return lambda; };
    } else if (kind == "oscillatory") {
        f = [lambda, mu](double t) { return std::exp(-0.5 * lambda * t) * std::cos(mu * t); };
        // -f'/f; infinite where cos(mu t) = 0.
        rate = [lambda, mu](double t) {
            const double c = std::cos(mu * t);
            return c == 0.0 ? std::numeric_limits<double>::infinity() : 0.5 * lambda + mu * std::sin(mu * t) / c;
        };
    } else {
        f = [g0, a](double t) { return std::exp(-g0 * t - a * (1.0 - std::cos(t))); };
        rate = [g0, a](double t) { return g0 + a * std::sin(t); };
    }
    Model m = Model::make(cfg, Kind::quantum, 2, Propagation::closed_form_propagator);
    const MatrixXc jump = ops::sigma_z() / std::numbers::sqrt2;
    const MatrixXc zero = MatrixXc::Zero(2, 2);
    const MatrixXc unit_dephasing = ops::gksl_superoperator(zero, {jump}, {1.0});
    m.quantum_generator = QuantumGenerator{4, [unit_dephasing, rate](double t) -> MatrixXc {
                                               const double g = rate(t);
                                               if (!std::isfinite(g))
                                                   return MatrixXc::Constant(4, 4, std::numeric_limits<double>::quiet_NaN());
                                               return g * unit_dephasing;
                                           }};
    // vec order (00, 10, 01, 11): coherences sit at indices 1 and 2.
    m.quantum_propagator = [f](double t) -> MatrixXc {
        MatrixXc phi = MatrixXc::Identity(4, 4);
        phi(1, 1) = phi(2, 2) = f(t);
        return phi;
    };
    m.quantum_initial = DensityMatrix::pure((VectorXc(2) << 1.0, 1.0).finished());
    m.quantum_pair = DensityMatrix::pure((VectorXc(2) << 1.0, -1.0).finished());
    m.quantum_reference = DensityMatrix::maximally_mixed(2);
    return m;
}

// |0> is the ground state. Stationary populations ((n+1), n) / (2n+1).
inline Model build_amplitude_damping(const ModelConfig& cfg) {
    const double gamma = cfg.params.at("gamma"), nth = cfg.params.at("n_th"), w0 = cfg.params.at("omega0");
    const MatrixXc h = -0.5 * w0 * ops::sigma_z();
    const MatrixXc g = ops::gksl_superoperator(h, {ops::sigma_minus(), ops::sigma_plus()}, {gamma * (nth + 1.0), gamma * nth});
    Model m = Model::make(cfg, Kind::quantum, 2, Propagation::generator);
    m.quantum_generator = QuantumGenerator{4, [g](double) { return g; }};
    m.quantum_initial = DensityMatrix::pure((VectorXc(2) << 1.0, 1.0).finished());
    m.quantum_pair = DensityMatrix::pure(ops::ket(2, 1));
    MatrixXc sigma = MatrixXc::Zero(2, 2);
    sigma(0, 0) = (nth + 1.0) / (2.0 * nth + 1.0);
    sigma(1, 1) = nth / (2.0 * nth + 1.0);
    m.quantum_reference = DensityMatrix(sigma);
    return m;
}

inline Model build_classical_markov(const ModelConfig& cfg) {
    const int n = static_cast<int>(cfg.params.at("n"));
    const MatrixXr w = RateMatrix::symmetric(n, cfg.params.at("rate")).matrix();
    Model m = Model::make(cfg, Kind::classical, n, Propagation::generator);
    m.classical_generator = ClassicalGenerator{n, [w](double) { return w; }};
    m.classical_initial = ProbabilityVector::basis(n, 0);
    m.classical_pair = ProbabilityVector::basis(n, 1);
    m.classical_reference = ProbabilityVector::uniform(n);
    return m;
}

}  // namespace detail

inline Model build_model(const ModelConfig& raw) {
    const ModelConfig cfg = resolve_config(raw);
    const auto& p = cfg.params;
    if (cfg.name == "markov_two_state")
        return detail::build_two_state(cfg, markov_two_state_series(p.at("lambda"), p.at("omega"), p.at("p0"), p.at("p_eq")));
    if (cfg.name == "fractional_two_state")
        return detail::build_two_state(
            cfg, fractional_two_state_series(p.at("alpha"), p.at("lambda"), p.at("omega"), p.at("p0"), p.at("p_eq")));
    if (cfg.name == "classical_exp_kernel") return detail::build_classical_exp_kernel(cfg);
    if (cfg.name == "classical_fractional") return detail::build_classical_fractional(cfg);
    if (cfg.name == "dephasing_qubit") return detail::build_dephasing(cfg);
    if (cfg.name == "amplitude_damping_qubit") return detail::build_amplitude_damping(cfg);
    if (cfg.name == "classical_markov") return detail::build_classical_markov(cfg);
    throw ParameterError("unknown model '" + cfg.name + "'");
}

inline Model build_model(const std::string& name, std::map<std::string, double> params = {},
                         std::map<std::string, std::string> choices = {}) {
    return build_model(ModelConfig{name, std::move(params), std::move(choices)});
}

}  // namespace backflow
