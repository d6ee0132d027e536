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

// backflow-lab: command-line front end.
//
//   backflow-lab simulate      --config run.json --out DIR
//   backflow-lab extract       ...
//   backflow-lab divisibility  ...
//   backflow-lab backflow      ...
//   backflow-lab phase-diagram ...
//   backflow-lab model list
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "backflow/backflow.hpp"
#include "backflow/io.hpp"

using namespace backflow;
using nlohmann::json;

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct ConfigError : ContractViolation {
    using ContractViolation::ContractViolation;
};

struct RunConfig {
    ModelConfig model;
    AnalysisOptions options;
    std::vector<SweepAxis> axes;
    int threads = 1;
    std::filesystem::path out = "out";
};

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

double need_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

// Parses a dotted override "a.b.c=value". The value is read as JSON when it
// parses, otherwise as a string.
void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &root;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].empty()) throw ConfigError("--set: empty path component in '" + path + "'");
        if (!node->is_object()) {
            if (!node->is_null()) throw ConfigError("--set: '" + path + "' descends into a non-object");
            *node = json::object();
        }
        node = &(*node)[parts[i]];
    }
    *node = std::move(value);
}

RunConfig parse_config(const json& root) {
    reject_unknown(root, "", {"model", "grid", "analysis", "sweep", "threads", "out"});
    RunConfig rc;
    if (!root.contains("model")) throw ConfigError("missing 'model' section");
    const json& m = root["model"];
    if (m.is_string()) {
        rc.model.name = m.get<std::string>();
    } else {
        reject_unknown(m, "model", {"name", "params", "choices"});
        if (!m.contains("name") || !m["name"].is_string()) throw ConfigError("model.name must be a string");
        rc.model.name = m["name"].get<std::string>();
    }
    if (m.is_object() && m.contains("params")) {
        if (!m["params"].is_object()) throw ConfigError("model.params must be an object");
        for (const auto& [k, v] : m["params"].items()) rc.model.params[k] = need_number(v, "model.params." + k);
    }
    if (m.is_object() && m.contains("choices")) {
        if (!m["choices"].is_object()) throw ConfigError("model.choices must be an object");
        for (const auto& [k, v] : m["choices"].items()) {
            if (!v.is_string()) throw ConfigError("model.choices." + k + " must be a string");
            rc.model.choices[k] = v.get<std::string>();
        }
    }
    resolve_config(rc.model);

    if (root.contains("grid")) {
        const json& g = root["grid"];
        reject_unknown(g, "grid", {"dt", "t_max"});
        if (g.contains("dt")) rc.options.dt = need_number(g["dt"], "grid.dt");
        if (g.contains("t_max")) rc.options.t_max = need_number(g["t_max"], "grid.t_max");
    }
    if (root.contains("analysis")) {
        const json& a = root["analysis"];
        reject_unknown(a, "analysis", {"measures", "epsilon_n", "rate_tolerance", "condition_limit", "divisibility"});
        if (a.contains("measures")) {
            if (!a["measures"].is_array()) throw ConfigError("analysis.measures must be an array");
            for (const auto& v : a["measures"]) {
                const auto tag = v.is_string() ? measure_from_string(v.get<std::string>()) : std::nullopt;
                if (!tag) throw ConfigError("analysis.measures: unknown measure " + v.dump());
                rc.options.measures.push_back(*tag);
            }
        }
        if (a.contains("epsilon_n")) rc.options.epsilon_n = need_number(a["epsilon_n"], "analysis.epsilon_n");
        if (a.contains("rate_tolerance")) rc.options.rate_tolerance = need_number(a["rate_tolerance"], "analysis.rate_tolerance");
        if (a.contains("condition_limit"))
            rc.options.condition_limit = need_number(a["condition_limit"], "analysis.condition_limit");
        if (a.contains("divisibility")) {
            if (!a["divisibility"].is_boolean()) throw ConfigError("analysis.divisibility must be true or false");
            rc.options.divisibility = a["divisibility"].get<bool>();
        }
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        reject_unknown(s, "sweep", {"axes"});
        if (!s.contains("axes") || !s["axes"].is_array()) throw ConfigError("sweep.axes must be an array");
        for (const auto& ax : s["axes"]) {
            reject_unknown(ax, "sweep.axes[]", {"name", "min", "max", "steps"});
            if (!ax.contains("name") || !ax["name"].is_string()) throw ConfigError("sweep axis needs a string 'name'");
            if (!ax.contains("steps") || !ax["steps"].is_number_integer()) throw ConfigError("sweep axis needs an integer 'steps'");
            SweepAxis axis{ax["name"].get<std::string>(), need_number(ax.value("min", json()), "sweep axis min"),
                           need_number(ax.value("max", json()), "sweep axis max"), ax["steps"].get<int>()};
            rc.axes.push_back(std::move(axis));
        }
    }
    if (root.contains("threads")) {
        if (!root["threads"].is_number_integer() || root["threads"].get<int>() < 1)
            throw ConfigError("threads must be a positive integer");
        rc.threads = root["threads"].get<int>();
    }
    if (root.contains("out")) {
        if (!root["out"].is_string()) throw ConfigError("out must be a string");
        rc.out = root["out"].get<std::string>();
    }
    if (!(rc.options.dt > 0.0) || !(rc.options.t_max >= rc.options.dt))
        throw ConfigError("grid: need 0 < dt <= t_max");
    if (!(rc.options.epsilon_n >= 0.0) || !(rc.options.rate_tolerance >= 0.0) || !(rc.options.condition_limit > 1.0))
        throw ConfigError("analysis: thresholds must be non-negative and condition_limit > 1");
    return rc;
}

struct CommonFlags {
    std::string config_path;
    std::string model;
    std::vector<std::string> sets;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<double> dt;
    std::optional<double> t_max;
};

RunConfig load(const CommonFlags& f) {
    json root = json::object();
    if (!f.config_path.empty()) {
        std::ifstream is(f.config_path);
        if (!is) throw ConfigError("cannot read config file " + f.config_path);
        root = json::parse(is, nullptr, false);
        if (root.is_discarded()) throw ConfigError("config file " + f.config_path + " is not valid JSON");
    }
    if (!f.model.empty()) apply_override(root, "model.name=\"" + f.model + "\"");
    for (const auto& s : f.sets) apply_override(root, s);
    if (f.dt) root["grid"]["dt"] = *f.dt;
    if (f.t_max) root["grid"]["t_max"] = *f.t_max;
    if (f.threads) root["threads"] = *f.threads;
    if (f.out) root["out"] = *f.out;
    return parse_config(root);
}

void write(const RunConfig& rc, const std::string& name, const std::string& content) {
    io::write_file_atomic(rc.out / name, content);
    std::cout << (rc.out / name).string() << '\n';
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json grid_json(const AnalysisOptions& o) { return {{"dt", o.dt}, {"t_max", o.t_max}}; }

// ------------------------------ commands ------------------------------------

template <class Traj>
json validation_json(const Traj& traj) {
    double worst_trace = 0.0, min_eig = INFINITY;
    for (const auto& s : traj.states) {
        if constexpr (std::is_same_v<Traj, QuantumTrajectory>) {
            worst_trace = std::max(worst_trace, std::abs(s.matrix().trace().real() - 1.0));
            min_eig = std::min(min_eig, hermitian_eig(s.matrix()).values.minCoeff());
        } else {
            worst_trace = std::max(worst_trace, std::abs(s.vector().sum() - 1.0));
            min_eig = std::min(min_eig, s.vector().minCoeff());
        }
    }
    return {{"rows", traj.size()},
            {"max_normalisation_error", io::number(worst_trace)},
            {"min_eigenvalue", io::number(min_eig)},
            {"warnings", traj.warnings}};
}

int cmd_simulate(const RunConfig& rc) {
    const Model m = build_model(rc.model);
    const auto grid = rc.options.grid();
    const auto traj = simulate(m, grid);
    std::visit(
        [&](const auto& t) {
            write(rc, "trajectory.csv", io::trajectory_csv(t));
            write(rc, "simulate.json",
                  dump({{"model", io::to_json(m.config)}, {"grid", grid_json(rc.options)}, {"validation", validation_json(t)}}));
        },
        traj);
    return 0;
}

AnyFamily family_or_fail(const Model& m, const TimeGrid& grid) {
    AnyFamily fam = model_family(m, grid);
    if (std::holds_alternative<std::monostate>(fam))
        throw ConfigError("model " + m.config.name + " is given as a closed-form series and has no propagator to extract from");
    return fam;
}

int cmd_extract(const RunConfig& rc) {
    const Model m = build_model(rc.model);
    const auto grid = rc.options.grid();
    const AnyFamily fam = family_or_fail(m, grid);
    std::visit(
        [&](const auto& f) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(f)>, std::monostate>) {
                const auto gen = extract_tcl_generator(f, rc.options.condition_limit);
                write(rc, "generator.csv", io::generator_csv(gen));
                write(rc, "gaps.json",
                      dump({{"model", io::to_json(m.config)},
                            {"grid", grid_json(rc.options)},
                            {"condition_limit", rc.options.condition_limit},
                            {"gaps", io::to_json(gen.gaps)}}));
            }
        },
        fam);
    return 0;
}

int cmd_divisibility(const RunConfig& rc) {
    const Model m = build_model(rc.model);
    const auto grid = rc.options.grid();
    const AnyFamily fam = family_or_fail(m, grid);
    DivisibilityReport rep;
    if (m.kind == Kind::quantum)
        rep = check_cp_divisible(extract_tcl_generator(std::get<QuantumFamily>(fam), rc.options.condition_limit),
                                 rc.options.rate_tolerance);
    else
        rep = check_classical_divisible(extract_tcl_generator(std::get<ClassicalFamily>(fam), rc.options.condition_limit),
                                        rc.options.rate_tolerance);
    json out = io::to_json(rep, m.kind == Kind::quantum);
    out["model"] = io::to_json(m.config);
    out["grid"] = grid_json(rc.options);
    write(rc, "divisibility.json", dump(out));
    write(rc, "rates.csv", io::rates_csv(rep));
    return 0;
}

int cmd_backflow(const RunConfig& rc) {
    const Model m = build_model(rc.model);
    const auto rep = analyze(m, rc.options);
    json out = io::to_json(rep);
    out["grid"] = grid_json(rc.options);
    write(rc, "backflow.json", dump(out));
    const auto grid = rc.options.grid();
    const auto traj = simulate(m, grid);
    if (const auto* q = std::get_if<QuantumTrajectory>(&traj); q && m.dim == 2)
        write(rc, "decomposition.csv", io::decomposition_csv(*q));
    return 0;
}

int cmd_phase_diagram(const RunConfig& rc) {
    if (rc.axes.empty()) throw ConfigError("phase-diagram needs sweep.axes");
    SweepSpec spec{rc.model, rc.axes, rc.options, rc.threads};
    try {
        spec.validate();
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    const auto res = run_sweep(spec);
    const auto sum = summarize(res);
    write(rc, "phase_diagram.csv", sweep_csv(res));
    write(rc, "phase_diagram.json", dump(io::to_json(res, sum)));
    if (sum.failed_rows > 0) {
        for (const auto& row : res.rows)
            if (!row.report) {
                std::ostringstream os;
                os << sum.failed_rows << " lattice point(s) failed; first at index " << row.index << " (";
                for (std::size_t k = 0; k < row.coords.size(); ++k)
                    os << (k ? ", " : "") << spec.axes[k].name << " = " << format_double(row.coords[k]);
                os << "): " << row.error;
                throw NumericalError(os.str());
            }
    }
    return 0;
}

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--model", f.model, "model name (same as --set model.name=NAME)");
    app->add_option("--set", f.sets, "override a config leaf, e.g. model.params.alpha=0.7")->take_all()->allow_extra_args(false);
    app->add_option("--out", f.out, "output directory (default: out)");
    app->add_option("--threads", f.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    app->add_option("--dt", f.dt, "time step");
    app->add_option("--t-max", f.t_max, "final time");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"backflow-lab: non-Markovian relaxation, divisibility and information backflow"};
    app.require_subcommand(1);
    CommonFlags flags;

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Command commands[] = {
        {"simulate", "propagate a model and write its trajectory", cmd_simulate},
        {"extract", "extract the time-local generator from the propagator", cmd_extract},
        {"divisibility", "test CP / classical divisibility", cmd_divisibility},
        {"backflow", "backflow functionals and their classical/intrinsic split", cmd_backflow},
        {"phase-diagram", "sweep one or two parameters and classify regimes", cmd_phase_diagram},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, flags);
        subs.emplace_back(sub, &c);
    }
    auto* model = app.add_subcommand("model", "model registry");
    model->require_subcommand(1);
    auto* list = model->add_subcommand("list", "print the built-in models and their parameter schemas as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (list->parsed()) {
            std::cout << io::model_list_json().dump(2) << '\n';
            return 0;
        }
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed()) return cmd->run(load(flags));
    } catch (const ContractViolation& e) {
        std::cerr << "backflow-lab: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalError& e) {
        std::cerr << "backflow-lab: numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const json::exception& e) {
        std::cerr << "backflow-lab: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "backflow-lab: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
