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

// regime.hpp: transient classification from the (N_cl, N_qe) pair.

#pragma once

#include <optional>
#include <string_view>

#include "backflow/core_types.hpp"

namespace backflow {

inline constexpr double default_epsilon_n = 1e-6;

enum class Regime { monotone, classical_overshoot, intrinsic_revival, hybrid };

inline std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::monotone: return "monotone";
        case Regime::classical_overshoot: return "classical_overshoot";
        case Regime::intrinsic_revival: return "intrinsic_revival";
        case Regime::hybrid: return "hybrid";
    }
    return "?";
}

inline std::optional<Regime> regime_from_string(std::string_view s) {
    for (auto r : {Regime::monotone, Regime::classical_overshoot, Regime::intrinsic_revival, Regime::hybrid})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

inline Regime classify(double n_cl, double n_qe, double epsilon_n = default_epsilon_n) {
    if (!(n_cl >= 0.0) || !(n_qe >= 0.0)) throw ContractViolation("classify: backflow values must be >= 0");
    const bool cl = n_cl > epsilon_n;
    const bool qe = n_qe > epsilon_n;
    if (!cl && !qe) return Regime::monotone;
    if (cl && !qe) return Regime::classical_overshoot;
    if (qe && !cl) return Regime::intrinsic_revival;
    return Regime::hybrid;
}

}  // namespace backflow
