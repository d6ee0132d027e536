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

// special_functions.hpp: Lanczos gamma function and the one-parameter
// Mittag-Leffler function E_alpha(z) on the negative real axis.

#pragma once

#include <quadmath.h>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "backflow/core_types.hpp"

namespace backflow {

// Lanczos approximation, g = 7, n = 9 (coefficients from Godfrey / Numerical
// Recipes 3rd ed.). Relative accuracy ~1e-15 for x > 0.
inline double log_gamma(double x) {
    static constexpr std::array<double, 9> c = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double g = 7.0;
    if (!(x > 0.0)) throw ContractViolation("log_gamma: argument must be positive");
    if (x < 0.5) {
        // Reflection keeps the series in its accurate region.
        return std::log(std::numbers::pi / std::abs(std::sin(std::numbers::pi * x))) - log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = c[0];
    for (int i = 1; i < 9; ++i) a += c[static_cast<std::size_t>(i)] / (x + i);
    const double t = x + g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Gamma on the real line; poles (non-positive integers) raise.
inline double gamma_fn(double x) {
    if (x > 0.0) return std::exp(log_gamma(x));
    if (x == std::floor(x)) throw ContractViolation("gamma_fn: pole at non-positive integer");
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
}

struct MlParams {
    double alpha = 1.0;
    int series_cutoff = 4000;  // hard cap on Taylor terms
    int asym_terms = 400;      // hard cap on asymptotic terms
    double switch_point = 30;  // in s = |z|^{1/alpha}

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("MlParams: alpha must lie in (0, 1]");
        if (series_cutoff < 1 || asym_terms < 1) throw ContractViolation("MlParams: cutoffs must be >= 1");
        if (!(switch_point > 0.0)) throw ContractViolation("MlParams: switch_point must be positive");
    }
};

// E_alpha(-x), x >= 0. Let s = x^{1/alpha}. The largest Taylor term grows like
// e^s while the optimally truncated asymptotic series is accurate to ~e^{-s},
// so the Taylor series (quad precision coefficients, ~34 digits) handles
// s <= switch_point and the asymptotic series handles the rest.
class MittagLeffler {
public:
    explicit MittagLeffler(MlParams params) : p_(params) {
        p_.validate();
        if (p_.alpha == 1.0) return;
        const __float128 a = p_.alpha;
        const double log_x_max = p_.alpha * std::log(p_.switch_point);
        for (int k = 0; k < p_.series_cutoff; ++k) {
            const __float128 lg = lgammaq(a * k + 1);
            coeff_.push_back(expq(-lg));
            // Stop once every term at x_max is below 1e-40 and past the peak.
            const double log_term = k * log_x_max - static_cast<double>(lg);
            if (k * p_.alpha > 2.0 * p_.switch_point && log_term < -92.0) break;
        }
    }

    double alpha() const { return p_.alpha; }

    double operator()(double z) const {
        if (!(z <= 0.0)) throw ContractViolation("mittag_leffler: argument must be <= 0");
        if (p_.alpha == 1.0) return std::exp(z);
        const double x = -z;
        if (x == 0.0) return 1.0;
        const double s = std::pow(x, 1.0 / p_.alpha);
        return s <= p_.switch_point ? series(x) : asymptotic(x);
    }

private:
    double series(double x) const {
        const __float128 mx = -static_cast<__float128>(x);
        __float128 pw = 1, sum = 0;
        const double k_peak = std::pow(x, 1.0 / p_.alpha) / p_.alpha;
        for (std::size_t k = 0; k < coeff_.size(); ++k) {
            const __float128 term = pw * coeff_[k];
            sum += term;
            if (k > k_peak && fabsq(term) < 1e-22Q * fabsq(sum)) break;
            pw *= mx;
        }
        return static_cast<double>(sum);
    }

    // E_alpha(-x) ~ sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(1 - alpha k), with
    // 1/Gamma(1 - u) = Gamma(u) sin(pi u) / pi.
    double asymptotic(double x) const {
        const double lx = std::log(x);
        double sum = 0.0;
        double prev_bound = INFINITY;
        for (int k = 1; k <= p_.asym_terms; ++k) {
            const double u = p_.alpha * k;
            const double log_bound = log_gamma(u) - k * lx;
            const double bound = std::exp(log_bound) / std::numbers::pi;
            if (bound > prev_bound) break;  // optimal truncation
            const double term = ((k % 2) ? 1.0 : -1.0) * bound * std::sin(std::numbers::pi * u);
            sum += term;
            if (bound < 1e-18 * std::abs(sum)) break;
            prev_bound = bound;
        }
        return sum;
    }

    MlParams p_;
    std::vector<__float128> coeff_;
};

namespace detail {
inline std::shared_ptr<const MittagLeffler> cached_ml(double alpha) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const MittagLeffler>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    auto ml = std::make_shared<const MittagLeffler>(MlParams{.alpha = alpha});
    if (cache.size() > 64) cache.clear();
    cache.emplace(alpha, ml);
    return ml;
}
}  // namespace detail

inline double mittag_leffler(double alpha, double z) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ContractViolation("mittag_leffler: alpha must lie in (0, 1]");
    if (!(z <= 0.0)) throw ContractViolation("mittag_leffler: argument must be <= 0");
    return (*detail::cached_ml(alpha))(z);
}

// E_alpha(-(lambda t)^alpha), the fractional relaxation envelope.
inline double ml_envelope(double alpha, double lambda, double t) {
    if (!(lambda > 0.0)) throw ContractViolation("ml_envelope: lambda must be positive");
    if (!(t >= 0.0)) throw ContractViolation("ml_envelope: t must be >= 0");
    if (t == 0.0) return 1.0;
    if (alpha == 1.0) return std::exp(-lambda * t);
    return mittag_leffler(alpha, -std::pow(lambda * t, alpha));
}

}  // namespace backflow
