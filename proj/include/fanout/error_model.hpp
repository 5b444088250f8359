// Copyright 2026 The fanout Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Success-probability error model: every CNOT, Bell-measurement readout and
 * t_CNOT-long idle slot succeeds independently, so
 *
 *   1 - eps_tot = prod (1 - eps_cnot_i) prod (1 - eps_meas_j) prod (1 - eps_idle_k).
 *
 * The averaged form raises the mean rates to the occurrence counts of each
 * circuit family.
 */

#pragma once

#include "fanout/circuit.hpp"
#include "fanout/noise.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanout {

/// Device-median error rates. Durations in ns.
struct ErrorRates {
    double eps_1q = 0.0005;
    double eps_2q = 0.011;
    double eps_cnot_avg = 0.012; // one CZ plus two single-qubit gates
    double eps_meas_avg = 0.006;
    double t2_echo_ns = 48'000;
    double t_ff_latency_ns = 800;
    double mu = 7.5;
    std::optional<double> t_cnot_override_ns{}; // e.g. 176 ns from the gate-level schedule
    IdleLaw idle_law = IdleLaw::Exponential;

    // Optional per-instance lists for the product form.
    std::vector<double> cnot_errors{};
    std::vector<double> meas_errors{};

    /// CNOT duration that makes the latency equal mu * t_CNOT unless overridden.
    [[nodiscard]] double t_cnot_ns() const { return t_cnot_override_ns ? *t_cnot_override_ns : t_ff_latency_ns / mu; }

    /// Idle error of one t_CNOT slot at the median T2echo.
    [[nodiscard]] double eps_idle_avg() const { return idle_error_probability(t_cnot_ns(), t2_echo_ns, idle_law); }

    void validate() const {
        for (double p : {eps_1q, eps_2q, eps_cnot_avg, eps_meas_avg}) check_probability(p, "ErrorRates");
        for (double p : cnot_errors) check_probability(p, "ErrorRates cnot_errors");
        for (double p : meas_errors) check_probability(p, "ErrorRates meas_errors");
        if (!(mu > 0)) throw std::invalid_argument("ErrorRates: mu must be positive");
        if (!(t2_echo_ns > 0)) throw std::invalid_argument("ErrorRates: t2_echo must be positive");
        if (!(t_ff_latency_ns > 0)) throw std::invalid_argument("ErrorRates: latency must be positive");
        if (t_cnot_override_ns && !(*t_cnot_override_ns > 0)) throw std::invalid_argument("ErrorRates: t_cnot must be positive");
    }

    /// All rates zero and infinite coherence.
    static ErrorRates noiseless() {
        ErrorRates r;
        r.eps_1q = r.eps_2q = r.eps_cnot_avg = r.eps_meas_avg = 0;
        r.t2_echo_ns = std::numeric_limits<double>::infinity();
        return r;
    }
};

/// Simulator noise built from benchmarked rates: average gate infidelities
/// become depolarizing parameters, the readout error a symmetric confusion.
inline NoiseModel noise_from_rates(const ErrorRates& r) {
    r.validate();
    NoiseModel m;
    m.two_qubit_depol = depol_from_infidelity(r.eps_2q, 2);
    m.single_qubit_depol = depol_from_infidelity(r.eps_1q, 1);
    m.confusion = ConfusionMatrix::symmetric(r.eps_meas_avg);
    m.t2_echo_ns = r.t2_echo_ns;
    m.idle_law = r.idle_law;
    return m;
}

inline NoiseModel device_default_noise() { return noise_from_rates(ErrorRates{}); }

inline double total_error_individual(std::span<const double> cnot_errs, std::span<const double> meas_errs,
                                     std::span<const double> idle_errs) {
    double success = 1.0;
    for (auto list : {cnot_errs, meas_errs, idle_errs}) {
        for (double e : list) {
            check_probability(e, "total_error_individual");
            success *= 1.0 - e;
        }
    }
    return 1.0 - success;
}

inline double total_error_individual(const std::vector<double>& cnot_errs, const std::vector<double>& meas_errs,
                                     const std::vector<double>& idle_errs) {
    return total_error_individual(std::span<const double>(cnot_errs), std::span<const double>(meas_errs),
                                  std::span<const double>(idle_errs));
}

inline double total_error_average(const ErrorRates& r, Family family, int n) {
    r.validate();
    const OccurrenceCounts c = table_counts(family, n, r.mu);
    // Written through logs so n_idle may be fractional.
    const double log_success = c.n_cnot * std::log1p(-r.eps_cnot_avg) + c.n_meas * std::log1p(-r.eps_meas_avg) +
                               c.n_idle * std::log1p(-r.eps_idle_avg());
    return -std::expm1(log_success);
}

struct ScalingCurve {
    Family family;
    std::vector<int> n;
    std::vector<double> eps;
};

inline ScalingCurve scaling_curve(const ErrorRates& r, Family family, int n_min, int n_max) {
    if (n_min < 2 || n_max < n_min) throw std::invalid_argument("scaling_curve: need 2 <= n_min <= n_max");
    ScalingCurve c{family, {}, {}};
    for (int n = n_min; n <= n_max; ++n) {
        c.n.push_back(n);
        c.eps.push_back(total_error_average(r, family, n));
    }
    return c;
}

/// Smallest n in 2..n_max with eps_a(n) < eps_b(n); ties do not count.
inline std::optional<int> crossover(const ErrorRates& r, Family a, Family b, int n_max) {
    if (n_max < 2) throw std::invalid_argument("crossover: n_max must be >= 2");
    for (int n = 2; n <= n_max; ++n) {
        if (total_error_average(r, a, n) < total_error_average(r, b, n)) return n;
    }
    return std::nullopt;
}

} // namespace fanout
