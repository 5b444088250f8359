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
 * Error channels: depolarizing gate and idle noise, readout misassignment.
 *
 * Durations are in nanoseconds throughout the library.
 */

#pragma once

#include "fanout/qsim.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanout {

inline void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + ": probability outside [0, 1]");
}

struct ConfusionMatrix {
    double p01 = 0.; // P(read 0 | prepared 1)
    double p10 = 0.; // P(read 1 | prepared 0)

    void validate() const {
        check_probability(p01, "ConfusionMatrix p01");
        check_probability(p10, "ConfusionMatrix p10");
    }
    /// Two-state readout error (p01 + p10) / 2.
    [[nodiscard]] double readout_error() const { return (p01 + p10) / 2; }
    /// P(reported | prepared).
    [[nodiscard]] double prob(int reported, int prepared) const {
        const double flip = prepared == 1 ? p01 : p10;
        return reported == prepared ? 1.0 - flip : flip;
    }
    static ConfusionMatrix symmetric(double eps) { return {eps, eps}; }
};

enum class IdleLaw {
    Exponential, // 1 - exp(-t / T2echo)
    Linear,      // min(1, t / T2echo)
};

inline std::string to_string(IdleLaw l) { return l == IdleLaw::Exponential ? "exponential" : "linear"; }

inline IdleLaw idle_law_from_string(const std::string& s) {
    if (s == "exponential" || s == "exp") return IdleLaw::Exponential;
    if (s == "linear") return IdleLaw::Linear;
    throw std::invalid_argument("unknown idle law '" + s + "'");
}

/// Depolarizing probability for a qubit idling for `duration_ns`.
inline double idle_error_probability(double duration_ns, double t2_echo_ns, IdleLaw law = IdleLaw::Exponential) {
    if (duration_ns < 0) throw std::invalid_argument("idle_error_probability: negative duration");
    if (!(t2_echo_ns > 0)) throw std::invalid_argument("idle_error_probability: T2echo must be positive");
    if (std::isinf(t2_echo_ns)) return 0.0;
    switch (law) {
    case IdleLaw::Exponential: return -std::expm1(-duration_ns / t2_echo_ns);
    case IdleLaw::Linear: return std::min(1.0, duration_ns / t2_echo_ns);
    }
    return 0.0;
}

struct NoiseModel {
    double two_qubit_depol = 0.;    // per CZ
    double single_qubit_depol = 0.; // per physical single-qubit gate
    ConfusionMatrix confusion{};    // default for every qubit
    std::vector<ConfusionMatrix> per_qubit_confusion{};
    double t2_echo_ns = std::numeric_limits<double>::infinity();
    IdleLaw idle_law = IdleLaw::Exponential;
    bool noisy_recovery = false; // depolarize feedforward recovery pulses too

    void validate() const {
        check_probability(two_qubit_depol, "two_qubit_depol");
        check_probability(single_qubit_depol, "single_qubit_depol");
        confusion.validate();
        for (const auto& c : per_qubit_confusion) c.validate();
        if (!(t2_echo_ns > 0)) throw std::invalid_argument("t2_echo must be positive");
    }

    [[nodiscard]] const ConfusionMatrix& confusion_for(int qubit) const {
        if (qubit >= 0 && static_cast<std::size_t>(qubit) < per_qubit_confusion.size()) {
            return per_qubit_confusion[static_cast<std::size_t>(qubit)];
        }
        return confusion;
    }

    [[nodiscard]] double idle(double duration_ns) const { return idle_error_probability(duration_ns, t2_echo_ns, idle_law); }

    [[nodiscard]] bool is_noiseless() const {
        if (two_qubit_depol > 0 || single_qubit_depol > 0 || !std::isinf(t2_echo_ns)) return false;
        if (confusion.p01 > 0 || confusion.p10 > 0) return false;
        for (const auto& c : per_qubit_confusion) {
            if (c.p01 > 0 || c.p10 > 0) return false;
        }
        return true;
    }
};

/// Converts an average gate infidelity r on d-dimensional targets into the
/// parameter p of rho -> (1-p) rho + p I/d, using r = p (d - 1) / d.
inline double depol_from_infidelity(double r, int num_qubits) {
    const double d = std::ldexp(1.0, num_qubits);
    return std::min(1.0, r * d / (d - 1));
}

// ---------------------------------------------------------------------------
// Density-matrix channels

/// rho -> (1-p) rho + p (I/d on the targets) (x) Tr_targets(rho).
inline void apply_depolarizing(DensityState& s, std::span<const int> qubits, double p) {
    check_probability(p, "apply_depolarizing");
    if (qubits.empty() || qubits.size() > 2) throw std::invalid_argument("apply_depolarizing: 1 or 2 target qubits");
    for (int q : qubits) {
        if (q < 0 || q >= s.num_qubits()) throw std::invalid_argument("apply_depolarizing: qubit out of range");
    }
    if (qubits.size() == 2 && qubits[0] == qubits[1]) throw std::invalid_argument("apply_depolarizing: duplicate target");
    if (p == 0.0) return;

    // Block form of I/d (x) Tr_targets(rho): for every pair of non-target
    // row/column patterns the d x d target block keeps (1-p) of its entries
    // and gains p * trace(block) / d on the diagonal.
    const int n = s.num_qubits();
    std::vector<std::size_t> offsets{0};
    std::size_t target_mask = 0;
    for (int q : qubits) {
        const std::size_t m = mask_of(q, n);
        target_mask |= m;
        const std::size_t len = offsets.size();
        for (std::size_t i = 0; i < len; ++i) offsets.push_back(offsets[i] | m);
    }
    const double d = static_cast<double>(offsets.size());
    CMatrix& rho = s.matrix();
    const std::size_t dim = s.dim();
    for (std::size_t c = 0; c < dim; ++c) {
        if (c & target_mask) continue;
        for (std::size_t r = 0; r < dim; ++r) {
            if (r & target_mask) continue;
            cplx tr{0.};
            for (std::size_t t : offsets) tr += rho(static_cast<Eigen::Index>(r | t), static_cast<Eigen::Index>(c | t));
            for (std::size_t tc : offsets) {
                for (std::size_t tr_ : offsets) {
                    auto& e = rho(static_cast<Eigen::Index>(r | tr_), static_cast<Eigen::Index>(c | tc));
                    e *= (1.0 - p);
                    if (tr_ == tc) e += p * tr / d;
                }
            }
        }
    }
}

inline void apply_depolarizing(DensityState& s, std::initializer_list<int> qubits, double p) {
    apply_depolarizing(s, std::span<const int>(qubits.begin(), qubits.size()), p);
}

// ---------------------------------------------------------------------------
// Trajectory unraveling

/// With probability 1-p returns all-identity letters; otherwise a uniformly
/// chosen non-identity Pauli on the targets (3 options for one qubit, 15 for two).
inline std::string sample_pauli_error(int num_targets, double p, Rng& rng) {
    check_probability(p, "sample_pauli_error");
    if (num_targets < 1 || num_targets > 2) throw std::invalid_argument("sample_pauli_error: 1 or 2 targets");
    std::string out(static_cast<std::size_t>(num_targets), 'I');
    if (p == 0.0 || uniform01(rng) >= p) return out;
    const int options = (1 << (2 * num_targets)) - 1;
    const int pick = 1 + static_cast<int>(uniform01(rng) * options); // 1..options
    static constexpr std::array<char, 4> letters{'I', 'X', 'Y', 'Z'};
    for (int j = 0; j < num_targets; ++j) out[static_cast<std::size_t>(j)] = letters[static_cast<std::size_t>((pick >> (2 * j)) & 3)];
    return out;
}

/// Probability of a non-identity Pauli in the unraveling of apply_depolarizing(p).
inline double nontrivial_pauli_probability(double p, int num_targets) {
    const double d2 = std::ldexp(1.0, 2 * num_targets);
    return p * (d2 - 1) / d2;
}

/// Flips 1 -> 0 with p01 and 0 -> 1 with p10; the quantum state is untouched.
inline int noisy_readout(int true_outcome, const ConfusionMatrix& c, Rng& rng) {
    if (true_outcome != 0 && true_outcome != 1) throw std::invalid_argument("noisy_readout: outcome must be 0 or 1");
    const double flip = true_outcome == 1 ? c.p01 : c.p10;
    if (flip > 0 && uniform01(rng) < flip) return 1 - true_outcome;
    return true_outcome;
}

} // namespace fanout
