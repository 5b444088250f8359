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
 * Executes fan-out circuits against the state backends.
 *
 * Exact mode enumerates every measurement branch (true outcome x reported
 * outcome) on the density-matrix backend and returns the probability-weighted
 * output state. Trajectory mode unravels the same channels shot by shot on
 * statevectors with per-shot seeds derived from the run seed.
 *
 * Noise placement: depolarizing after each physical gate (a ladder CNOT is
 * charged as its RY . CZ . RY decomposition), idle depolarizing for every
 * idle interval, readout flips on the classical record only. Measured qubits
 * are traced out at measurement and receive no further noise.
 */

#pragma once

#include "fanout/circuit.hpp"
#include "fanout/feedforward.hpp"
#include "fanout/noise.hpp"
#include "fanout/qsim.hpp"

#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanout {

enum class RunMode { Exact, Trajectories };

struct RunConfig {
    InputState input{};
    std::optional<NoiseModel> noise{};
    RunMode mode = RunMode::Exact;
    int shots = 1000;
    std::uint64_t seed = 1;
    bool keep_branches = false; // exact mode: record every classical branch
};

struct BranchRecord {
    std::string true_bits;
    std::string reported_bits;
    double probability;
    DensityState output; // normalized, after recovery or frame correction
};

struct ShotRecord {
    std::string true_bits;
    std::string reported_bits;
    PauliFrame frame;   // identity unless outcomes went into the frame
    PureState output;   // output register, frame not applied
};

struct RunResult {
    Family family;
    int n;
    RunMode mode;
    std::optional<DensityState> output_state; // exact mode
    std::vector<ShotRecord> shots;            // trajectory mode
    std::vector<BranchRecord> branches;       // exact mode with keep_branches
    double duration_ns = 0;
    std::map<std::string, double> outcome_distribution;    // exact: P(reported bits)
    std::map<std::string, std::size_t> outcome_histogram;  // trajectories: counts
    std::size_t branch_count = 0;
};

/// SplitMix64 finalizer; per-shot streams are seeded with mix(seed, shot).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline constexpr double kReportCutoff = 1e-12;

/// Physical pulses of a recovery: X as RX(pi), Z as RX(pi/2) RY(pi) RX(-pi/2),
/// in application order (X first for Z.X).
inline std::vector<GateOp> recovery_pulses(const RecoveryOp& r, int qubit) {
    constexpr double pi = std::numbers::pi;
    std::vector<GateOp> g;
    if (r.apply_x) g.push_back(GateOp::rx(qubit, pi));
    if (r.apply_z) {
        g.push_back(GateOp::rx(qubit, -pi / 2));
        g.push_back(GateOp::ry(qubit, pi));
        g.push_back(GateOp::rx(qubit, pi / 2));
    }
    return g;
}

// Applies a gate and its depolarizing noise. Ladder CNOTs are charged as
// RY(-pi/2) on the target, CZ, RY(pi/2) on the target.
inline void noisy_gate(DensityState& s, const GateOp& g, const NoiseModel* noise) {
    if (g.kind == GateKind::CNOT) {
        noisy_gate(s, GateOp::ry(g.q1, -std::numbers::pi / 2), noise);
        noisy_gate(s, GateOp::cz(g.q0, g.q1), noise);
        noisy_gate(s, GateOp::ry(g.q1, std::numbers::pi / 2), noise);
        return;
    }
    apply_gate(s, g);
    if (!noise) return;
    if (g.two_qubit()) {
        apply_depolarizing(s, {g.q0, g.q1}, noise->two_qubit_depol);
    } else {
        apply_depolarizing(s, {g.q0}, noise->single_qubit_depol);
    }
}

inline void pauli_on(PureState& s, const std::string& letters, std::initializer_list<int> qubits) {
    auto it = qubits.begin();
    for (char c : letters) {
        const int q = *it++;
        if (c == 'X') apply_gate(s, GateOp::x(q));
        else if (c == 'Y') apply_gate(s, GateOp::y(q));
        else if (c == 'Z') apply_gate(s, GateOp::z(q));
    }
}

inline void noisy_gate(PureState& s, const GateOp& g, const NoiseModel* noise, Rng& rng) {
    if (g.kind == GateKind::CNOT) {
        noisy_gate(s, GateOp::ry(g.q1, -std::numbers::pi / 2), noise, rng);
        noisy_gate(s, GateOp::cz(g.q0, g.q1), noise, rng);
        noisy_gate(s, GateOp::ry(g.q1, std::numbers::pi / 2), noise, rng);
        return;
    }
    apply_gate(s, g);
    if (!noise) return;
    if (g.two_qubit()) {
        pauli_on(s, sample_pauli_error(2, nontrivial_pauli_probability(noise->two_qubit_depol, 2), rng), {g.q0, g.q1});
    } else {
        pauli_on(s, sample_pauli_error(1, nontrivial_pauli_probability(noise->single_qubit_depol, 1), rng), {g.q0});
    }
}

inline std::vector<std::vector<int>> idle_by_layer(const Circuit& c) {
    std::vector<std::vector<int>> out(c.layers().size());
    const auto iv = idle_intervals(c);
    for (std::size_t q = 0; q < iv.size(); ++q) {
        for (const auto& i : iv[q]) out[static_cast<std::size_t>(i.layer)].push_back(static_cast<int>(q));
    }
    return out;
}

struct ExactBranch {
    double prob;
    std::string true_bits;     // per Bell-measured qubit (z1 x1 z2 x2 ...), '-' until measured
    std::string reported_bits;
    DensityState state;
    std::vector<int> local;    // circuit qubit -> local index, -1 once traced out
};

} // namespace detail

/// Exact branch enumeration on the density-matrix backend.
inline RunResult run_exact(const Circuit& circuit, const RunConfig& config) {
    if (circuit.num_qubits() > kMaxDensityQubits) {
        throw std::invalid_argument("run_exact: circuit exceeds the 12-qubit density-matrix ceiling; use trajectories");
    }
    const NoiseModel* noise = config.noise ? &*config.noise : nullptr;
    if (noise) noise->validate();
    const int nq = circuit.num_qubits();
    const int n = circuit.n_outputs();
    const auto idle = detail::idle_by_layer(circuit);
    const auto bell = circuit.bell_qubits();
    std::vector<int> bell_slot(static_cast<std::size_t>(nq), -1);
    for (std::size_t k = 0; k < bell.size(); ++k) bell_slot[static_cast<std::size_t>(bell[k])] = static_cast<int>(k);

    std::vector<int> identity_map(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) identity_map[static_cast<std::size_t>(q)] = q;
    std::vector<detail::ExactBranch> branches;
    branches.push_back({1.0, std::string(bell.size(), '-'), std::string(bell.size(), '-'),
                        DensityState(init_state(nq)), identity_map});

    std::optional<LookupTable> table;
    if (circuit.family() == Family::Feedforward) table.emplace(n);
    bool reported_expanded = false;

    // Splits every branch over the readout confusion of the Bell bits.
    auto expand_reports = [&] {
        if (reported_expanded || bell.empty()) return;
        std::vector<detail::ExactBranch> out;
        for (auto& b : branches) {
            std::vector<std::pair<std::string, double>> reps{{"", 1.0}};
            for (std::size_t k = 0; k < bell.size(); ++k) {
                const int t = b.true_bits[k] - '0';
                const auto& conf = noise ? noise->confusion_for(bell[k]) : ConfusionMatrix{};
                std::vector<std::pair<std::string, double>> next;
                for (const auto& [bits, p] : reps) {
                    for (int r = 0; r < 2; ++r) {
                        const double pr = p * conf.prob(r, t);
                        if (pr > detail::kReportCutoff) next.emplace_back(bits + static_cast<char>('0' + r), pr);
                    }
                }
                reps = std::move(next);
            }
            for (auto& [bits, p] : reps) out.push_back({b.prob * p, b.true_bits, bits, b.state, b.local});
        }
        branches = std::move(out);
        reported_expanded = true;
    };

    auto outcome_of = [&](const std::string& bits) {
        BellOutcome o;
        for (std::size_t k = 0; k + 1 < bits.size(); k += 2) {
            o.z.push_back(static_cast<std::uint8_t>(bits[k] - '0'));
            o.x.push_back(static_cast<std::uint8_t>(bits[k + 1] - '0'));
        }
        return o;
    };

    for (std::size_t li = 0; li < circuit.layers().size(); ++li) {
        const Layer& layer = circuit.layers()[li];
        std::vector<const MeasureOp*> measures;
        bool recovery_layer = false;
        bool frame_layer = false;
        for (auto& b : branches) {
            for (const auto& op : layer.ops) {
                if (const auto* g = std::get_if<GateOp>(&op)) {
                    GateOp lg = *g;
                    lg.q0 = b.local[static_cast<std::size_t>(g->q0)];
                    if (g->two_qubit()) lg.q1 = b.local[static_cast<std::size_t>(g->q1)];
                    detail::noisy_gate(b.state, lg, noise);
                } else if (const auto* p = std::get_if<InputPrepOp>(&op)) {
                    const int lq = b.local[static_cast<std::size_t>(p->qubit)];
                    prepare_input(b.state, lq, config.input);
                    if (noise) apply_depolarizing(b.state, {lq}, noise->single_qubit_depol);
                }
            }
            if (noise) {
                for (int q : idle[li]) {
                    apply_depolarizing(b.state, {b.local[static_cast<std::size_t>(q)]}, noise->idle(layer.duration_ns));
                }
            }
        }
        for (const auto& op : layer.ops) {
            if (const auto* m = std::get_if<MeasureOp>(&op); m && m->role != MeasureRole::Output) measures.push_back(m);
            if (std::holds_alternative<ConditionalOp>(op)) recovery_layer = true;
            if (std::holds_alternative<FrameUpdateOp>(op)) frame_layer = true;
        }

        if (!measures.empty()) {
            for (const MeasureOp* m : measures) {
                std::vector<detail::ExactBranch> next;
                for (auto& b : branches) {
                    const int lq = b.local[static_cast<std::size_t>(m->qubit)];
                    for (int outcome = 0; outcome < 2; ++outcome) {
                        auto [p, reduced] = collapse_and_discard(b.state, lq, outcome);
                        if (b.prob * p < detail::kReportCutoff) continue;
                        detail::ExactBranch child{b.prob * p, b.true_bits, b.reported_bits, std::move(reduced), b.local};
                        child.true_bits[static_cast<std::size_t>(bell_slot[static_cast<std::size_t>(m->qubit)])] = static_cast<char>('0' + outcome);
                        child.local[static_cast<std::size_t>(m->qubit)] = -1;
                        for (auto& l : child.local) {
                            if (l > lq) --l;
                        }
                        next.push_back(std::move(child));
                    }
                }
                branches = std::move(next);
            }
            expand_reports();
        }

        if (recovery_layer) {
            expand_reports();
            for (auto& b : branches) {
                const auto& idx = table->lookup(outcome_of(b.reported_bits));
                for (const auto& op : layer.ops) {
                    const auto* c = std::get_if<ConditionalOp>(&op);
                    if (!c) continue;
                    const int lq = b.local[static_cast<std::size_t>(c->qubit)];
                    for (const auto& g : detail::recovery_pulses(RecoveryOp::from_index(idx[static_cast<std::size_t>(c->slot - 1)]), lq)) {
                        apply_gate(b.state, g);
                        if (noise && noise->noisy_recovery) apply_depolarizing(b.state, {lq}, noise->single_qubit_depol);
                    }
                }
            }
        }
        if (frame_layer) {
            expand_reports();
            for (auto& b : branches) {
                const PauliFrame frame = frame_update(PauliFrame::identity(n), outcome_of(b.reported_bits));
                // Virtual correction: no pulses, no noise.
                std::string label(static_cast<std::size_t>(b.state.num_qubits()), 'I');
                for (int k = 0; k < n; ++k) {
                    const auto& f = frame.flips[static_cast<std::size_t>(k)];
                    const int lq = b.local[static_cast<std::size_t>(circuit.outputs()[static_cast<std::size_t>(k)])];
                    label[static_cast<std::size_t>(lq)] = f.apply_x ? (f.apply_z ? 'Y' : 'X') : (f.apply_z ? 'Z' : 'I');
                }
                apply_pauli(b.state, label);
            }
        }
    }

    RunResult result{circuit.family(), n, RunMode::Exact, std::nullopt, {}, {}, circuit.duration_ns(), {}, {}, 0};
    CMatrix acc;
    for (const auto& b : branches) {
        if (b.state.num_qubits() != n) throw std::logic_error("run_exact: unmeasured non-output qubits remain");
        for (int k = 0; k < n; ++k) {
            if (b.local[static_cast<std::size_t>(circuit.outputs()[static_cast<std::size_t>(k)])] != k) {
                throw std::logic_error("run_exact: output qubits out of order");
            }
        }
        if (acc.size() == 0) acc = CMatrix::Zero(b.state.matrix().rows(), b.state.matrix().cols());
        acc += b.prob * b.state.matrix();
        if (!bell.empty()) result.outcome_distribution[b.reported_bits] += b.prob;
        if (config.keep_branches) result.branches.push_back({b.true_bits, b.reported_bits, b.prob, b.state});
    }
    acc /= acc.trace().real();
    acc = (acc + acc.adjoint()).eval() / 2.0;
    result.output_state.emplace(n, std::move(acc));
    result.branch_count = branches.size();
    return result;
}

/// Monte-Carlo unraveling on statevectors, one derived RNG stream per shot.
inline RunResult run_trajectory(const Circuit& circuit, const RunConfig& config) {
    if (config.shots < 1) throw std::invalid_argument("run_trajectory: shots must be >= 1");
    const NoiseModel* noise = config.noise ? &*config.noise : nullptr;
    if (noise) noise->validate();
    const int nq = circuit.num_qubits();
    const int n = circuit.n_outputs();
    const auto idle = detail::idle_by_layer(circuit);
    const auto bell = circuit.bell_qubits();
    std::vector<int> bell_slot(static_cast<std::size_t>(nq), -1);
    for (std::size_t k = 0; k < bell.size(); ++k) bell_slot[static_cast<std::size_t>(bell[k])] = static_cast<int>(k);
    std::optional<LookupTable> table;
    if (circuit.family() == Family::Feedforward) table.emplace(n);

    RunResult result{circuit.family(), n, RunMode::Trajectories, std::nullopt, {}, {}, circuit.duration_ns(), {}, {}, 0};
    result.shots.reserve(static_cast<std::size_t>(config.shots));

    for (int shot = 0; shot < config.shots; ++shot) {
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(shot)));
        PureState psi = init_state(nq);
        std::string true_bits(bell.size(), '-'), reported(bell.size(), '-');
        PauliFrame frame = PauliFrame::identity(n);
        auto outcome = [&] {
            BellOutcome o;
            for (std::size_t k = 0; k < reported.size(); k += 2) {
                o.z.push_back(static_cast<std::uint8_t>(reported[k] - '0'));
                o.x.push_back(static_cast<std::uint8_t>(reported[k + 1] - '0'));
            }
            return o;
        };
        for (std::size_t li = 0; li < circuit.layers().size(); ++li) {
            const Layer& layer = circuit.layers()[li];
            for (const auto& op : layer.ops) {
                if (const auto* g = std::get_if<GateOp>(&op)) {
                    detail::noisy_gate(psi, *g, noise, rng);
                } else if (const auto* p = std::get_if<InputPrepOp>(&op)) {
                    prepare_input(psi, p->qubit, config.input);
                    if (noise) {
                        detail::pauli_on(psi, sample_pauli_error(1, nontrivial_pauli_probability(noise->single_qubit_depol, 1), rng), {p->qubit});
                    }
                }
            }
            if (noise) {
                const double pidle = nontrivial_pauli_probability(noise->idle(layer.duration_ns), 1);
                for (int q : idle[li]) detail::pauli_on(psi, sample_pauli_error(1, pidle, rng), {q});
            }
            for (const auto& op : layer.ops) {
                if (const auto* m = std::get_if<MeasureOp>(&op); m && m->role != MeasureRole::Output) {
                    auto r = measure_z(psi, m->qubit, rng);
                    psi = std::move(r.post_state);
                    const auto slot = static_cast<std::size_t>(bell_slot[static_cast<std::size_t>(m->qubit)]);
                    true_bits[slot] = static_cast<char>('0' + r.outcome);
                    const ConfusionMatrix conf = noise ? noise->confusion_for(m->qubit) : ConfusionMatrix{};
                    reported[slot] = static_cast<char>('0' + noisy_readout(r.outcome, conf, rng));
                }
            }
            for (const auto& op : layer.ops) {
                if (const auto* c = std::get_if<ConditionalOp>(&op)) {
                    const auto& idx = table->lookup(outcome());
                    for (const auto& g : detail::recovery_pulses(RecoveryOp::from_index(idx[static_cast<std::size_t>(c->slot - 1)]), c->qubit)) {
                        apply_gate(psi, g);
                        if (noise && noise->noisy_recovery) {
                            detail::pauli_on(psi, sample_pauli_error(1, nontrivial_pauli_probability(noise->single_qubit_depol, 1), rng), {c->qubit});
                        }
                    }
                } else if (std::holds_alternative<FrameUpdateOp>(op)) {
                    frame = frame_update(frame, outcome());
                }
            }
        }

        // Output amplitudes: measured qubits fixed at their true outcomes.
        std::size_t fixed = 0;
        for (std::size_t k = 0; k < bell.size(); ++k) {
            if (true_bits[k] == '1') fixed |= mask_of(bell[k], nq);
        }
        CVector out(Eigen::Index{1} << n);
        for (std::size_t j = 0; j < static_cast<std::size_t>(out.size()); ++j) {
            std::size_t idx = fixed;
            for (int k = 0; k < n; ++k) {
                if ((j >> (n - 1 - k)) & 1U) idx |= mask_of(circuit.outputs()[static_cast<std::size_t>(k)], nq);
            }
            out(static_cast<Eigen::Index>(j)) = psi.amplitudes()(static_cast<Eigen::Index>(idx));
        }
        out.normalize();
        if (!bell.empty()) ++result.outcome_histogram[reported];
        result.shots.push_back({true_bits, reported, frame, PureState(n, std::move(out))});
    }
    return result;
}

inline RunResult run(const Circuit& circuit, const RunConfig& config) {
    return config.mode == RunMode::Exact ? run_exact(circuit, config) : run_trajectory(circuit, config);
}

/// Frame-corrected output of one shot.
inline PureState corrected_output(const ShotRecord& shot) {
    PureState s = shot.output;
    if (!shot.frame.is_identity()) apply_pauli(s, shot.frame.letters());
    return s;
}

/// Fidelity to cos(theta/2)|0...0> + e^{i phi} sin(theta/2)|1...1>; the shot
/// average in trajectory mode.
inline double output_fidelity(const RunResult& r, const InputState& input) {
    const PureState target = ghz_like(r.n, input);
    if (r.mode == RunMode::Exact) {
        if (!r.output_state) throw std::invalid_argument("output_fidelity: result has no output state");
        return fidelity(*r.output_state, target);
    }
    if (r.shots.empty()) throw std::invalid_argument("output_fidelity: no shots");
    double acc = 0;
    for (const auto& s : r.shots) acc += fidelity(corrected_output(s), target);
    return acc / static_cast<double>(r.shots.size());
}

/// <P> on the output register; shot records are reinterpreted under their frame.
inline double expectation(const RunResult& r, const std::string& pauli) {
    if (r.mode == RunMode::Exact) return expectation_pauli(*r.output_state, pauli);
    double acc = 0;
    for (const auto& s : r.shots) {
        const auto [sign, obs] = adjust_pauli(pauli, s.frame);
        acc += sign * expectation_pauli(s.output, obs);
    }
    return acc / static_cast<double>(r.shots.size());
}

inline double joint_x_expectation(const RunResult& r) {
    return expectation(r, std::string(static_cast<std::size_t>(r.n), 'X'));
}

/// 1 - mean output fidelity over the six cardinal inputs (exact mode).
inline double cardinal_error(const Circuit& circuit, const std::optional<NoiseModel>& noise) {
    double acc = 0;
    const auto inputs = InputState::cardinal();
    for (const auto& in : inputs) {
        RunConfig cfg;
        cfg.input = in;
        cfg.noise = noise;
        acc += output_fidelity(run_exact(circuit, cfg), in);
    }
    return 1.0 - acc / static_cast<double>(inputs.size());
}

} // namespace fanout
