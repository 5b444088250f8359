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
 * Time-layered circuit representation for the three fan-out families.
 *
 * A circuit is a list of layers executed back to back. Each layer has a
 * duration and holds at most one operation per qubit. Layer 0 is always the
 * preparation layer; every qubit counts as initialized once it ends.
 *
 * Constant-depth layout on 3n-2 qubits: in, a1, b1, c1, ..., a(n-1), b(n-1),
 * c(n-1). Bell pair i measures (in | c(i-1)) as z_i and a_i as x_i; outputs
 * are b1..b(n-1) and c(n-1). The unitary ladder uses q1..qn with q1 holding
 * the input.
 */

#pragma once

#include "fanout/qsim.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fanout {

enum class Family { Unitary, Feedforward, PauliFrameUpdate };

inline std::string to_string(Family f) {
    switch (f) {
    case Family::Unitary: return "unitary";
    case Family::Feedforward: return "feedforward";
    case Family::PauliFrameUpdate: return "pauli-frame";
    }
    return "?";
}

inline Family family_from_string(const std::string& s) {
    if (s == "unitary") return Family::Unitary;
    if (s == "feedforward" || s == "ff") return Family::Feedforward;
    if (s == "pauli-frame" || s == "pfu" || s == "pauli_frame") return Family::PauliFrameUpdate;
    throw std::invalid_argument("unknown circuit family '" + s + "'");
}

/// Gate and step durations in ns.
struct TimingModel {
    double t_1q = 32;
    double t_cz_total = 144;
    double t_readout = 400;
    double t_ff_latency = 800;

    double step_prepare = 352;
    double step_entangle = 208;
    double step_measure = 400;
    double step_feedforward = 928;

    // The unitary ladder is calibrated on one measured sequence length.
    int unitary_anchor_n = 4;
    double unitary_anchor_ns = 560;

    [[nodiscard]] double constant_depth_total() const {
        return step_prepare + step_entangle + step_measure + step_feedforward;
    }
    /// Per-CNOT layer time of the unitary ladder, solved from the anchor.
    [[nodiscard]] double unitary_cnot_layer() const {
        return (unitary_anchor_ns - t_1q) / (unitary_anchor_n - 1);
    }
    [[nodiscard]] double unitary_total(int n) const { return t_1q + (n - 1) * unitary_cnot_layer(); }
    /// Recovery pulses after the latency: one X pulse plus the three-pulse Z.
    [[nodiscard]] double recovery_window() const { return step_feedforward - t_ff_latency; }

    void validate() const {
        for (double v : {t_1q, t_cz_total, t_readout, t_ff_latency, step_prepare, step_entangle, step_measure,
                         step_feedforward, unitary_anchor_ns}) {
            if (!(v > 0)) throw std::invalid_argument("TimingModel: durations must be positive");
        }
        if (unitary_anchor_n < 2) throw std::invalid_argument("TimingModel: unitary anchor needs n >= 2");
        if (step_prepare != t_1q + 2 * t_cz_total + t_1q) {
            throw std::invalid_argument("TimingModel: prepare step must equal 2 t_1q + 2 t_cz");
        }
        if (step_entangle != 2 * t_1q + t_cz_total) {
            throw std::invalid_argument("TimingModel: entangle step must equal 2 t_1q + t_cz");
        }
        if (step_feedforward < t_ff_latency) throw std::invalid_argument("TimingModel: feedforward step shorter than latency");
    }
};

// ---------------------------------------------------------------------------
// Operations

/// RY(theta) followed by a virtual RZ(phi); placeholder for the input state.
struct InputPrepOp {
    int qubit;
};

enum class MeasureRole { Z, X, Output };

struct MeasureOp {
    int qubit;
    MeasureRole role;
    int pair = 0; // Bell pair index 1..n-1, 0 for output readout
};

/// Feedforward recovery slot for output q (1-based), dynamical-decoupling
/// pulses included. Occupies timeline only; the qubit is idle otherwise.
struct ConditionalOp {
    int slot;
    int qubit;
    int dd_pulses = 2;
};

/// Qubit-less marker: outcomes go into the Pauli frame instead of pulses.
struct FrameUpdateOp {};

using Operation = std::variant<GateOp, InputPrepOp, MeasureOp, ConditionalOp, FrameUpdateOp>;

/// Qubits an operation touches (empty for the frame marker).
inline std::vector<int> op_qubits(const Operation& op) {
    return std::visit(
        [](const auto& o) -> std::vector<int> {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, GateOp>) {
                return o.two_qubit() ? std::vector<int>{o.q0, o.q1} : std::vector<int>{o.q0};
            } else if constexpr (std::is_same_v<T, FrameUpdateOp>) {
                return {};
            } else {
                return {o.qubit};
            }
        },
        op);
}

/// Gates, input preparation and measurements make a qubit busy; recovery
/// slots and markers do not.
inline bool op_is_busy(const Operation& op) {
    return std::holds_alternative<GateOp>(op) || std::holds_alternative<InputPrepOp>(op) ||
           std::holds_alternative<MeasureOp>(op);
}

struct Layer {
    double duration_ns;
    std::string step;
    std::vector<Operation> ops;
};

struct OccurrenceCounts {
    double n_idle = 0;
    int n_cnot = 0;
    int n_meas = 0;
};

struct IdleInterval {
    double start_ns;
    double duration_ns;
    int layer;
};

class Circuit {
  public:
    Circuit(Family family, int n_outputs, QubitRegister reg, std::vector<Layer> layers, std::vector<int> outputs)
        : family_(family), n_(n_outputs), reg_(std::move(reg)), layers_(std::move(layers)), outputs_(std::move(outputs)) {
        validate();
    }

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] int n_outputs() const { return n_; }
    [[nodiscard]] const QubitRegister& qubits() const { return reg_; }
    [[nodiscard]] int num_qubits() const { return reg_.count(); }
    [[nodiscard]] const std::vector<Layer>& layers() const { return layers_; }
    /// Output qubits in recovery-slot order.
    [[nodiscard]] const std::vector<int>& outputs() const { return outputs_; }
    [[nodiscard]] bool constant_depth() const { return family_ != Family::Unitary; }

    [[nodiscard]] double duration_ns() const {
        double t = 0;
        for (const auto& l : layers_) t += l.duration_ns;
        return t;
    }

    [[nodiscard]] double step_duration(const std::string& step) const {
        double t = 0;
        for (const auto& l : layers_) {
            if (l.step == step) t += l.duration_ns;
        }
        return t;
    }

    [[nodiscard]] double layer_start(std::size_t layer) const {
        double t = 0;
        for (std::size_t i = 0; i < layer; ++i) t += layers_[i].duration_ns;
        return t;
    }

    /// Bell-measured qubits ordered z1, x1, z2, x2, ...
    [[nodiscard]] std::vector<int> bell_qubits() const {
        std::vector<int> out(static_cast<std::size_t>(2 * (n_ - 1)), -1);
        for (const auto& l : layers_) {
            for (const auto& op : l.ops) {
                if (const auto* m = std::get_if<MeasureOp>(&op); m && m->role != MeasureRole::Output) {
                    out[static_cast<std::size_t>(2 * (m->pair - 1) + (m->role == MeasureRole::X ? 1 : 0))] = m->qubit;
                }
            }
        }
        return constant_depth() ? out : std::vector<int>{};
    }

  private:
    void validate() const {
        if (n_ < 2) throw std::invalid_argument("Circuit: n must be >= 2");
        if (layers_.empty()) throw std::invalid_argument("Circuit: no layers");
        std::vector<int> measured_at(static_cast<std::size_t>(reg_.count()), -1);
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const auto& l = layers_[li];
            if (!(l.duration_ns >= 0)) throw std::invalid_argument("Circuit: negative layer duration");
            std::vector<bool> seen(static_cast<std::size_t>(reg_.count()), false);
            for (const auto& op : l.ops) {
                if (const auto* g = std::get_if<GateOp>(&op)) validate_gate(*g, reg_.count());
                for (int q : op_qubits(op)) {
                    if (q < 0 || q >= reg_.count()) throw std::invalid_argument("Circuit: qubit out of range");
                    auto uq = static_cast<std::size_t>(q);
                    if (seen[uq]) throw std::invalid_argument("Circuit: qubit used twice in one layer");
                    seen[uq] = true;
                    if (measured_at[uq] >= 0) throw std::invalid_argument("Circuit: operation after measurement");
                }
                if (const auto* m = std::get_if<MeasureOp>(&op)) measured_at[static_cast<std::size_t>(m->qubit)] = static_cast<int>(li);
            }
        }
        if (static_cast<int>(outputs_.size()) != n_) throw std::invalid_argument("Circuit: need n output qubits");
    }

    Family family_;
    int n_;
    QubitRegister reg_;
    std::vector<Layer> layers_;
    std::vector<int> outputs_;
};

// ---------------------------------------------------------------------------
// Builders

/// Constant-depth fan-out in four steps (prepare, entangle, measure,
/// feedforward). CNOTs appear as RY(-pi/2) . CZ . RY(pi/2) on the target.
inline Circuit build_constant_depth(int n, const TimingModel& timing, Family family) {
    if (n < 2) throw std::invalid_argument("build_constant_depth: n must be >= 2");
    if (family == Family::Unitary) throw std::invalid_argument("build_constant_depth: family must be constant-depth");
    timing.validate();
    constexpr double half_pi = std::numbers::pi / 2;
    QubitRegister reg = QubitRegister::constant_depth(n);
    const int groups = n - 1;
    auto a = [](int g) { return 3 * g - 2; };
    auto b = [](int g) { return 3 * g - 1; };
    auto c = [](int g) { return 3 * g; };
    auto bell_control = [&](int g) { return g == 1 ? 0 : c(g - 1); };

    std::vector<Layer> layers;

    // Prepare: input state, and per group H(b) . CNOT(b->a) . CNOT(b->c).
    Layer p0{timing.t_1q, "prepare", {InputPrepOp{0}}};
    Layer p1{timing.t_cz_total, "prepare", {}};
    Layer p2{timing.t_1q, "prepare", {}};
    Layer p3{timing.t_cz_total, "prepare", {}};
    for (int g = 1; g <= groups; ++g) {
        p0.ops.emplace_back(GateOp::h(b(g)));
        p0.ops.emplace_back(GateOp::ry(a(g), -half_pi));
        p0.ops.emplace_back(GateOp::ry(c(g), -half_pi));
        p1.ops.emplace_back(GateOp::cz(b(g), a(g)));
        p2.ops.emplace_back(GateOp::ry(a(g), half_pi));
        p3.ops.emplace_back(GateOp::cz(b(g), c(g)));
    }
    layers.push_back(std::move(p0));
    layers.push_back(std::move(p1));
    layers.push_back(std::move(p2));
    layers.push_back(std::move(p3));

    // Entangle: finish CNOT(b->c), then CNOT(control->a) and H on the control.
    Layer e0{timing.t_1q, "entangle", {}};
    Layer e1{timing.t_cz_total, "entangle", {}};
    Layer e2{timing.t_1q, "entangle", {}};
    for (int g = 1; g <= groups; ++g) {
        e0.ops.emplace_back(GateOp::ry(c(g), half_pi));
        e0.ops.emplace_back(GateOp::ry(a(g), -half_pi));
        e1.ops.emplace_back(GateOp::cz(bell_control(g), a(g)));
        e2.ops.emplace_back(GateOp::ry(a(g), half_pi));
        e2.ops.emplace_back(GateOp::h(bell_control(g)));
    }
    layers.push_back(std::move(e0));
    layers.push_back(std::move(e1));
    layers.push_back(std::move(e2));

    std::vector<int> outputs;
    for (int g = 1; g <= groups; ++g) outputs.push_back(b(g));
    outputs.push_back(c(groups));

    Layer m{timing.step_measure, "measure", {}};
    for (int g = 1; g <= groups; ++g) {
        m.ops.emplace_back(MeasureOp{bell_control(g), MeasureRole::Z, g});
        m.ops.emplace_back(MeasureOp{a(g), MeasureRole::X, g});
    }
    if (family == Family::PauliFrameUpdate) {
        for (int q : outputs) m.ops.emplace_back(MeasureOp{q, MeasureRole::Output, 0});
    }
    layers.push_back(std::move(m));

    Layer f{timing.step_feedforward, "feedforward", {}};
    if (family == Family::Feedforward) {
        for (int slot = 1; slot <= n; ++slot) f.ops.emplace_back(ConditionalOp{slot, outputs[static_cast<std::size_t>(slot - 1)], 2});
    } else {
        f.ops.emplace_back(FrameUpdateOp{});
    }
    layers.push_back(std::move(f));

    return {family, n, std::move(reg), std::move(layers), std::move(outputs)};
}

/// Nearest-neighbour CNOT ladder q1 -> q2 -> ... -> qn; q1 carries the input.
inline Circuit build_unitary(int n, const TimingModel& timing) {
    if (n < 2) throw std::invalid_argument("build_unitary: n must be >= 2");
    timing.validate();
    std::vector<Layer> layers;
    layers.push_back(Layer{timing.t_1q, "prepare", {InputPrepOp{0}}});
    for (int k = 0; k + 1 < n; ++k) {
        layers.push_back(Layer{timing.unitary_cnot_layer(), "ladder", {GateOp::cnot(k, k + 1)}});
    }
    std::vector<int> outputs(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) outputs[static_cast<std::size_t>(q)] = q;
    return {Family::Unitary, n, QubitRegister::chain(n), std::move(layers), std::move(outputs)};
}

inline Circuit build_circuit(Family family, int n, const TimingModel& timing = {}) {
    return family == Family::Unitary ? build_unitary(n, timing) : build_constant_depth(n, timing, family);
}

// ---------------------------------------------------------------------------
// Analysis

/// Closed-form occurrence counts of the dominating error sources; n_idle is in
/// units of t_CNOT and mu is the feedforward latency in the same units.
inline OccurrenceCounts table_counts(Family family, int n, double mu) {
    if (n < 2) throw std::invalid_argument("table_counts: n must be >= 2");
    switch (family) {
    case Family::Unitary: return {(n * n - 3.0 * n + 2) / 2, n - 1, 0};
    case Family::Feedforward: return {n * (mu + 2) - 1, 3 * n - 3, 2 * n - 2};
    case Family::PauliFrameUpdate: return {2.0 * n - 1, 3 * n - 3, 2 * n - 2};
    }
    throw std::invalid_argument("table_counts: unknown family");
}

/// CNOT and measurement counts come from the layers; n_idle from the closed form.
inline OccurrenceCounts count_occurrences(const Circuit& circuit, double mu) {
    OccurrenceCounts c;
    for (const auto& l : circuit.layers()) {
        for (const auto& op : l.ops) {
            if (const auto* g = std::get_if<GateOp>(&op); g && g->two_qubit()) ++c.n_cnot;
            if (const auto* m = std::get_if<MeasureOp>(&op); m && m->role != MeasureRole::Output) ++c.n_meas;
        }
    }
    c.n_idle = table_counts(circuit.family(), circuit.n_outputs(), mu).n_idle;
    return c;
}

/// Per qubit, every layer within its live window in which it is not busy.
/// The window runs from the end of layer 0 to the qubit's last operation of
/// any kind (measurement, gate or recovery slot).
inline std::vector<std::vector<IdleInterval>> idle_intervals(const Circuit& circuit) {
    const auto nq = static_cast<std::size_t>(circuit.num_qubits());
    const auto& layers = circuit.layers();
    std::vector<int> last(nq, -1);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        for (const auto& op : layers[li].ops) {
            for (int q : op_qubits(op)) last[static_cast<std::size_t>(q)] = static_cast<int>(li);
        }
    }
    std::vector<std::vector<IdleInterval>> out(nq);
    double start = layers.front().duration_ns;
    for (std::size_t li = 1; li < layers.size(); ++li) {
        std::vector<bool> busy(nq, false);
        for (const auto& op : layers[li].ops) {
            if (!op_is_busy(op)) continue;
            for (int q : op_qubits(op)) busy[static_cast<std::size_t>(q)] = true;
        }
        for (std::size_t q = 0; q < nq; ++q) {
            if (!busy[q] && static_cast<int>(li) <= last[q] && layers[li].duration_ns > 0) {
                out[q].push_back({start, layers[li].duration_ns, static_cast<int>(li)});
            }
        }
        start += layers[li].duration_ns;
    }
    return out;
}

inline double total_idle_ns(const Circuit& circuit) {
    double t = 0;
    for (const auto& per_qubit : idle_intervals(circuit)) {
        for (const auto& iv : per_qubit) t += iv.duration_ns;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Text form

namespace detail {
inline std::string fmt_num(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}
} // namespace detail

inline std::string describe(const Operation& op, const QubitRegister& reg) {
    return std::visit(
        [&](const auto& o) -> std::string {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, GateOp>) {
                std::string s = gate_name(o.kind);
                if (o.kind == GateKind::RX || o.kind == GateKind::RY || o.kind == GateKind::RZ) {
                    s += "(" + detail::fmt_num(o.angle) + ")";
                }
                s += " " + reg.label(o.q0).str();
                if (o.two_qubit()) s += " " + reg.label(o.q1).str();
                return s;
            } else if constexpr (std::is_same_v<T, InputPrepOp>) {
                return "PREP " + reg.label(o.qubit).str();
            } else if constexpr (std::is_same_v<T, MeasureOp>) {
                const char* role = o.role == MeasureRole::Z ? "z" : o.role == MeasureRole::X ? "x" : "out";
                std::string s = std::string("MEASURE ") + reg.label(o.qubit).str() + " " + role;
                if (o.pair > 0) s += std::to_string(o.pair);
                return s;
            } else if constexpr (std::is_same_v<T, ConditionalOp>) {
                return "RECOVER R" + std::to_string(o.slot) + " " + reg.label(o.qubit).str() + " dd=" + std::to_string(o.dd_pulses);
            } else {
                return "FRAME_UPDATE";
            }
        },
        op);
}

/// Operation list with layer timestamps in ns.
inline std::string to_text(const Circuit& c) {
    std::ostringstream os;
    os << "circuit " << to_string(c.family()) << " n=" << c.n_outputs() << " qubits=" << c.num_qubits() << "\n";
    os << "register";
    for (const auto& l : c.qubits().labels()) os << " " << l.str();
    os << "\noutputs";
    for (int q : c.outputs()) os << " " << c.qubits().label(q).str();
    os << "\n";
    double t = 0;
    for (std::size_t i = 0; i < c.layers().size(); ++i) {
        const auto& l = c.layers()[i];
        os << "layer " << i << " step=" << l.step << " start=" << detail::fmt_num(t) << "ns duration=" << detail::fmt_num(l.duration_ns) << "ns\n";
        for (const auto& op : l.ops) os << "  " << describe(op, c.qubits()) << "\n";
        t += l.duration_ns;
    }
    os << "total " << detail::fmt_num(t) << "ns\n";
    return os.str();
}

} // namespace fanout
