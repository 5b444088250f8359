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
 * Exact state backends: pure statevectors and density matrices over an
 * ordered qubit register.
 *
 * Basis convention: qubit 0 is the most significant bit of a basis index,
 * i.e. in a register of N qubits the bit of qubit q in index i is
 * (i >> (N - 1 - q)) & 1. All comparisons between states go through
 * fidelities or expectation values, never through raw amplitudes.
 */

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fanout {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using Rng = std::mt19937_64;

/// Largest register the density-matrix backend accepts.
inline constexpr int kMaxDensityQubits = 12;

/// Uniform double in [0, 1) with 53 random bits, independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// Register

enum class Role { Input, A, B, C, Chain };

struct QubitLabel {
    Role role;
    int group; // 0 for the input qubit, 1-based group/position otherwise

    [[nodiscard]] std::string str() const {
        switch (role) {
        case Role::Input: return "in";
        case Role::A: return "a" + std::to_string(group);
        case Role::B: return "b" + std::to_string(group);
        case Role::C: return "c" + std::to_string(group);
        case Role::Chain: return "q" + std::to_string(group);
        }
        return "?";
    }
    friend bool operator==(const QubitLabel&, const QubitLabel&) = default;
};

class QubitRegister {
  public:
    explicit QubitRegister(std::vector<QubitLabel> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) {
            throw std::invalid_argument("QubitRegister: count must be >= 1");
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            for (std::size_t j = i + 1; j < labels_.size(); ++j) {
                if (labels_[i] == labels_[j]) {
                    throw std::invalid_argument("QubitRegister: duplicate label " + labels_[i].str());
                }
            }
        }
    }

    /// Plain register q1..qN.
    static QubitRegister chain(int count) {
        if (count < 1) throw std::invalid_argument("QubitRegister: count must be >= 1");
        std::vector<QubitLabel> l;
        for (int i = 1; i <= count; ++i) l.push_back({Role::Chain, i});
        return QubitRegister(std::move(l));
    }

    /// Linear array in, a1, b1, c1, a2, b2, c2, ... with 3n-2 qubits.
    static QubitRegister constant_depth(int n_outputs) {
        if (n_outputs < 2) throw std::invalid_argument("QubitRegister: n must be >= 2");
        std::vector<QubitLabel> l{{Role::Input, 0}};
        for (int g = 1; g < n_outputs; ++g) {
            l.push_back({Role::A, g});
            l.push_back({Role::B, g});
            l.push_back({Role::C, g});
        }
        return QubitRegister(std::move(l));
    }

    [[nodiscard]] int count() const { return static_cast<int>(labels_.size()); }
    [[nodiscard]] const std::vector<QubitLabel>& labels() const { return labels_; }
    [[nodiscard]] const QubitLabel& label(int q) const { return labels_.at(static_cast<std::size_t>(q)); }

    [[nodiscard]] int index_of(const QubitLabel& l) const {
        auto it = std::find(labels_.begin(), labels_.end(), l);
        if (it == labels_.end()) throw std::out_of_range("QubitRegister: no qubit " + l.str());
        return static_cast<int>(it - labels_.begin());
    }

  private:
    std::vector<QubitLabel> labels_;
};

// ---------------------------------------------------------------------------
// States

inline std::size_t bit_of(std::size_t index, int qubit, int num_qubits) {
    return (index >> (num_qubits - 1 - qubit)) & 1U;
}

inline std::size_t mask_of(int qubit, int num_qubits) {
    return std::size_t{1} << (num_qubits - 1 - qubit);
}

class PureState {
  public:
    PureState(int num_qubits, CVector amplitudes)
        : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
        if (num_qubits_ < 1 || amps_.size() != (Eigen::Index{1} << num_qubits_)) {
            throw std::invalid_argument("PureState: amplitude count must be 2^num_qubits");
        }
    }

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    [[nodiscard]] const CVector& amplitudes() const { return amps_; }
    CVector& amplitudes() { return amps_; }
    [[nodiscard]] double norm() const { return amps_.norm(); }

  private:
    int num_qubits_;
    CVector amps_;
};

class DensityState {
  public:
    DensityState(int num_qubits, CMatrix matrix) : num_qubits_(num_qubits), rho_(std::move(matrix)) {
        const Eigen::Index d = Eigen::Index{1} << num_qubits_;
        if (num_qubits_ < 1 || rho_.rows() != d || rho_.cols() != d) {
            throw std::invalid_argument("DensityState: matrix must be 2^n x 2^n");
        }
    }

    explicit DensityState(const PureState& psi)
        : num_qubits_(psi.num_qubits()), rho_(psi.amplitudes() * psi.amplitudes().adjoint()) {
        if (num_qubits_ > kMaxDensityQubits) {
            throw std::invalid_argument("DensityState: more than 12 qubits is not supported");
        }
    }

    static DensityState maximally_mixed(int num_qubits) {
        const Eigen::Index d = Eigen::Index{1} << num_qubits;
        return {num_qubits, CMatrix::Identity(d, d) / static_cast<double>(d)};
    }

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
    [[nodiscard]] const CMatrix& matrix() const { return rho_; }
    CMatrix& matrix() { return rho_; }
    [[nodiscard]] double trace() const { return rho_.trace().real(); }

  private:
    int num_qubits_;
    CMatrix rho_;
};

/// Checks Hermiticity, unit trace and positivity at the given tolerances.
inline bool is_valid_density(const DensityState& s, double herm_tol = 1e-12, double trace_tol = 1e-12,
                             double eig_tol = 1e-10) {
    const CMatrix& m = s.matrix();
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
    if (std::abs(m.trace() - cplx{1.0}) > trace_tol) return false;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -eig_tol;
}

// ---------------------------------------------------------------------------
// Gates

enum class GateKind { RX, RY, RZ, H, X, Y, Z, CZ, CNOT };

struct GateOp {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;       // second target for CZ/CNOT (q0 is the control for CNOT)
    double angle = 0.; // radians, rotations only

    [[nodiscard]] bool two_qubit() const { return kind == GateKind::CZ || kind == GateKind::CNOT; }

    static GateOp rx(int q, double a) { return {GateKind::RX, q, -1, a}; }
    static GateOp ry(int q, double a) { return {GateKind::RY, q, -1, a}; }
    static GateOp rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
    static GateOp h(int q) { return {GateKind::H, q}; }
    static GateOp x(int q) { return {GateKind::X, q}; }
    static GateOp y(int q) { return {GateKind::Y, q}; }
    static GateOp z(int q) { return {GateKind::Z, q}; }
    static GateOp cz(int a, int b) { return {GateKind::CZ, a, b}; }
    static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target}; }
};

inline std::string gate_name(GateKind k) {
    switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    }
    return "?";
}

inline void validate_gate(const GateOp& g, int num_qubits) {
    auto in_range = [&](int q) { return q >= 0 && q < num_qubits; };
    if (!in_range(g.q0)) throw std::invalid_argument("gate target out of range");
    if (g.two_qubit()) {
        if (!in_range(g.q1)) throw std::invalid_argument("gate second target out of range");
        if (g.q0 == g.q1) throw std::invalid_argument(gate_name(g.kind) + " requires two distinct targets");
    }
    if (!std::isfinite(g.angle)) throw std::invalid_argument("rotation angle must be finite");
}

inline Mat2 single_qubit_matrix(const GateOp& g) {
    using std::cos, std::sin;
    const cplx i{0., 1.};
    const double c = cos(g.angle / 2), s = sin(g.angle / 2);
    const double r = std::numbers::sqrt2 / 2;
    Mat2 m;
    switch (g.kind) {
    case GateKind::RX: m << c, -i * s, -i * s, c; break;
    case GateKind::RY: m << c, -s, s, c; break;
    case GateKind::RZ: m << std::exp(-i * (g.angle / 2)), 0, 0, std::exp(i * (g.angle / 2)); break;
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::Y: m << 0, -i, i, 0; break;
    case GateKind::Z: m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("not a single-qubit gate");
    }
    return m;
}

namespace detail {

// Plain product; std::complex operator* goes through the NaN-recovering libcall.
inline cplx cmul(const cplx& a, const cplx& b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

inline void apply_to_vector(cplx* v, const Mat2& u, int qubit, int num_qubits) {
    const std::size_t stride = mask_of(qubit, num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t k = base; k < base + stride; ++k) {
            const cplx a0 = v[k], a1 = v[k + stride];
            v[k] = cmul(u(0, 0), a0) + cmul(u(0, 1), a1);
            v[k + stride] = cmul(u(1, 0), a0) + cmul(u(1, 1), a1);
        }
    }
}

// Applies u to the qubit axis of every column of m (rows indexed by basis states).
inline void left_apply(CMatrix& m, const Mat2& u, int qubit, int num_qubits) {
    for (Eigen::Index col = 0; col < m.cols(); ++col) apply_to_vector(m.col(col).data(), u, qubit, num_qubits);
}

// m -> m * u^dagger acting on the qubit axis of the column index.
inline void right_apply_adjoint(CMatrix& m, const Mat2& u, int qubit, int num_qubits) {
    const std::size_t stride = mask_of(qubit, num_qubits);
    const std::size_t dim = std::size_t{1} << num_qubits;
    const Mat2 uc = u.conjugate();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t k = base; k < base + stride; ++k) {
            auto c0 = m.col(static_cast<Eigen::Index>(k));
            auto c1 = m.col(static_cast<Eigen::Index>(k + stride));
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                const cplx a0 = c0(r), a1 = c1(r);
                c0(r) = cmul(uc(0, 0), a0) + cmul(uc(0, 1), a1);
                c1(r) = cmul(uc(1, 0), a0) + cmul(uc(1, 1), a1);
            }
        }
    }
}

inline std::size_t cnot_permute(std::size_t i, std::size_t cmask, std::size_t tmask) {
    return (i & cmask) ? (i ^ tmask) : i;
}

} // namespace detail

inline void apply_matrix(PureState& s, const Mat2& u, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::invalid_argument("qubit index out of range");
    detail::apply_to_vector(s.amplitudes().data(), u, qubit, s.num_qubits());
}

inline void apply_matrix(DensityState& s, const Mat2& u, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::invalid_argument("qubit index out of range");
    detail::left_apply(s.matrix(), u, qubit, s.num_qubits());
    detail::right_apply_adjoint(s.matrix(), u, qubit, s.num_qubits());
}

inline void apply_gate(PureState& s, const GateOp& g) {
    const int n = s.num_qubits();
    validate_gate(g, n);
    if (!g.two_qubit()) {
        apply_matrix(s, single_qubit_matrix(g), g.q0);
        return;
    }
    CVector& a = s.amplitudes();
    const std::size_t m0 = mask_of(g.q0, n), m1 = mask_of(g.q1, n);
    if (g.kind == GateKind::CZ) {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if ((i & m0) && (i & m1)) a(static_cast<Eigen::Index>(i)) *= -1.0;
        }
    } else {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if ((i & m0) && !(i & m1)) std::swap(a(static_cast<Eigen::Index>(i)), a(static_cast<Eigen::Index>(i | m1)));
        }
    }
}

inline void apply_gate(DensityState& s, const GateOp& g) {
    const int n = s.num_qubits();
    validate_gate(g, n);
    if (!g.two_qubit()) {
        apply_matrix(s, single_qubit_matrix(g), g.q0);
        return;
    }
    CMatrix& rho = s.matrix();
    const std::size_t m0 = mask_of(g.q0, n), m1 = mask_of(g.q1, n);
    const auto d = static_cast<Eigen::Index>(s.dim());
    if (g.kind == GateKind::CZ) {
        auto sign = [&](Eigen::Index i) {
            const auto u = static_cast<std::size_t>(i);
            return ((u & m0) && (u & m1)) ? -1.0 : 1.0;
        };
        for (Eigen::Index c = 0; c < d; ++c) {
            const double sc = sign(c);
            for (Eigen::Index r = 0; r < d; ++r) rho(r, c) *= sign(r) * sc;
        }
    } else {
        CMatrix out(d, d);
        for (Eigen::Index c = 0; c < d; ++c) {
            const auto pc = static_cast<Eigen::Index>(detail::cnot_permute(static_cast<std::size_t>(c), m0, m1));
            for (Eigen::Index r = 0; r < d; ++r) {
                const auto pr = static_cast<Eigen::Index>(detail::cnot_permute(static_cast<std::size_t>(r), m0, m1));
                out(pr, pc) = rho(r, c);
            }
        }
        rho = std::move(out);
    }
}

// ---------------------------------------------------------------------------
// Preparation

struct InputState {
    double theta = 0.; // polar angle in [0, pi]
    double phi = 0.;   // azimuthal angle in [0, 2 pi)

    /// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    [[nodiscard]] cplx alpha() const { return std::cos(theta / 2); }
    [[nodiscard]] cplx beta() const { return std::polar(std::sin(theta / 2), phi); }

    /// Unitary taking |0> to the input state.
    [[nodiscard]] Mat2 preparation() const {
        Mat2 u;
        const cplx e = std::polar(1.0, phi);
        u << std::cos(theta / 2), -std::sin(theta / 2), e * std::sin(theta / 2), e * std::cos(theta / 2);
        return u;
    }

    /// The six cardinal states |0>, |1>, |+>, |->, |+i>, |-i>.
    static std::vector<InputState> cardinal() {
        constexpr double pi = std::numbers::pi;
        return {{0., 0.}, {pi, 0.}, {pi / 2, 0.}, {pi / 2, pi}, {pi / 2, pi / 2}, {pi / 2, 3 * pi / 2}};
    }
};

inline PureState init_state(const QubitRegister& reg) {
    CVector a = CVector::Zero(Eigen::Index{1} << reg.count());
    a(0) = 1.0;
    return {reg.count(), std::move(a)};
}

inline PureState init_state(int num_qubits) { return init_state(QubitRegister::chain(num_qubits)); }

template <class State>
void prepare_input(State& s, int qubit, const InputState& in) {
    apply_matrix(s, in.preparation(), qubit);
}

/// alpha|0...0> + beta|1...1> over n qubits.
inline PureState ghz_like(int n, const InputState& in) {
    CVector a = CVector::Zero(Eigen::Index{1} << n);
    a(0) = in.alpha();
    a(a.size() - 1) += in.beta();
    return {n, std::move(a)};
}

// ---------------------------------------------------------------------------
// Measurement

template <class State>
struct MeasureResult {
    int outcome;
    State post_state;
    double probability;
};

inline double probability_of(const PureState& s, int qubit, int outcome) {
    double p = 0;
    const auto& a = s.amplitudes();
    for (std::size_t i = 0; i < s.dim(); ++i) {
        if (static_cast<int>(bit_of(i, qubit, s.num_qubits())) == outcome) p += std::norm(a(static_cast<Eigen::Index>(i)));
    }
    return p;
}

inline double probability_of(const DensityState& s, int qubit, int outcome) {
    double p = 0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        if (static_cast<int>(bit_of(i, qubit, s.num_qubits())) == outcome) p += s.matrix()(k, k).real();
    }
    return p;
}

inline constexpr double kBranchCutoff = 1e-14;

/// Projects onto the given outcome and renormalizes. Throws when the branch
/// has (numerically) zero probability.
template <class State>
MeasureResult<State> project_z(const State& s, int qubit, int outcome) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::invalid_argument("qubit index out of range");
    if (outcome != 0 && outcome != 1) throw std::invalid_argument("outcome must be 0 or 1");
    const double p = probability_of(s, qubit, outcome);
    if (p < kBranchCutoff) throw std::domain_error("projection onto a zero-probability outcome");
    State post = s;
    const int n = s.num_qubits();
    if constexpr (std::is_same_v<State, PureState>) {
        auto& a = post.amplitudes();
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if (static_cast<int>(bit_of(i, qubit, n)) != outcome) a(static_cast<Eigen::Index>(i)) = 0;
        }
        a /= std::sqrt(p);
    } else {
        auto& m = post.matrix();
        for (std::size_t r = 0; r < s.dim(); ++r) {
            for (std::size_t c = 0; c < s.dim(); ++c) {
                if (static_cast<int>(bit_of(r, qubit, n)) != outcome || static_cast<int>(bit_of(c, qubit, n)) != outcome) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0;
                }
            }
        }
        m /= p;
    }
    return {outcome, std::move(post), p};
}

template <class State>
MeasureResult<State> measure_z(const State& s, int qubit, Rng& rng) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::invalid_argument("qubit index out of range");
    const double p1 = probability_of(s, qubit, 1);
    const int outcome = uniform01(rng) < p1 ? 1 : 0;
    return project_z(s, qubit, outcome);
}

/// Both measurement branches, dropping those with probability below 1e-14.
template <class State>
std::vector<MeasureResult<State>> branch_z(const State& s, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits()) throw std::invalid_argument("qubit index out of range");
    std::vector<MeasureResult<State>> out;
    for (int b = 0; b < 2; ++b) {
        if (probability_of(s, qubit, b) >= kBranchCutoff) out.push_back(project_z(s, qubit, b));
    }
    return out;
}

/// Unnormalized projection onto `outcome` followed by removal of the qubit:
/// returns the branch probability and the normalized reduced state.
inline std::pair<double, DensityState> collapse_and_discard(const DensityState& s, int qubit, int outcome) {
    const int n = s.num_qubits();
    if (n < 2) throw std::invalid_argument("collapse_and_discard: need at least two qubits");
    const std::size_t hi_mask = ~std::size_t{0} << (n - 1 - qubit);
    const std::size_t lo_mask = ~hi_mask;
    const std::size_t dim = std::size_t{1} << (n - 1);
    auto expand = [&](std::size_t j) {
        return ((j & hi_mask) << 1) | (static_cast<std::size_t>(outcome) << (n - 1 - qubit)) | (j & lo_mask);
    };
    CMatrix sub(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        const auto fc = static_cast<Eigen::Index>(expand(c));
        for (std::size_t r = 0; r < dim; ++r) {
            sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.matrix()(static_cast<Eigen::Index>(expand(r)), fc);
        }
    }
    const double p = sub.trace().real();
    if (p > 0) sub /= p;
    return {p, DensityState(n - 1, std::move(sub))};
}

// ---------------------------------------------------------------------------
// Pauli expectations

inline void check_pauli_string(std::string_view p, int num_qubits) {
    if (static_cast<int>(p.size()) != num_qubits) throw std::invalid_argument("Pauli string length must equal register size");
    for (char c : p) {
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument(std::string("invalid Pauli letter '") + c + "'");
    }
}

namespace detail {

struct PauliAction {
    std::size_t flip = 0;        // X/Y bit-flip mask
    std::vector<int> qubits;     // qubits with Y or Z
    std::vector<char> letters;
};

inline PauliAction pauli_action(std::string_view p, int n) {
    PauliAction a;
    for (int q = 0; q < n; ++q) {
        const char c = p[static_cast<std::size_t>(q)];
        if (c == 'X' || c == 'Y') a.flip |= mask_of(q, n);
        if (c == 'Y' || c == 'Z') {
            a.qubits.push_back(q);
            a.letters.push_back(c);
        }
    }
    return a;
}

// Phase picked up by basis state |i> under P: P|i> = phase(i)|i ^ flip>.
inline cplx pauli_phase(const PauliAction& a, std::size_t i, int n) {
    cplx ph{1.0};
    for (std::size_t k = 0; k < a.qubits.size(); ++k) {
        const bool one = bit_of(i, a.qubits[k], n) != 0;
        if (a.letters[k] == 'Z') {
            if (one) ph = -ph;
        } else {
            ph *= one ? cplx{0, -1} : cplx{0, 1};
        }
    }
    return ph;
}

} // namespace detail

inline double expectation_pauli(const PureState& s, std::string_view pauli) {
    const int n = s.num_qubits();
    check_pauli_string(pauli, n);
    const auto act = detail::pauli_action(pauli, n);
    const auto& a = s.amplitudes();
    cplx acc{0.};
    for (std::size_t i = 0; i < s.dim(); ++i) {
        acc += std::conj(a(static_cast<Eigen::Index>(i ^ act.flip))) * detail::pauli_phase(act, i, n) * a(static_cast<Eigen::Index>(i));
    }
    return acc.real();
}

/// Tr(rho P).
inline double expectation_pauli(const DensityState& s, std::string_view pauli) {
    const int n = s.num_qubits();
    check_pauli_string(pauli, n);
    const auto act = detail::pauli_action(pauli, n);
    cplx acc{0.};
    for (std::size_t i = 0; i < s.dim(); ++i) {
        acc += s.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i ^ act.flip)) * detail::pauli_phase(act, i, n);
    }
    return acc.real();
}

/// Conjugates the state by a Pauli string: psi -> P psi, rho -> P rho P.
inline void apply_pauli(PureState& s, std::string_view pauli) {
    const int n = s.num_qubits();
    check_pauli_string(pauli, n);
    const auto act = detail::pauli_action(pauli, n);
    CVector out(s.amplitudes().size());
    for (std::size_t i = 0; i < s.dim(); ++i) {
        out(static_cast<Eigen::Index>(i ^ act.flip)) = detail::pauli_phase(act, i, n) * s.amplitudes()(static_cast<Eigen::Index>(i));
    }
    s.amplitudes() = std::move(out);
}

inline void apply_pauli(DensityState& s, std::string_view pauli) {
    const int n = s.num_qubits();
    check_pauli_string(pauli, n);
    const auto act = detail::pauli_action(pauli, n);
    const auto d = static_cast<Eigen::Index>(s.dim());
    std::vector<cplx> ph(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) ph[i] = detail::pauli_phase(act, i, n);
    CMatrix out(d, d);
    for (std::size_t c = 0; c < s.dim(); ++c) {
        const auto oc = static_cast<Eigen::Index>(c ^ act.flip);
        const cplx pc = std::conj(ph[c]);
        for (std::size_t r = 0; r < s.dim(); ++r) {
            out(static_cast<Eigen::Index>(r ^ act.flip), oc) = ph[r] * s.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * pc;
        }
    }
    s.matrix() = std::move(out);
}

/// Dense matrix of a Pauli string in the register's basis convention.
inline CMatrix pauli_matrix(std::string_view pauli) {
    const int n = static_cast<int>(pauli.size());
    check_pauli_string(pauli, n);
    const auto act = detail::pauli_action(pauli, n);
    const auto d = Eigen::Index{1} << n;
    CMatrix m = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < static_cast<std::size_t>(d); ++i) {
        m(static_cast<Eigen::Index>(i ^ act.flip), static_cast<Eigen::Index>(i)) = detail::pauli_phase(act, i, n);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Partial trace and fidelity

/// Traces out the listed qubits; the remaining qubits keep their relative order.
inline DensityState discard_qubits(const DensityState& s, std::span<const int> qubits) {
    const int n = s.num_qubits();
    std::vector<bool> drop(static_cast<std::size_t>(n), false);
    for (int q : qubits) {
        if (q < 0 || q >= n) throw std::invalid_argument("discard_qubits: qubit out of range");
        drop[static_cast<std::size_t>(q)] = true;
    }
    std::vector<int> keep, gone;
    for (int q = 0; q < n; ++q) (drop[static_cast<std::size_t>(q)] ? gone : keep).push_back(q);
    if (gone.empty()) return s;
    if (keep.empty()) throw std::invalid_argument("discard_qubits: cannot trace out every qubit");

    const int nk = static_cast<int>(keep.size()), ng = static_cast<int>(gone.size());
    auto compose = [&](std::size_t kbits, std::size_t gbits) {
        std::size_t idx = 0;
        for (int j = 0; j < nk; ++j) {
            if ((kbits >> (nk - 1 - j)) & 1U) idx |= mask_of(keep[static_cast<std::size_t>(j)], n);
        }
        for (int j = 0; j < ng; ++j) {
            if ((gbits >> (ng - 1 - j)) & 1U) idx |= mask_of(gone[static_cast<std::size_t>(j)], n);
        }
        return static_cast<Eigen::Index>(idx);
    };
    const std::size_t dk = std::size_t{1} << nk, dg = std::size_t{1} << ng;
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; ++r) {
        for (std::size_t c = 0; c < dk; ++c) {
            cplx acc{0.};
            for (std::size_t g = 0; g < dg; ++g) acc += s.matrix()(compose(r, g), compose(c, g));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    }
    return {nk, std::move(out)};
}

namespace detail {

inline CMatrix psd_sqrt(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-10) throw std::domain_error("fidelity: matrix has a negative eigenvalue below -1e-10");
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace detail

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double fidelity(const DensityState& rho, const DensityState& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    const CMatrix sr = detail::psd_sqrt(rho.matrix());
    CMatrix inner = sr * sigma.matrix() * sr;
    inner = (inner + inner.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
    double tr = 0;
    for (double l : es.eigenvalues()) tr += std::sqrt(std::max(l, 0.0));
    return std::clamp(tr * tr, 0.0, 1.0);
}

/// <psi|rho|psi>, the Uhlmann fidelity against a pure state.
inline double fidelity(const DensityState& rho, const PureState& psi) {
    if (rho.dim() != psi.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    const cplx v = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
    return std::clamp(v.real(), 0.0, 1.0);
}

inline double fidelity(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    return std::clamp(std::norm(a.amplitudes().dot(b.amplitudes())), 0.0, 1.0);
}

inline double trace_distance(const CMatrix& a, const CMatrix& b) {
    CMatrix d = a - b;
    d = (d + d.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(d, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum() / 2;
}

} // namespace fanout
