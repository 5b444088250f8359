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
 * Classical side of the constant-depth protocol: recovery rules, the
 * outcome lookup table and Pauli-frame tracking.
 *
 * Output q (1 <= q < n) receives Z^{z_q} X^{x_1 + ... + x_q}; output n
 * receives X^{x_1 + ... + x_{n-1}} only.
 */

#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fanout {

struct BellOutcome {
    std::vector<std::uint8_t> z;
    std::vector<std::uint8_t> x;

    [[nodiscard]] std::size_t pairs() const { return z.size(); }

    /// Key bits ordered z1 x1 z2 x2 ..., z1 most significant.
    [[nodiscard]] std::uint32_t key() const {
        std::uint32_t k = 0;
        for (std::size_t i = 0; i < z.size(); ++i) k = (k << 2) | (static_cast<std::uint32_t>(z[i] & 1U) << 1) | (x[i] & 1U);
        return k;
    }

    static BellOutcome from_key(std::uint32_t key, int pairs) {
        BellOutcome o;
        o.z.resize(static_cast<std::size_t>(pairs));
        o.x.resize(static_cast<std::size_t>(pairs));
        for (int i = pairs - 1; i >= 0; --i) {
            o.x[static_cast<std::size_t>(i)] = key & 1U;
            o.z[static_cast<std::size_t>(i)] = (key >> 1) & 1U;
            key >>= 2;
        }
        return o;
    }

    /// "z1x1 z2x2 ..." bit string without separators.
    [[nodiscard]] std::string bits() const {
        std::string s;
        for (std::size_t i = 0; i < z.size(); ++i) {
            s += static_cast<char>('0' + z[i]);
            s += static_cast<char>('0' + x[i]);
        }
        return s;
    }
};

/// One of I, X, Z, Z.X (Z applied after X).
struct RecoveryOp {
    bool apply_x = false;
    bool apply_z = false;

    /// Two-bit index: 0 = I, 1 = X, 2 = Z, 3 = Z.X.
    [[nodiscard]] int index() const { return (apply_z ? 2 : 0) | (apply_x ? 1 : 0); }
    static RecoveryOp from_index(int i) { return {(i & 1) != 0, (i & 2) != 0}; }
    friend bool operator==(const RecoveryOp&, const RecoveryOp&) = default;
};

inline std::vector<RecoveryOp> recovery_ops(const BellOutcome& outcome, int n) {
    if (n < 2) throw std::invalid_argument("recovery_ops: n must be >= 2");
    if (outcome.z.size() != outcome.x.size() || static_cast<int>(outcome.z.size()) != n - 1) {
        throw std::invalid_argument("recovery_ops: outcome must hold n-1 (z, x) pairs");
    }
    std::vector<RecoveryOp> ops(static_cast<std::size_t>(n));
    bool parity = false;
    for (int q = 1; q < n; ++q) {
        parity ^= outcome.x[static_cast<std::size_t>(q - 1)] != 0;
        ops[static_cast<std::size_t>(q - 1)] = {parity, outcome.z[static_cast<std::size_t>(q - 1)] != 0};
    }
    ops.back() = {parity, false};
    return ops;
}

/// Outcome key -> one two-bit recovery index per output qubit.
class LookupTable {
  public:
    explicit LookupTable(int n) : n_(n) {
        if (n < 2) throw std::invalid_argument("LookupTable: n must be >= 2");
        if (n > 16) throw std::invalid_argument("LookupTable: n too large for a dense table");
        const std::size_t size = std::size_t{1} << (2 * (n - 1));
        entries_.reserve(size);
        for (std::size_t key = 0; key < size; ++key) {
            std::vector<std::uint8_t> row;
            for (const auto& r : recovery_ops(BellOutcome::from_key(static_cast<std::uint32_t>(key), n - 1), n)) {
                row.push_back(static_cast<std::uint8_t>(r.index()));
            }
            entries_.push_back(std::move(row));
        }
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::vector<std::uint8_t>& operator[](std::uint32_t key) const { return entries_.at(key); }
    [[nodiscard]] const std::vector<std::uint8_t>& lookup(const BellOutcome& o) const { return entries_.at(o.key()); }

    /// One line per key: "<bits> <idx_1> ... <idx_n>".
    [[nodiscard]] std::string to_text() const {
        std::ostringstream os;
        os << "# key(z1x1...) recovery index per output (0=I 1=X 2=Z 3=ZX)\n";
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            os << BellOutcome::from_key(static_cast<std::uint32_t>(k), n_ - 1).bits();
            for (auto v : entries_[k]) os << ' ' << static_cast<int>(v);
            os << '\n';
        }
        return os.str();
    }

  private:
    int n_;
    std::vector<std::vector<std::uint8_t>> entries_;
};

inline LookupTable build_lookup_table(int n) { return LookupTable(n); }

struct PauliFrame {
    std::vector<RecoveryOp> flips; // x_flip / z_flip per output qubit

    static PauliFrame identity(int n) { return {std::vector<RecoveryOp>(static_cast<std::size_t>(n))}; }
    [[nodiscard]] bool is_identity() const {
        for (const auto& f : flips) {
            if (f.apply_x || f.apply_z) return false;
        }
        return true;
    }
    /// Pauli letters up to phase: X, Z or Y for Z.X.
    [[nodiscard]] std::string letters() const {
        std::string s;
        for (const auto& f : flips) s += f.apply_x ? (f.apply_z ? 'Y' : 'X') : (f.apply_z ? 'Z' : 'I');
        return s;
    }
    friend bool operator==(const PauliFrame&, const PauliFrame&) = default;
};

inline PauliFrame compose(const PauliFrame& a, const PauliFrame& b) {
    if (a.flips.size() != b.flips.size()) throw std::invalid_argument("compose: frame size mismatch");
    PauliFrame out = a;
    for (std::size_t i = 0; i < out.flips.size(); ++i) {
        out.flips[i].apply_x ^= b.flips[i].apply_x;
        out.flips[i].apply_z ^= b.flips[i].apply_z;
    }
    return out;
}

inline PauliFrame frame_update(const PauliFrame& frame, const BellOutcome& outcome) {
    const int n = static_cast<int>(frame.flips.size());
    return compose(frame, PauliFrame{recovery_ops(outcome, n)});
}

/// Sign picked up by measuring `observable` on a state that still carries
/// the frame's Paulis: -1 per anticommuting qubit pair.
inline std::pair<int, std::string> adjust_pauli(std::string_view observable, const PauliFrame& frame) {
    if (observable.size() != frame.flips.size()) throw std::invalid_argument("adjust_pauli: size mismatch");
    int sign = 1;
    for (std::size_t q = 0; q < observable.size(); ++q) {
        const char c = observable[q];
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') throw std::invalid_argument(std::string("adjust_pauli: invalid letter '") + c + "'");
        const auto& f = frame.flips[q];
        const bool anti_x = f.apply_x && (c == 'Z' || c == 'Y');
        const bool anti_z = f.apply_z && (c == 'X' || c == 'Y');
        if (anti_x != anti_z) sign = -sign;
    }
    return {sign, std::string(observable)};
}

} // namespace fanout
