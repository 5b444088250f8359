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

#include "fanout/engine.hpp"
#include "fanout/feedforward.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fanout;

namespace {

const RecoveryOp I{false, false}, X{true, false}, Z{false, true}, ZX{true, true};

BellOutcome outcome(std::vector<std::uint8_t> z, std::vector<std::uint8_t> x) { return {std::move(z), std::move(x)}; }

/// Reference recovery straight from the parity rule, written independently:
/// R_q = Z^{z_q} X^{x_1 + ... + x_q} for q < n and R_n = X^{x_1 + ... + x_{n-1}}.
std::vector<int> reference_indices(std::uint32_t key, int n) {
    std::vector<int> z(static_cast<std::size_t>(n - 1)), x(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) {
        const int shift = 2 * (n - 2 - i);
        z[static_cast<std::size_t>(i)] = static_cast<int>((key >> (shift + 1)) & 1U);
        x[static_cast<std::size_t>(i)] = static_cast<int>((key >> shift) & 1U);
    }
    std::vector<int> idx;
    int parity = 0;
    for (int q = 0; q < n - 1; ++q) {
        parity ^= x[static_cast<std::size_t>(q)];
        idx.push_back(2 * z[static_cast<std::size_t>(q)] + parity);
    }
    idx.push_back(parity);
    return idx;
}

} // namespace

TEST(Recovery, Examples) {
    EXPECT_EQ(recovery_ops(outcome({0}, {0}), 2), (std::vector<RecoveryOp>{I, I}));
    EXPECT_EQ(recovery_ops(outcome({1}, {1}), 2), (std::vector<RecoveryOp>{ZX, X}));
    EXPECT_EQ(recovery_ops(outcome({0, 0}, {1, 1}), 3), (std::vector<RecoveryOp>{X, I, I}));
    EXPECT_THROW(recovery_ops(outcome({0}, {0}), 3), std::invalid_argument);
    EXPECT_THROW(recovery_ops(outcome({0}, {0}), 1), std::invalid_argument);
}

TEST(Recovery, IndexEncoding) {
    EXPECT_EQ(I.index(), 0);
    EXPECT_EQ(X.index(), 1);
    EXPECT_EQ(Z.index(), 2);
    EXPECT_EQ(ZX.index(), 3);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(RecoveryOp::from_index(i).index(), i);
}

TEST(Recovery, LastOutputNeverNeedsZ) {
    for (int n = 2; n <= 6; ++n) {
        for (std::uint32_t k = 0; k < (1U << (2 * (n - 1))); ++k) {
            EXPECT_FALSE(recovery_ops(BellOutcome::from_key(k, n - 1), n).back().apply_z);
        }
    }
}

TEST(Outcome, KeyRoundTripAndOrdering) {
    const BellOutcome o = outcome({1, 0}, {0, 1});
    EXPECT_EQ(o.key(), 0b1001U);
    EXPECT_EQ(o.bits(), "1001");
    for (std::uint32_t k = 0; k < 64; ++k) EXPECT_EQ(BellOutcome::from_key(k, 3).key(), k);
}

TEST(LookupTable, SizesAndZeroKey) {
    EXPECT_EQ(build_lookup_table(2).size(), 4U);
    EXPECT_EQ(build_lookup_table(4).size(), 64U);
    for (auto v : build_lookup_table(5)[0]) EXPECT_EQ(v, 0);
    EXPECT_THROW(build_lookup_table(1), std::invalid_argument);
}

TEST(LookupTable, EqualsRecoveryOpsAndReference) {
    for (int n = 2; n <= 6; ++n) {
        const LookupTable t(n);
        for (std::uint32_t k = 0; k < t.size(); ++k) {
            const auto ops = recovery_ops(BellOutcome::from_key(k, n - 1), n);
            const auto ref = reference_indices(k, n);
            ASSERT_EQ(t[k].size(), static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q) {
                EXPECT_EQ(t[k][static_cast<std::size_t>(q)], ops[static_cast<std::size_t>(q)].index());
                EXPECT_EQ(t[k][static_cast<std::size_t>(q)], ref[static_cast<std::size_t>(q)]);
            }
        }
    }
}

TEST(LookupTable, TextForm) {
    const std::string expect =
        "# key(z1x1...) recovery index per output (0=I 1=X 2=Z 3=ZX)\n"
        "00 0 0\n"
        "01 1 1\n"
        "10 2 0\n"
        "11 3 1\n";
    EXPECT_EQ(build_lookup_table(2).to_text(), expect);
}

TEST(Frame, UpdateExamples) {
    const PauliFrame id = PauliFrame::identity(2);
    EXPECT_TRUE(frame_update(id, outcome({0}, {0})).is_identity());
    const PauliFrame f = frame_update(id, outcome({1}, {1}));
    EXPECT_EQ(f.flips[0], ZX);
    EXPECT_EQ(f.flips[1], X);
    EXPECT_EQ(f.letters(), "YX");
    EXPECT_TRUE(frame_update(f, outcome({1}, {1})).is_identity());
}

TEST(Frame, AdjustExamples) {
    EXPECT_EQ(adjust_pauli("XYZ", PauliFrame::identity(3)).first, 1);
    PauliFrame fx = PauliFrame::identity(2);
    fx.flips[0] = X;
    EXPECT_EQ(adjust_pauli("ZI", fx).first, -1);
    PauliFrame fz = PauliFrame::identity(2);
    fz.flips[0] = Z;
    EXPECT_EQ(adjust_pauli("XX", fz).first, -1);
    EXPECT_EQ(adjust_pauli("ZZ", fz).first, 1);
    EXPECT_THROW(adjust_pauli("Z", fz), std::invalid_argument);
}

// Physical recovery pulses versus classical reinterpretation, for every
// outcome and every Pauli observable on a random pre-recovery state.
TEST(Frame, PhysicalRecoveryEqualsFrameReinterpretation) {
    std::mt19937_64 rng(31);
    for (int n = 2; n <= 4; ++n) {
        const auto paulis = [&] {
            std::vector<std::string> out{""};
            for (int q = 0; q < n; ++q) {
                std::vector<std::string> next;
                for (const auto& s : out) {
                    for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(s + c);
                }
                out = next;
            }
            return out;
        }();
        const PureState psi = oracle::random_pure(n, rng);
        for (std::uint32_t k = 0; k < (1U << (2 * (n - 1))); ++k) {
            const BellOutcome o = BellOutcome::from_key(k, n - 1);
            PureState physical = psi;
            const auto ops = recovery_ops(o, n);
            for (int q = 0; q < n; ++q) {
                for (const auto& g : detail::recovery_pulses(ops[static_cast<std::size_t>(q)], q)) apply_gate(physical, g);
            }
            const PauliFrame frame = frame_update(PauliFrame::identity(n), o);
            for (const auto& p : paulis) {
                const auto [sign, obs] = adjust_pauli(p, frame);
                EXPECT_NEAR(expectation_pauli(physical, p), sign * expectation_pauli(psi, obs), 1e-9) << n << ' ' << k << ' ' << p;
            }
        }
    }
}

TEST(Frame, ComposeIsXor) {
    PauliFrame a = PauliFrame::identity(3), b = PauliFrame::identity(3);
    a.flips[0] = ZX;
    b.flips[0] = X;
    b.flips[2] = Z;
    const PauliFrame c = compose(a, b);
    EXPECT_EQ(c.letters(), "ZIZ");
    EXPECT_TRUE(compose(c, c).is_identity());
    EXPECT_THROW(compose(a, PauliFrame::identity(2)), std::invalid_argument);
}
