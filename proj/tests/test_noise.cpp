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

#include "fanout/noise.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace fanout;

TEST(Depolarizing, Examples) {
    DensityState s(init_state(1));
    apply_depolarizing(s, {0}, 0.0);
    EXPECT_EQ(s.matrix()(0, 0), cplx(1.0));

    apply_depolarizing(s, {0}, 1.0);
    EXPECT_NEAR((s.matrix() - CMatrix::Identity(2, 2) / 2.0).norm(), 0, 1e-15);

    PureState p = init_state(1);
    apply_gate(p, GateOp::h(0));
    DensityState plus(p);
    apply_depolarizing(plus, {0}, 0.5);
    EXPECT_NEAR(expectation_pauli(plus, "X"), 0.5, 1e-15);
    EXPECT_NEAR(expectation_pauli(plus, "Y"), 0.0, 1e-15);
    EXPECT_NEAR(expectation_pauli(plus, "Z"), 0.0, 1e-15);
}

TEST(Depolarizing, RejectsBadArguments) {
    DensityState s = DensityState::maximally_mixed(2);
    EXPECT_THROW(apply_depolarizing(s, {0}, -0.1), std::invalid_argument);
    EXPECT_THROW(apply_depolarizing(s, {0}, 1.1), std::invalid_argument);
    EXPECT_THROW(apply_depolarizing(s, {0, 0}, 0.1), std::invalid_argument);
    EXPECT_THROW(apply_depolarizing(s, {2}, 0.1), std::invalid_argument);
    EXPECT_THROW(apply_depolarizing(s, {0, 1, 1}, 0.1), std::invalid_argument);
}

TEST(Depolarizing, MatchesPauliTwirlOracle) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 3;
        DensityState rho = oracle::random_density(n, rng);
        const double p = std::uniform_real_distribution<double>(0, 1)(rng);
        std::vector<int> t{trial % n};
        if (trial % 2) t.push_back((trial + 1) % n);
        const CMatrix expect = oracle::depolarize_twirl(rho.matrix(), t, n, p);
        apply_depolarizing(rho, t, p);
        EXPECT_NEAR((rho.matrix() - expect).norm(), 0.0, 1e-12);
        EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
        EXPECT_NEAR((rho.matrix() - rho.matrix().adjoint()).norm(), 0.0, 1e-12);
    }
}

TEST(Depolarizing, Composes) {
    std::mt19937_64 rng(22);
    const std::string letters = "IXYZ";
    for (int trial = 0; trial < 10; ++trial) {
        const DensityState rho = oracle::random_density(2, rng);
        const double p1 = 0.1 + 0.05 * trial, p2 = 0.3;
        DensityState twice = rho, once = rho;
        apply_depolarizing(twice, {0, 1}, p1);
        apply_depolarizing(twice, {0, 1}, p2);
        apply_depolarizing(once, {0, 1}, 1 - (1 - p1) * (1 - p2));
        for (int k = 1; k < 16; ++k) {
            const std::string s = {letters[static_cast<std::size_t>(k >> 2)], letters[static_cast<std::size_t>(k & 3)]};
            EXPECT_NEAR(expectation_pauli(twice, s), expectation_pauli(once, s), 1e-10);
        }
    }
}

TEST(PauliSampling, IdentityWhenNoiseless) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(sample_pauli_error(1, 0.0, rng), "I");
        EXPECT_EQ(sample_pauli_error(2, 0.0, rng), "II");
    }
}

TEST(PauliSampling, UniformOverNonIdentity) {
    Rng rng(2);
    constexpr int draws = 100000;
    std::map<std::string, int> freq;
    for (int i = 0; i < draws; ++i) ++freq[sample_pauli_error(1, 1.0, rng)];
    EXPECT_EQ(freq.count("I"), 0U);
    const double sigma = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
    for (const char* l : {"X", "Y", "Z"}) EXPECT_NEAR(freq[l], draws / 3.0, 5 * sigma) << l;

    std::map<std::string, int> two;
    for (int i = 0; i < 150000; ++i) ++two[sample_pauli_error(2, 1.0, rng)];
    EXPECT_EQ(two.size(), 15U);
    EXPECT_EQ(two.count("II"), 0U);
}

TEST(PauliSampling, TrajectoryAverageMatchesChannel) {
    std::mt19937_64 orng(23);
    const PureState psi = oracle::random_pure(1, orng);
    const double p = 0.4;
    DensityState channel(psi);
    apply_depolarizing(channel, {0}, p);

    Rng rng(24);
    constexpr int samples = 20000;
    for (const char* obs : {"X", "Y", "Z"}) {
        double sum = 0, sum2 = 0;
        for (int i = 0; i < samples; ++i) {
            PureState s = psi;
            const std::string e = sample_pauli_error(1, nontrivial_pauli_probability(p, 1), rng);
            apply_pauli(s, e);
            const double v = expectation_pauli(s, obs);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / samples;
        const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
        EXPECT_NEAR(mean, expectation_pauli(channel, obs), 5 * se + 1e-12) << obs;
    }
}

TEST(Readout, Examples) {
    Rng rng(3);
    const ConfusionMatrix perfect{};
    for (int b : {0, 1}) EXPECT_EQ(noisy_readout(b, perfect, rng), b);
    const ConfusionMatrix always{1.0, 0.0};
    for (int i = 0; i < 100; ++i) EXPECT_EQ(noisy_readout(1, always, rng), 0);
    EXPECT_THROW(noisy_readout(2, perfect, rng), std::invalid_argument);
}

TEST(Readout, FlipFrequency) {
    Rng rng(4);
    const auto c = ConfusionMatrix::symmetric(0.006);
    EXPECT_DOUBLE_EQ(c.readout_error(), 0.006);
    constexpr int draws = 1000000;
    int flips = 0;
    for (int i = 0; i < draws; ++i) flips += noisy_readout(i & 1, c, rng) != (i & 1);
    const double sigma = std::sqrt(draws * 0.006 * 0.994);
    EXPECT_NEAR(flips, draws * 0.006, 3 * sigma);
}

TEST(Readout, ConfusionProbabilities) {
    const ConfusionMatrix c{0.02, 0.01};
    EXPECT_DOUBLE_EQ(c.prob(0, 1), 0.02);
    EXPECT_DOUBLE_EQ(c.prob(1, 0), 0.01);
    EXPECT_DOUBLE_EQ(c.prob(1, 1), 0.98);
    EXPECT_DOUBLE_EQ(c.prob(0, 0), 0.99);
    EXPECT_DOUBLE_EQ(c.readout_error(), 0.015);
}

TEST(Idle, Examples) {
    EXPECT_EQ(idle_error_probability(0, 48000), 0.0);
    EXPECT_NEAR(idle_error_probability(48000, 48000), 1 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(idle_error_probability(48000, 48000), 0.6321, 1e-4);
    EXPECT_NEAR(idle_error_probability(106.7, 48000), 0.00222, 5e-6);
    EXPECT_EQ(idle_error_probability(1000, std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_NEAR(idle_error_probability(4800, 48000, IdleLaw::Linear), 0.1, 1e-15);
    EXPECT_THROW(idle_error_probability(-1, 48000), std::invalid_argument);
    EXPECT_THROW(idle_error_probability(1, 0), std::invalid_argument);
}

TEST(Idle, MonotoneFromZero) {
    for (auto law : {IdleLaw::Exponential, IdleLaw::Linear}) {
        double prev = 0;
        for (double t = 0; t < 200000; t += 997) {
            const double p = idle_error_probability(t, 48000, law);
            EXPECT_GE(p, prev);
            EXPECT_LE(p, 1.0);
            prev = p;
        }
    }
}

TEST(NoiseModel, Validation) {
    NoiseModel m;
    EXPECT_TRUE(m.is_noiseless());
    EXPECT_NO_THROW(m.validate());
    m.two_qubit_depol = 1.5;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = {};
    m.per_qubit_confusion = {{0.1, 0.2}};
    EXPECT_FALSE(m.is_noiseless());
    EXPECT_DOUBLE_EQ(m.confusion_for(0).p01, 0.1);
    EXPECT_DOUBLE_EQ(m.confusion_for(3).p01, 0.0);
}

TEST(NoiseModel, InfidelityConversion) {
    // A depolarizing channel with parameter p has average gate infidelity
    // p (d - 1) / d; check the inversion numerically on a single qubit.
    const double r = 0.0005;
    const double p = depol_from_infidelity(r, 1);
    EXPECT_NEAR(p, 0.001, 1e-15);
    EXPECT_NEAR(depol_from_infidelity(0.011, 2), 0.011 * 4 / 3, 1e-15);

    // Average fidelity over the six cardinal states equals 1 - r.
    double f = 0;
    for (const auto& in : InputState::cardinal()) {
        PureState psi = init_state(1);
        prepare_input(psi, 0, in);
        DensityState rho(psi);
        apply_depolarizing(rho, {0}, p);
        f += fidelity(rho, psi);
    }
    EXPECT_NEAR(1 - f / 6, r, 1e-12);
}
