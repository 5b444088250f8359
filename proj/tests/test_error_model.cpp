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
#include "fanout/error_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace fanout;

namespace {

constexpr Family kFamilies[] = {Family::Unitary, Family::Feedforward, Family::PauliFrameUpdate};

/// Direct evaluation of the product form from the raw counts.
double product_form(const ErrorRates& r, Family f, int n) {
    const auto c = table_counts(f, n, r.mu);
    return 1 - std::pow(1 - r.eps_cnot_avg, c.n_cnot) * std::pow(1 - r.eps_meas_avg, c.n_meas) *
                   std::pow(1 - r.eps_idle_avg(), c.n_idle);
}

} // namespace

TEST(Rates, Defaults) {
    const ErrorRates r;
    EXPECT_NEAR(r.t_cnot_ns(), 800 / 7.5, 1e-12);
    EXPECT_NEAR(r.eps_idle_avg(), 1 - std::exp(-(800 / 7.5) / 48000), 1e-15);
    EXPECT_NEAR(r.eps_idle_avg(), 0.00222, 5e-6);
    ErrorRates slow = r;
    slow.t_cnot_override_ns = 176;
    EXPECT_EQ(slow.t_cnot_ns(), 176.0);
    EXPECT_GT(slow.eps_idle_avg(), r.eps_idle_avg());
}

TEST(Rates, Validation) {
    ErrorRates r;
    r.eps_meas_avg = -0.1;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r = {};
    r.mu = 0;
    EXPECT_THROW(r.validate(), std::invalid_argument);
    r = {};
    r.cnot_errors = {0.5, 2.0};
    EXPECT_THROW(r.validate(), std::invalid_argument);
    EXPECT_NO_THROW(ErrorRates::noiseless().validate());
}

TEST(Individual, Examples) {
    EXPECT_EQ(total_error_individual(std::vector<double>{}, {}, {}), 0.0);
    EXPECT_NEAR(total_error_individual({0.012}, {}, {}), 0.012, 1e-15);
    EXPECT_NEAR(total_error_individual({0.01, 0.01}, {0.005}, {}), 1 - 0.99 * 0.99 * 0.995, 1e-15);
    EXPECT_NEAR(total_error_individual({0.01, 0.01}, {0.005}, {}), 0.0248005, 1e-12);
    EXPECT_THROW(total_error_individual({1.5}, {}, {}), std::invalid_argument);
}

TEST(Individual, PermutationInvariantAndMonotone) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 0.05);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> c(6), m(4), i(5);
        for (auto* v : {&c, &m, &i}) {
            for (auto& x : *v) x = u(rng);
        }
        const double base = total_error_individual(c, m, i);
        auto c2 = c;
        std::shuffle(c2.begin(), c2.end(), rng);
        EXPECT_NEAR(total_error_individual(c2, m, i), base, 1e-15);
        auto m2 = m;
        m2[1] += 0.01;
        EXPECT_GT(total_error_individual(c, m2, i), base);
        auto i2 = i;
        i2[0] += 0.01;
        EXPECT_GT(total_error_individual(c, m, i2), base);
    }
}

TEST(Average, MatchesProductForm) {
    const ErrorRates r;
    for (auto f : kFamilies) {
        for (int n = 2; n <= 30; ++n) EXPECT_NEAR(total_error_average(r, f, n), product_form(r, f, n), 1e-14);
    }
}

TEST(Average, Examples) {
    const ErrorRates r;
    EXPECT_NEAR(total_error_average(r, Family::Feedforward, 4), 0.20, 0.03);
    EXPECT_NEAR(total_error_average(r, Family::PauliFrameUpdate, 2), 0.05, 0.01);
    EXPECT_NEAR(total_error_average(r, Family::Feedforward, 2), 0.085, 0.01);
    for (auto f : kFamilies) EXPECT_EQ(total_error_average(ErrorRates::noiseless(), f, 7), 0.0);
    EXPECT_THROW(total_error_average(r, Family::Feedforward, 1), std::invalid_argument);
}

TEST(Average, MatchesMeasuredErrors) {
    const ErrorRates r;
    const double ff[] = {0.09, 0.14, 0.20};
    const double pfu[] = {0.044, 0.09, 0.14};
    for (int n = 2; n <= 4; ++n) {
        EXPECT_NEAR(total_error_average(r, Family::Feedforward, n), ff[n - 2], 0.03);
        EXPECT_NEAR(total_error_average(r, Family::PauliFrameUpdate, n), pfu[n - 2], 0.03);
    }
}

TEST(Average, StrictlyIncreasingInN) {
    const ErrorRates r;
    for (auto f : kFamilies) {
        for (int n = 2; n < 60; ++n) EXPECT_LT(total_error_average(r, f, n), total_error_average(r, f, n + 1));
    }
}

TEST(Average, FirstOrderApproximation) {
    ErrorRates r;
    r.eps_cnot_avg = 0.002;
    r.eps_meas_avg = 0.001;
    for (auto f : kFamilies) {
        for (int n = 2; n <= 40; ++n) {
            const double e = total_error_average(r, f, n);
            if (e >= 0.1) continue;
            const auto c = table_counts(f, n, r.mu);
            const double linear = c.n_cnot * r.eps_cnot_avg + c.n_meas * r.eps_meas_avg + c.n_idle * r.eps_idle_avg();
            // 1 - prod(1 - e_i) lies between sum e_i - (sum e_i)^2 / 2 and sum e_i.
            EXPECT_GE(linear, e - 1e-15) << to_string(f) << ' ' << n;
            EXPECT_LE(linear - e, linear * linear / 2) << to_string(f) << ' ' << n;
        }
    }
}

TEST(Scaling, ExponentShapes) {
    const ErrorRates r;
    const auto u = scaling_curve(r, Family::Unitary, 2, 20);
    ASSERT_EQ(u.n.size(), 19U);
    std::vector<double> ln;
    for (double e : u.eps) ln.push_back(-std::log1p(-e));
    const double second = ln[2] - 2 * ln[1] + ln[0];
    EXPECT_GT(second, 0);
    for (std::size_t k = 2; k < ln.size(); ++k) EXPECT_NEAR(ln[k] - 2 * ln[k - 1] + ln[k - 2], second, 1e-12);

    for (auto f : {Family::Feedforward, Family::PauliFrameUpdate}) {
        const auto c = scaling_curve(r, f, 2, 20);
        std::vector<double> l;
        for (double e : c.eps) l.push_back(-std::log1p(-e));
        for (std::size_t k = 2; k < l.size(); ++k) EXPECT_NEAR(l[k] - 2 * l[k - 1] + l[k - 2], 0.0, 1e-12);
    }
    EXPECT_THROW(scaling_curve(r, Family::Unitary, 5, 4), std::invalid_argument);
}

TEST(Crossover, Examples) {
    const ErrorRates r;
    EXPECT_FALSE(crossover(r, Family::Feedforward, Family::Feedforward, 100).has_value());
    ErrorRates coherent = r;
    coherent.t2_echo_ns = std::numeric_limits<double>::infinity();
    EXPECT_FALSE(crossover(coherent, Family::Feedforward, Family::Unitary, 500).has_value());

    const auto pfu = crossover(r, Family::PauliFrameUpdate, Family::Unitary, 200);
    const auto ff = crossover(r, Family::Feedforward, Family::Unitary, 200);
    ASSERT_TRUE(pfu && ff);
    EXPECT_GT(*pfu, 4);
    EXPECT_LT(*pfu, *ff);
    // First strict crossing: the previous n does not cross.
    EXPECT_GE(total_error_average(r, Family::Feedforward, *ff - 1), total_error_average(r, Family::Unitary, *ff - 1));
    EXPECT_THROW(crossover(r, Family::Feedforward, Family::Unitary, 1), std::invalid_argument);
}

TEST(Crossover, FrameNeverLaterThanFeedforward) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> eps(0.001, 0.03), t2(5000, 200000), mu(0.5, 20);
    for (int t = 0; t < 200; ++t) {
        ErrorRates r;
        r.eps_cnot_avg = eps(rng);
        r.eps_meas_avg = eps(rng);
        r.t2_echo_ns = t2(rng);
        r.mu = mu(rng);
        const auto pfu = crossover(r, Family::PauliFrameUpdate, Family::Unitary, 300);
        const auto ff = crossover(r, Family::Feedforward, Family::Unitary, 300);
        if (ff) {
            ASSERT_TRUE(pfu.has_value());
            EXPECT_LE(*pfu, *ff);
        }
    }
}

TEST(Simulation, ModelAgreesWithExactEngine) {
    const ErrorRates r;
    const NoiseModel noise = noise_from_rates(r);
    for (auto f : kFamilies) {
        for (int n = 2; n <= 4; ++n) {
            EXPECT_NEAR(total_error_average(r, f, n), cardinal_error(build_circuit(f, n), noise), 0.03) << to_string(f) << ' ' << n;
        }
    }
}

TEST(Simulation, NoiseFromRates) {
    const NoiseModel m = noise_from_rates(ErrorRates{});
    EXPECT_NEAR(m.two_qubit_depol, 0.011 * 4 / 3, 1e-15);
    EXPECT_NEAR(m.single_qubit_depol, 0.001, 1e-15);
    EXPECT_EQ(m.confusion.p01, 0.006);
    EXPECT_EQ(m.t2_echo_ns, 48000.0);
    EXPECT_TRUE(noise_from_rates(ErrorRates::noiseless()).is_noiseless());
}
