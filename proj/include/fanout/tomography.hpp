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
 * Simulated full Pauli tomography of a k-qubit register.
 *
 * Pipeline: simulate_shots over all 3^k settings, linear_inversion with
 * per-qubit readout correction, then mle_project onto the physical states.
 * Bitstring character j is the outcome of qubit j; '0' is the +1 eigenvalue
 * of the measured Pauli.
 */

#pragma once

#include "fanout/noise.hpp"
#include "fanout/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fanout {

using TomographySetting = std::string; // one of X, Y, Z per qubit

/// All {X,Y,Z}^k settings in lexicographic order.
inline std::vector<TomographySetting> settings(int k) {
    if (k < 1) throw std::invalid_argument("settings: k must be >= 1");
    std::vector<TomographySetting> out{""};
    for (int q = 0; q < k; ++q) {
        std::vector<TomographySetting> next;
        for (const auto& s : out) {
            for (char c : {'X', 'Y', 'Z'}) next.push_back(s + c);
        }
        out = std::move(next);
    }
    return out;
}

/// All 4^k Pauli strings over {I,X,Y,Z}, lexicographic.
inline std::vector<std::string> pauli_strings(int k) {
    std::vector<std::string> out{""};
    for (int q = 0; q < k; ++q) {
        std::vector<std::string> next;
        for (const auto& s : out) {
            for (char c : {'I', 'X', 'Y', 'Z'}) next.push_back(s + c);
        }
        out = std::move(next);
    }
    return out;
}

inline std::string bitstring(std::size_t index, int k) {
    std::string s(static_cast<std::size_t>(k), '0');
    for (int q = 0; q < k; ++q) {
        if ((index >> (k - 1 - q)) & 1U) s[static_cast<std::size_t>(q)] = '1';
    }
    return s;
}

struct TomogramData {
    int k = 0;
    std::size_t shots_per_setting = 0;
    std::vector<TomographySetting> setting_list;
    std::vector<std::vector<std::size_t>> counts; // [setting][outcome index]
    std::vector<ConfusionMatrix> confusion;       // per qubit, used for correction

    void validate() const {
        if (setting_list.size() != counts.size()) throw std::invalid_argument("TomogramData: counts per setting missing");
        for (const auto& c : counts) {
            std::size_t sum = 0;
            for (auto v : c) sum += v;
            if (sum != shots_per_setting || c.size() != (std::size_t{1} << k)) {
                throw std::invalid_argument("TomogramData: counts must sum to shots per setting");
            }
        }
    }

    /// "setting,bitstring,count" rows, zero counts included.
    [[nodiscard]] std::string to_csv() const {
        std::ostringstream os;
        os << "setting,bitstring,count\n";
        for (std::size_t s = 0; s < setting_list.size(); ++s) {
            for (std::size_t o = 0; o < counts[s].size(); ++o) os << setting_list[s] << ',' << bitstring(o, k) << ',' << counts[s][o] << '\n';
        }
        return os.str();
    }
};

/// Rotates every qubit into its measurement basis and returns the outcome
/// probabilities (before readout errors).
inline std::vector<double> setting_probabilities(const DensityState& state, const TomographySetting& setting) {
    if (static_cast<int>(setting.size()) != state.num_qubits()) throw std::invalid_argument("setting length must equal qubit count");
    DensityState s = state;
    const double r = std::numbers::sqrt2 / 2;
    Mat2 hx, hy;
    hx << r, r, r, -r;                                    // X basis -> Z basis
    hy << r, cplx(0, -r), r, cplx(0, r);                  // H . S^dagger: Y basis -> Z basis
    for (int q = 0; q < s.num_qubits(); ++q) {
        const char c = setting[static_cast<std::size_t>(q)];
        if (c == 'X') apply_matrix(s, hx, q);
        else if (c == 'Y') apply_matrix(s, hy, q);
        else if (c != 'Z') throw std::invalid_argument("setting letters must be X, Y or Z");
    }
    std::vector<double> p(s.dim());
    for (std::size_t i = 0; i < s.dim(); ++i) p[i] = std::max(0.0, s.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
    return p;
}

/// Born-rule sampling plus per-qubit readout flips.
inline std::vector<std::size_t> simulate_shots(const DensityState& state, const TomographySetting& setting, std::size_t shots,
                                               const std::vector<ConfusionMatrix>& confusion, Rng& rng) {
    if (shots < 1) throw std::invalid_argument("simulate_shots: shots must be >= 1");
    const int k = state.num_qubits();
    const auto p = setting_probabilities(state, setting);
    std::vector<double> cdf(p.size());
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
    std::vector<std::size_t> counts(p.size(), 0);
    for (std::size_t s = 0; s < shots; ++s) {
        const double u = uniform01(rng) * acc;
        auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        idx = std::min(idx, p.size() - 1);
        if (!confusion.empty()) {
            for (int q = 0; q < k; ++q) {
                const auto& c = confusion[std::min(static_cast<std::size_t>(q), confusion.size() - 1)];
                const std::size_t m = std::size_t{1} << (k - 1 - q);
                const int bit = (idx & m) ? 1 : 0;
                if (noisy_readout(bit, c, rng) != bit) idx ^= m;
            }
        }
        ++counts[idx];
    }
    return counts;
}

inline TomogramData simulate_tomogram(const DensityState& state, std::size_t shots, const std::vector<ConfusionMatrix>& confusion, Rng& rng) {
    TomogramData d;
    d.k = state.num_qubits();
    d.shots_per_setting = shots;
    d.setting_list = settings(d.k);
    d.confusion = confusion;
    for (const auto& s : d.setting_list) d.counts.push_back(simulate_shots(state, s, shots, confusion, rng));
    return d;
}

/// Readout-corrected estimate of <P> from one setting consistent with P.
inline double estimate_from_setting(const TomogramData& data, std::size_t setting_index, const std::string& pauli) {
    const int k = data.k;
    std::vector<int> support;
    for (int q = 0; q < k; ++q) {
        if (pauli[static_cast<std::size_t>(q)] != 'I') support.push_back(q);
    }
    const auto ns = support.size();
    // Marginal distribution over the support qubits.
    std::vector<double> marg(std::size_t{1} << ns, 0.0);
    const auto& counts = data.counts[setting_index];
    for (std::size_t o = 0; o < counts.size(); ++o) {
        std::size_t j = 0;
        for (std::size_t t = 0; t < ns; ++t) j = (j << 1) | ((o >> (k - 1 - support[t])) & 1U);
        marg[j] += static_cast<double>(counts[o]);
    }
    for (auto& v : marg) v /= static_cast<double>(data.shots_per_setting);
    // Undo the confusion of each support qubit on its axis of the marginal.
    for (std::size_t t = 0; t < ns && !data.confusion.empty(); ++t) {
        const auto& c = data.confusion[std::min(static_cast<std::size_t>(support[t]), data.confusion.size() - 1)];
        const double det = 1.0 - c.p01 - c.p10;
        if (std::abs(det) < 1e-12) throw std::domain_error("readout confusion matrix is singular");
        const std::size_t m = std::size_t{1} << (ns - 1 - t);
        for (std::size_t j = 0; j < marg.size(); ++j) {
            if (j & m) continue;
            const double r0 = marg[j], r1 = marg[j | m];
            // measured = [[1-p10, p01], [p10, 1-p01]] * true
            marg[j] = ((1 - c.p01) * r0 - c.p01 * r1) / det;
            marg[j | m] = (-c.p10 * r0 + (1 - c.p10) * r1) / det;
        }
    }
    double e = 0;
    for (std::size_t j = 0; j < marg.size(); ++j) e += (std::popcount(j) % 2 ? -1.0 : 1.0) * marg[j];
    return e;
}

/// rho_lin = 2^-k sum_P <P> P, each <P> averaged over every consistent setting.
inline CMatrix linear_inversion(const TomogramData& data) {
    data.validate();
    const int k = data.k;
    const auto expected = settings(k);
    for (const auto& s : expected) {
        if (std::find(data.setting_list.begin(), data.setting_list.end(), s) == data.setting_list.end()) {
            throw std::invalid_argument("linear_inversion: missing setting " + s);
        }
    }
    const auto dim = Eigen::Index{1} << k;
    CMatrix rho = CMatrix::Zero(dim, dim);
    for (const auto& p : pauli_strings(k)) {
        double sum = 0;
        int used = 0;
        for (std::size_t s = 0; s < data.setting_list.size(); ++s) {
            const auto& set = data.setting_list[s];
            bool consistent = true;
            for (int q = 0; q < k && consistent; ++q) {
                const char c = p[static_cast<std::size_t>(q)];
                consistent = c == 'I' || c == set[static_cast<std::size_t>(q)];
            }
            if (!consistent) continue;
            sum += estimate_from_setting(data, s, p);
            ++used;
        }
        rho += (sum / used) * pauli_matrix(p);
    }
    return rho / static_cast<double>(dim);
}

struct ReconstructionResult {
    DensityState rho_hat;
    double clamped_weight; // total negative eigenvalue mass removed
};

/// Eigenvalue projection onto trace-one PSD matrices: the most negative
/// eigenvalue is set to zero and its deficit shared uniformly among the
/// positive eigenvalues, repeated until none is negative.
inline ReconstructionResult mle_project(const CMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("mle_project: matrix must be square");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8) throw std::invalid_argument("mle_project: matrix is not Hermitian");
    const CMatrix h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    const double tr = std::accumulate(ev.begin(), ev.end(), 0.0);
    if (!(tr > 0)) throw std::domain_error("mle_project: trace must be positive");
    for (auto& v : ev) v /= tr;

    double removed = 0;
    while (true) {
        auto most_negative = std::min_element(ev.begin(), ev.end());
        if (*most_negative >= 0) break;
        const double deficit = *most_negative;
        removed -= deficit;
        *most_negative = 0;
        std::size_t positive = 0;
        for (double v : ev) positive += v > 0 ? 1 : 0;
        if (positive == 0) break;
        for (auto& v : ev) {
            if (v > 0) v += deficit / static_cast<double>(positive);
        }
    }
    const double sum = std::accumulate(ev.begin(), ev.end(), 0.0);
    Eigen::VectorXd lam(static_cast<Eigen::Index>(ev.size()));
    for (std::size_t i = 0; i < ev.size(); ++i) lam(static_cast<Eigen::Index>(i)) = ev[i] / sum;
    CMatrix rho = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    rho = (rho + rho.adjoint()).eval() / 2.0;
    const int k = static_cast<int>(std::lround(std::log2(static_cast<double>(m.rows()))));
    return {DensityState(k, std::move(rho)), removed};
}

struct PauliTable {
    std::vector<std::string> labels;
    std::vector<double> values;
    std::vector<double> ideal;
    double zero_band_max = 0; // max / min of <P> among non-identity strings with ideal value 0
    double zero_band_min = 0;
    double zero_band_abs = 0;
    double mean_ratio_nonzero = 0; // mean of <P>/<P>_ideal over non-identity strings with |ideal| > 0.5
    std::size_t nonzero_count = 0;
};

/// Exact Tr(rho P) for all 4^k strings, classified against an ideal state.
inline PauliTable pauli_table(const DensityState& rho, const DensityState& ideal) {
    if (rho.dim() != ideal.dim()) throw std::invalid_argument("pauli_table: dimension mismatch");
    PauliTable t;
    bool first_zero = true;
    double ratio_sum = 0;
    const std::string identity(static_cast<std::size_t>(rho.num_qubits()), 'I');
    for (const auto& p : pauli_strings(rho.num_qubits())) {
        const double v = expectation_pauli(rho, p);
        const double iv = expectation_pauli(ideal, p);
        t.labels.push_back(p);
        t.values.push_back(v);
        t.ideal.push_back(iv);
        if (p == identity) continue;
        if (std::abs(iv) < 1e-9) {
            t.zero_band_max = first_zero ? v : std::max(t.zero_band_max, v);
            t.zero_band_min = first_zero ? v : std::min(t.zero_band_min, v);
            t.zero_band_abs = std::max(t.zero_band_abs, std::abs(v));
            first_zero = false;
        } else if (std::abs(iv) > 0.5) {
            ratio_sum += v / iv;
            ++t.nonzero_count;
        }
    }
    if (t.nonzero_count) t.mean_ratio_nonzero = ratio_sum / static_cast<double>(t.nonzero_count);
    return t;
}

inline PauliTable pauli_table(const DensityState& rho, const PureState& ideal) { return pauli_table(rho, DensityState(ideal)); }

struct ContrastFit {
    double amplitude; // >= 0
    double phase;     // [0, 2 pi)
    double offset;
};

/// Least-squares fit of A sin(angle + phase) + offset.
inline ContrastFit contrast_fit(const std::vector<double>& angles, const std::vector<double>& values) {
    if (angles.size() != values.size()) throw std::invalid_argument("contrast_fit: size mismatch");
    if (angles.size() < 4) throw std::invalid_argument("contrast_fit: need at least 4 points");
    const auto m = static_cast<Eigen::Index>(angles.size());
    Eigen::MatrixXd design(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double a = angles[static_cast<std::size_t>(i)];
        design(i, 0) = std::sin(a);
        design(i, 1) = std::cos(a);
        design(i, 2) = 1.0;
        y(i) = values[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(y);
    const double amp = std::hypot(coef(0), coef(1));
    if (amp < 1e-12) {
        return {0.0, 0.0, y.mean()};
    }
    double phase = std::atan2(coef(1), coef(0));
    if (phase < 0) phase += 2 * std::numbers::pi;
    if (phase >= 2 * std::numbers::pi) phase -= 2 * std::numbers::pi;
    return {amp, phase, coef(2)};
}

/// Density matrix as "row,col,re,im" rows.
inline std::string density_to_csv(const DensityState& rho) {
    std::ostringstream os;
    os << "row,col,re,im\n";
    char buf[96];
    for (Eigen::Index r = 0; r < rho.matrix().rows(); ++r) {
        for (Eigen::Index c = 0; c < rho.matrix().cols(); ++c) {
            const cplx v = rho.matrix()(r, c);
            std::snprintf(buf, sizeof buf, "%ld,%ld,%.10f,%.10f\n", static_cast<long>(r), static_cast<long>(c), v.real() + 0.0, v.imag() + 0.0);
            os << buf;
        }
    }
    return os.str();
}

} // namespace fanout
