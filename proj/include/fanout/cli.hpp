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
 * Batch experiment commands behind the `fanout` executable.
 *
 * Every command returns its output files as (name, content) pairs; the
 * executable writes them to --out and echoes the primary table on stdout.
 * All files start with '#' header lines echoing the version and the full
 * configuration. Numbers are printed with fixed precision so reruns with the
 * same seed are byte-identical.
 */

#pragma once

#include "fanout/circuit.hpp"
#include "fanout/engine.hpp"
#include "fanout/error_model.hpp"
#include "fanout/feedforward.hpp"
#include "fanout/noise.hpp"
#include "fanout/tomography.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fanout::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Reference crossover points the computed ones are reported against.
inline constexpr int kReferenceCrossoverFeedforward = 25;
inline constexpr int kReferenceCrossoverPauliFrame = 17;

/// Invalid user configuration; the executable exits with status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using OutputFiles = std::vector<std::pair<std::string, std::string>>;

// ---------------------------------------------------------------------------
// Parsing helpers

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Flat "key = value" document; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

/// "a=1,b=2" or "a=1 b=2".
inline std::map<std::string, std::string> parse_assignments(const std::string& text) {
    std::string doc = text;
    for (auto& c : doc) {
        if (c == ',' || c == ' ' || c == ';') c = '\n';
    }
    return parse_key_values(doc);
}

inline double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read file '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline std::string fmt(double v, int prec = 8) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    std::string out = buf;
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1); // no "-0.000"
    return out;
}

// ---------------------------------------------------------------------------
// Noise / rate configuration

/// Applies rate keys (eps_1q, eps_2q, eps_cnot, eps_meas, t2_echo_us | t2,
/// t2_echo_ns, mu, latency_ns, t_cnot_ns, idle_law) onto `rates`.
inline void apply_rate_keys(ErrorRates& rates, const std::map<std::string, std::string>& kv) {
    bool cnot_given = false;
    for (const auto& [k, v] : kv) {
        if (k == "eps_1q") rates.eps_1q = parse_double(k, v);
        else if (k == "eps_2q") rates.eps_2q = parse_double(k, v);
        else if (k == "eps_cnot") { rates.eps_cnot_avg = parse_double(k, v); cnot_given = true; }
        else if (k == "eps_meas" || k == "eps_ro") rates.eps_meas_avg = parse_double(k, v);
        else if (k == "t2_echo_us" || k == "t2") rates.t2_echo_ns = parse_double(k, v) * 1e3;
        else if (k == "t2_echo_ns") rates.t2_echo_ns = parse_double(k, v);
        else if (k == "mu") rates.mu = parse_double(k, v);
        else if (k == "latency_ns") rates.t_ff_latency_ns = parse_double(k, v);
        else if (k == "t_cnot_ns") rates.t_cnot_override_ns = parse_double(k, v);
        else if (k == "idle_law") {
            try {
                rates.idle_law = idle_law_from_string(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (k == "name") {
        } else {
            throw ConfigError("unknown rate key '" + k + "'");
        }
    }
    if (!cnot_given && (kv.count("eps_1q") || kv.count("eps_2q"))) rates.eps_cnot_avg = rates.eps_2q + 2 * rates.eps_1q;
    try {
        rates.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

/// "default" -> device medians, "none" -> noiseless, otherwise a key-value file.
inline std::optional<ErrorRates> load_noise(const std::string& spec) {
    if (spec == "none" || spec == "off") return std::nullopt;
    ErrorRates r;
    if (spec == "default") return r;
    apply_rate_keys(r, parse_key_values(read_file(spec)));
    return r;
}

inline std::string describe_rates(const std::optional<ErrorRates>& r) {
    if (!r) return "noise=none";
    std::ostringstream os;
    os << "eps_1q=" << fmt(r->eps_1q, 6) << " eps_2q=" << fmt(r->eps_2q, 6) << " eps_cnot=" << fmt(r->eps_cnot_avg, 6)
       << " eps_meas=" << fmt(r->eps_meas_avg, 6) << " t2_echo_ns=" << fmt(r->t2_echo_ns, 1) << " mu=" << fmt(r->mu, 4)
       << " latency_ns=" << fmt(r->t_ff_latency_ns, 1) << " t_cnot_ns=" << fmt(r->t_cnot_ns(), 4)
       << " eps_idle=" << fmt(r->eps_idle_avg(), 8) << " idle_law=" << to_string(r->idle_law);
    return os.str();
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
    Family family = Family::Feedforward;
    int n = 4;
    std::string input = "theta=1.5707963268,phi=0"; // theta=..,phi=.. | cardinal | 0 1 + - +i -i
    std::string noise = "default";
    std::string rates; // overrides for model/crossover
    std::string mode = "exact";
    std::string sweep = "theta"; // theta | phi
    int points = 9;
    int shots = 1000;
    std::uint64_t seed = 1;
    int n_min = 2;
    int n_max = 100;
    std::string tomo_readout = "model"; // model | none
    std::string out;

    void validate() const {
        if (n < 2) throw ConfigError("--n must be >= 2");
        if (shots < 1) throw ConfigError("--shots must be >= 1");
        if (mode != "exact" && mode != "trajectories") throw ConfigError("--mode must be exact or trajectories");
        if (sweep != "theta" && sweep != "phi") throw ConfigError("--sweep must be theta or phi");
        if (points < 1) throw ConfigError("empty sweep: --points must be >= 1");
        if (n_min < 2 || n_max < n_min) throw ConfigError("need 2 <= --n-min <= --n-max");
        if (tomo_readout != "model" && tomo_readout != "none") throw ConfigError("--tomo-readout must be model or none");
    }
};

/// Applies a flat config file (keys named like the long flags).
inline void apply_config_keys(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        if (k == "family") {
            try {
                c.family = family_from_string(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (k == "n") c.n = static_cast<int>(parse_double(k, v));
        else if (k == "input") c.input = v;
        else if (k == "noise") c.noise = v;
        else if (k == "rates") c.rates = v;
        else if (k == "mode") c.mode = v;
        else if (k == "sweep") c.sweep = v;
        else if (k == "points") c.points = static_cast<int>(parse_double(k, v));
        else if (k == "shots") c.shots = static_cast<int>(parse_double(k, v));
        else if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_double(k, v));
        else if (k == "n_min") c.n_min = static_cast<int>(parse_double(k, v));
        else if (k == "n_max") c.n_max = static_cast<int>(parse_double(k, v));
        else if (k == "tomo_readout") c.tomo_readout = v;
        else if (k == "out") c.out = v;
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

struct NamedInput {
    std::string name;
    InputState state;
};

inline std::vector<NamedInput> parse_inputs(const std::string& spec) {
    constexpr double pi = std::numbers::pi;
    if (spec == "cardinal") {
        const char* names[] = {"0", "1", "+", "-", "+i", "-i"};
        std::vector<NamedInput> out;
        const auto states = InputState::cardinal();
        for (std::size_t i = 0; i < states.size(); ++i) out.push_back({names[i], states[i]});
        return out;
    }
    static const std::map<std::string, InputState> named{{"0", {0, 0}},          {"1", {pi, 0}},
                                                         {"+", {pi / 2, 0}},     {"-", {pi / 2, pi}},
                                                         {"+i", {pi / 2, pi / 2}}, {"-i", {pi / 2, 3 * pi / 2}}};
    if (auto it = named.find(spec); it != named.end()) return {{spec, it->second}};
    InputState s;
    const auto kv = parse_assignments(spec);
    if (kv.empty()) throw ConfigError("empty --input");
    for (const auto& [k, v] : kv) {
        if (k == "theta") s.theta = parse_double(k, v);
        else if (k == "phi") s.phi = parse_double(k, v);
        else throw ConfigError("unknown --input key '" + k + "'");
    }
    if (s.theta < 0 || s.theta > pi + 1e-9) throw ConfigError("theta must lie in [0, pi]");
    return {{"custom", s}};
}

inline std::optional<NoiseModel> to_noise_model(const std::optional<ErrorRates>& r) {
    if (!r) return std::nullopt;
    return noise_from_rates(*r);
}

inline std::string header(const std::string& command, const ExperimentConfig& c, const std::optional<ErrorRates>& rates) {
    std::ostringstream os;
    os << "# fanout " << kVersion << "\n";
    os << "# command=" << command << " family=" << to_string(c.family) << " n=" << c.n << " input=" << c.input
       << " noise=" << c.noise << " mode=" << c.mode << " shots=" << c.shots << " seed=" << c.seed << "\n";
    if (command == "sweep") os << "# sweep=" << c.sweep << " points=" << c.points << "\n";
    if (command == "tomo") os << "# tomo_readout=" << c.tomo_readout << "\n";
    if (command == "model" || command == "crossover") os << "# n_min=" << c.n_min << " n_max=" << c.n_max << " rates=" << c.rates << "\n";
    os << "# " << describe_rates(rates) << "\n";
    return os.str();
}

inline std::optional<ErrorRates> resolve_rates(const ExperimentConfig& c) {
    auto r = load_noise(c.noise);
    if (!c.rates.empty()) {
        if (!r) r = ErrorRates{};
        apply_rate_keys(*r, parse_assignments(c.rates));
    }
    return r;
}

inline RunResult run_config(const ExperimentConfig& c, const Circuit& circuit, const InputState& in,
                            const std::optional<ErrorRates>& rates) {
    RunConfig rc;
    rc.input = in;
    rc.noise = to_noise_model(rates);
    rc.mode = c.mode == "exact" ? RunMode::Exact : RunMode::Trajectories;
    rc.shots = c.shots;
    rc.seed = c.seed;
    return run(circuit, rc);
}

// ---------------------------------------------------------------------------
// Commands

inline OutputFiles cmd_simulate(const ExperimentConfig& c) {
    c.validate();
    const auto rates = resolve_rates(c);
    const Circuit circuit = build_circuit(c.family, c.n);
    const auto inputs = parse_inputs(c.input);
    std::ostringstream table;
    table << header("simulate", c, rates);
    table << "input,theta,phi,fidelity,joint_x,duration_ns\n";
    std::ostringstream hist;
    hist << header("simulate", c, rates) << "input,reported_bits,weight\n";
    double fsum = 0;
    for (const auto& in : inputs) {
        const RunResult r = run_config(c, circuit, in.state, rates);
        const double f = output_fidelity(r, in.state);
        fsum += f;
        table << in.name << ',' << fmt(in.state.theta) << ',' << fmt(in.state.phi) << ',' << fmt(f) << ','
              << fmt(joint_x_expectation(r)) << ',' << fmt(r.duration_ns, 1) << '\n';
        if (r.mode == RunMode::Exact) {
            for (const auto& [bits, p] : r.outcome_distribution) hist << in.name << ',' << bits << ',' << fmt(p, 10) << '\n';
        } else {
            for (const auto& [bits, k] : r.outcome_histogram) hist << in.name << ',' << bits << ',' << k << '\n';
        }
    }
    if (inputs.size() > 1) {
        table << "# mean_fidelity=" << fmt(fsum / static_cast<double>(inputs.size())) << " error=" << fmt(1 - fsum / static_cast<double>(inputs.size())) << '\n';
    }
    return {{"simulate.csv", table.str()}, {"outcomes.csv", hist.str()}, {"circuit.txt", to_text(circuit)}};
}

inline std::vector<double> sweep_angles(const ExperimentConfig& c) {
    const double top = c.sweep == "theta" ? std::numbers::pi : 2 * std::numbers::pi;
    std::vector<double> a;
    if (c.points == 1) return {0.0};
    // theta sweeps include both poles; phi sweeps stop short of 2 pi.
    const int div = c.sweep == "theta" ? c.points - 1 : c.points;
    for (int i = 0; i < c.points; ++i) a.push_back(top * i / div);
    return a;
}

inline OutputFiles cmd_sweep(const ExperimentConfig& c) {
    c.validate();
    const auto rates = resolve_rates(c);
    const Circuit circuit = build_circuit(c.family, c.n);
    const auto angles = sweep_angles(c);
    std::vector<double> fids, xs;
    std::ostringstream table;
    table << header("sweep", c, rates) << "angle,theta,phi,fidelity,joint_x\n";
    for (double a : angles) {
        const InputState in = c.sweep == "theta" ? InputState{a, 0.0} : InputState{std::numbers::pi / 2, a};
        const RunResult r = run_config(c, circuit, in, rates);
        fids.push_back(output_fidelity(r, in));
        xs.push_back(joint_x_expectation(r));
        table << fmt(a) << ',' << fmt(in.theta) << ',' << fmt(in.phi) << ',' << fmt(fids.back()) << ',' << fmt(xs.back()) << '\n';
    }
    double mean = 0;
    for (double f : fids) mean += f;
    mean /= static_cast<double>(fids.size());
    std::ostringstream fit;
    fit << header("sweep", c, rates) << "key,value\n";
    fit << "mean_fidelity," << fmt(mean) << '\n';
    if (angles.size() >= 4) {
        const ContrastFit cf = contrast_fit(angles, xs);
        fit << "contrast," << fmt(cf.amplitude) << "\nphase," << fmt(cf.phase) << "\noffset," << fmt(cf.offset) << '\n';
        fit << "contrast_over_fidelity," << fmt(mean > 0 ? cf.amplitude / mean : 0.0) << '\n';
    } else {
        fit << "contrast,nan\n";
    }
    return {{"sweep.csv", table.str()}, {"sweep_fit.csv", fit.str()}};
}

inline OutputFiles cmd_tomo(const ExperimentConfig& c) {
    c.validate();
    const auto rates = resolve_rates(c);
    const Circuit circuit = build_circuit(c.family, c.n);
    const auto inputs = parse_inputs(c.input);
    if (inputs.size() != 1) throw ConfigError("tomo takes a single --input state");
    const InputState in = inputs.front().state;
    ExperimentConfig exact = c;
    exact.mode = "exact";
    const RunResult r = run_config(exact, circuit, in, rates);
    const DensityState& truth = *r.output_state;

    std::vector<ConfusionMatrix> conf;
    if (rates && c.tomo_readout == "model") conf.assign(static_cast<std::size_t>(c.n), ConfusionMatrix::symmetric(rates->eps_meas_avg));
    Rng rng(derive_seed(c.seed, 0x70u));
    const TomogramData data = simulate_tomogram(truth, static_cast<std::size_t>(c.shots), conf, rng);
    const ReconstructionResult rec = mle_project(linear_inversion(data));
    const PureState ideal = ghz_like(c.n, in);
    const PauliTable pt = pauli_table(rec.rho_hat, ideal);

    std::ostringstream summary;
    summary << header("tomo", c, rates) << "key,value\n";
    summary << "fidelity_to_ideal," << fmt(fidelity(rec.rho_hat, ideal)) << '\n';
    summary << "fidelity_to_simulated," << fmt(fidelity(rec.rho_hat, truth)) << '\n';
    summary << "simulated_fidelity_to_ideal," << fmt(fidelity(truth, ideal)) << '\n';
    summary << "projection_clamped_weight," << fmt(rec.clamped_weight) << '\n';
    summary << "nonzero_mean_ratio," << fmt(pt.mean_ratio_nonzero) << '\n';
    summary << "zero_band_min," << fmt(pt.zero_band_min) << '\n';
    summary << "zero_band_max," << fmt(pt.zero_band_max) << '\n';

    std::ostringstream paulis;
    paulis << header("tomo", c, rates) << "pauli,measured,ideal\n";
    for (std::size_t i = 0; i < pt.labels.size(); ++i) {
        if (std::abs(pt.ideal[i]) > 0.5) paulis << pt.labels[i] << ',' << fmt(pt.values[i]) << ',' << fmt(pt.ideal[i]) << '\n';
    }
    paulis << "# zero_band," << fmt(pt.zero_band_min) << ',' << fmt(pt.zero_band_max) << '\n';

    return {{"tomo_summary.csv", summary.str()},
            {"tomo_pauli.csv", paulis.str()},
            {"tomo_rho.csv", header("tomo", c, rates) + density_to_csv(rec.rho_hat)},
            {"tomo_counts.csv", header("tomo", c, rates) + data.to_csv()}};
}

inline OutputFiles cmd_model(const ExperimentConfig& c) {
    c.validate();
    auto rates = resolve_rates(c);
    const ErrorRates r = rates ? *rates : ErrorRates::noiseless();
    std::ostringstream table;
    table << header("model", c, r) << "n,unitary,feedforward,pauli_frame\n";
    for (int n = c.n_min; n <= c.n_max; ++n) {
        table << n << ',' << fmt(total_error_average(r, Family::Unitary, n)) << ','
              << fmt(total_error_average(r, Family::Feedforward, n)) << ','
              << fmt(total_error_average(r, Family::PauliFrameUpdate, n)) << '\n';
    }
    return {{"model.csv", table.str()}};
}

inline OutputFiles cmd_crossover(const ExperimentConfig& c) {
    c.validate();
    auto rates = resolve_rates(c);
    const ErrorRates r = rates ? *rates : ErrorRates::noiseless();
    auto show = [](std::optional<int> v) { return v ? std::to_string(*v) : std::string("none"); };
    const auto ff = crossover(r, Family::Feedforward, Family::Unitary, c.n_max);
    const auto pfu = crossover(r, Family::PauliFrameUpdate, Family::Unitary, c.n_max);
    std::ostringstream os;
    os << header("crossover", c, r) << "pair,computed_n,reference_n\n";
    os << "feedforward_vs_unitary," << show(ff) << ',' << kReferenceCrossoverFeedforward << '\n';
    os << "pauli_frame_vs_unitary," << show(pfu) << ',' << kReferenceCrossoverPauliFrame << '\n';
    return {{"crossover.csv", os.str()}};
}

inline OutputFiles run_command(const std::string& name, const ExperimentConfig& c) {
    if (name == "simulate") return cmd_simulate(c);
    if (name == "sweep") return cmd_sweep(c);
    if (name == "tomo") return cmd_tomo(c);
    if (name == "model") return cmd_model(c);
    if (name == "crossover") return cmd_crossover(c);
    throw ConfigError("unknown command '" + name + "'");
}

} // namespace fanout::cli
