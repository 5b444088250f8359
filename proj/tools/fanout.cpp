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

#include "fanout/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kConfigErrorExit = 2;

void add_common(CLI::App* sub, fanout::cli::ExperimentConfig& c, std::string& family, std::string& config_file,
                bool& noiseless) {
    sub->add_option("--config", config_file, "flat key = value config file; flags override it");
    sub->add_option("--family", family, "unitary | feedforward | pauli-frame");
    sub->add_option("--n", c.n, "number of output qubits");
    sub->add_option("--input", c.input, "theta=..,phi=.. | cardinal | 0 1 + - +i -i");
    sub->add_option("--noise", c.noise, "default | none | <rates file>");
    sub->add_flag("--noiseless", noiseless, "same as --noise none");
    sub->add_option("--rates", c.rates, "rate overrides, e.g. \"eps_cnot=0 eps_meas=0 t2=inf\"");
    sub->add_option("--mode", c.mode, "exact | trajectories");
    sub->add_option("--shots", c.shots, "trajectory shots or tomography shots per setting");
    sub->add_option("--seed", c.seed, "RNG seed");
    sub->add_option("--out", c.out, "output directory (stdout only when omitted)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("fanout ") + fanout::cli::kVersion + ": constant-depth fan-out experiments"};
    app.set_version_flag("--version", std::string(fanout::cli::kVersion));
    app.require_subcommand(1);

    fanout::cli::ExperimentConfig cfg;
    std::string family;
    std::string config_file;
    bool noiseless = false;

    const char* names[] = {"simulate", "sweep", "tomo", "model", "crossover"};
    const char* help[] = {"run the protocol and report fidelity, joint-X and duration",
                          "sweep theta or phi and fit the joint-X contrast",
                          "simulate state tomography of the output and reconstruct it",
                          "predicted error per family versus n",
                          "crossover of the constant-depth families against the ladder"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        add_common(sub, cfg, family, config_file, noiseless);
        if (std::string(names[i]) == "sweep") {
            sub->add_option("--sweep", cfg.sweep, "theta | phi");
            sub->add_option("--points", cfg.points, "number of sweep angles");
        }
        if (std::string(names[i]) == "tomo") sub->add_option("--tomo-readout", cfg.tomo_readout, "model | none");
        if (std::string(names[i]) == "model" || std::string(names[i]) == "crossover") {
            sub->add_option("--n-min", cfg.n_min, "smallest n");
            sub->add_option("--n-max", cfg.n_max, "largest n");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigErrorExit;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        fanout::cli::ExperimentConfig c;
        if (!config_file.empty()) fanout::cli::apply_config_keys(c, fanout::cli::parse_key_values(fanout::cli::read_file(config_file)));
        // Explicit flags win over the config file.
        CLI::App* sub = app.get_subcommand(command);
        auto given = [&](const char* flag) { return sub->count(flag) > 0; };
        if (given("--family")) {
            try {
                c.family = fanout::family_from_string(family);
            } catch (const std::invalid_argument& e) {
                throw fanout::cli::ConfigError(e.what());
            }
        }
        if (given("--n")) c.n = cfg.n;
        if (given("--input")) c.input = cfg.input;
        if (given("--noise")) c.noise = cfg.noise;
        if (noiseless) c.noise = "none";
        if (given("--rates")) c.rates = cfg.rates;
        if (given("--mode")) c.mode = cfg.mode;
        if (given("--shots")) c.shots = cfg.shots;
        if (given("--seed")) c.seed = cfg.seed;
        if (given("--out")) c.out = cfg.out;
        if (command == "sweep") {
            if (given("--sweep")) c.sweep = cfg.sweep;
            if (given("--points")) c.points = cfg.points;
        }
        if (command == "tomo" && given("--tomo-readout")) c.tomo_readout = cfg.tomo_readout;
        if (command == "model" || command == "crossover") {
            if (given("--n-min")) c.n_min = cfg.n_min;
            if (given("--n-max")) c.n_max = cfg.n_max;
        }

        const auto files = fanout::cli::run_command(command, c);
        if (!c.out.empty()) {
            std::filesystem::create_directories(c.out);
            for (const auto& [name, content] : files) {
                std::ofstream f(std::filesystem::path(c.out) / name, std::ios::binary);
                if (!f) throw fanout::cli::ConfigError("cannot write to '" + c.out + "'");
                f << content;
            }
        }
        std::cout << files.front().second;
    } catch (const fanout::cli::ConfigError& e) {
        std::cerr << "fanout: " << e.what() << '\n';
        return kConfigErrorExit;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fanout: " << e.what() << '\n';
        return kConfigErrorExit;
    } catch (const std::exception& e) {
        std::cerr << "fanout: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
