// SPDX-License-Identifier: Apache-2.0
//
// zfwf - zero-forcing water-filling toolkit for underlay MU-MISO cognitive radio
// Copyright (C) 2026 The zfwf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "zfwf/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

/// Flags shared by every subcommand; only flags actually given override the config file.
struct CommonFlags {
    std::string config;
    std::string out;
    std::string snr;
    std::string schemes;
    std::optional<int> k, m, n_bs, trials, symbols;
    std::optional<double> p_bs, ip_db, noise, i_m;
    std::optional<std::uint64_t> seed;
    std::optional<long long> max_trials, min_errors;
    int threads = 0;

    void attach(CLI::App* app, bool single_nbs) {
        app->add_option("-c,--config", config, "flat JSON scenario file")->check(CLI::ExistingFile);
        app->add_option("-o,--out", out, "output CSV path")->required();
        app->add_option("--snr", snr, "SNR grid in dB: start:step:stop or a,b,c");
        app->add_option("--k", k, "number of secondary users K");
        app->add_option("--m", m, "number of primary users M");
        if (single_nbs) app->add_option("--nbs", n_bs, "BS antennas n_BS");
        app->add_option("--p-bs", p_bs, "power budget (single-point commands use the SNR grid instead)");
        app->add_option("--ip-db", ip_db, "PU-to-SU interference power I_p in dB");
        app->add_option("--noise", noise, "thermal noise power sigma^2 (linear)");
        app->add_option("--i-m", i_m, "PU interference cap (reported only)");
        app->add_option("--trials", trials, "channel draws per point");
        app->add_option("--seed", seed, "64-bit seed (default from config, then $ZFWF_SEED)");
        app->add_option("--threads", threads, "worker threads (0 = hardware)");
    }

    nlohmann::json overrides() const {
        nlohmann::json j = nlohmann::json::object();
        if (!snr.empty()) j["snr_db"] = snr;
        if (k) j["k"] = *k;
        if (m) j["m"] = *m;
        if (n_bs) j["n_bs"] = *n_bs;
        if (p_bs) j["p_bs"] = *p_bs;
        if (ip_db) j["ip_db"] = *ip_db;
        if (noise) j["noise_power"] = *noise;
        if (i_m) j["i_m"] = *i_m;
        if (trials) j["trials"] = *trials;
        if (seed) j["seed"] = *seed;
        if (max_trials) j["max_trials"] = *max_trials;
        if (min_errors) j["min_bit_errors"] = *min_errors;
        if (symbols) j["symbols_per_trial"] = *symbols;
        return j;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zfwf: zero-forcing water-filling experiments for underlay MU-MISO cognitive radio"};
    app.set_version_flag("--version", std::string("zfwf ") + zfwf::kVersion);
    app.require_subcommand(1);

    std::map<std::string, CommonFlags> flags;
    std::string nbs_grid = "4:2:16";
    std::string fit_in;
    double step = 1e-4;

    auto* capacity = app.add_subcommand("capacity", "ergodic sum capacity vs SNR");
    flags["capacity"].attach(capacity, true);
    capacity->add_option("--schemes", flags["capacity"].schemes, "comma list of ZFWF,ZFEP,MMSE")
        ->default_str("ZFWF,ZFEP");

    auto* ber = app.add_subcommand("ber", "4-QAM bit error rate vs SNR");
    flags["ber"].attach(ber, true);
    ber->add_option("--schemes", flags["ber"].schemes, "comma list of ZFWF,ZFEP,MMSE")->default_str("ZFWF,ZFEP");
    ber->add_option("--max-trials", flags["ber"].max_trials, "channel draws cap per point");
    ber->add_option("--min-errors", flags["ber"].min_errors, "stop a point after this many bit errors");
    ber->add_option("--symbols", flags["ber"].symbols, "4-QAM symbols per channel draw");

    auto* kstar = app.add_subcommand("kstar", "optimal number of secondary users over an n_BS x SNR grid");
    flags["kstar"].attach(kstar, false);
    kstar->add_option("--nbs", nbs_grid, "n_BS grid: start:step:stop or a,b,c")->capture_default_str();

    auto* fit = app.add_subcommand("fit", "linear and power-law fits of kstar output");
    fit->add_option("-i,--in", fit_in, "kstar CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("-o,--out", flags["fit"].out, "output CSV path")->required();

    auto* hessian = app.add_subcommand("hessian", "sum-rate Hessian spectrum probes");
    flags["hessian"].attach(hessian, true);
    hessian->add_option("--scheme", flags["hessian"].schemes, "operating-point precoder")->default_str("ZFEP");
    hessian->add_option("--step", step, "finite-difference step")->capture_default_str();

    auto* lagr = app.add_subcommand("lagrangian", "Lagrangian stationarity at the ZFWF point");
    flags["lagrangian"].attach(lagr, true);

    CLI11_PARSE(app, argc, argv);

    CLI::App* chosen = app.get_subcommands().front();
    zfwf::ExperimentSpec spec;
    try {
        spec.command = zfwf::parse_command(chosen->get_name());
        const CommonFlags& f = flags[chosen->get_name()];
        spec.output_path = f.out;
        spec.threads = f.threads;
        if (spec.command != zfwf::Command::Fit) spec.scenario = zfwf::resolve_scenario(f.config, f.overrides());
        const std::string schemes =
            !f.schemes.empty() ? f.schemes : (spec.command == zfwf::Command::Hessian ? "ZFEP" : "ZFWF,ZFEP");
        spec.schemes = zfwf::parse_schemes(schemes);
        spec.nbs_grid = zfwf::parse_int_grid(nbs_grid);
        spec.input_path = fit_in;
        spec.hessian_step = step;
    } catch (const std::exception& e) {
        std::cerr << "zfwf " << chosen->get_name() << ": error: " << e.what() << '\n';
        return 2;
    }
    return zfwf::run(spec);
}
