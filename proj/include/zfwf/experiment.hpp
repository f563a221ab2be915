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

#pragma once

// Experiment orchestration behind the command-line front end: JSON scenario
// files, grid strings, and the CSV artifacts of every experiment.

#include "zfwf/analysis.hpp"
#include "zfwf/core_model.hpp"
#include "zfwf/fitting.hpp"
#include "zfwf/precoders.hpp"
#include "zfwf/simulation.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace zfwf {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSeedEnv = "ZFWF_SEED";

enum class Command { Capacity, Ber, Kstar, Fit, Hessian, Lagrangian };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Capacity: return "capacity";
        case Command::Ber: return "ber";
        case Command::Kstar: return "kstar";
        case Command::Fit: return "fit";
        case Command::Hessian: return "hessian";
        case Command::Lagrangian: return "lagrangian";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    for (Command c : {Command::Capacity, Command::Ber, Command::Kstar, Command::Fit, Command::Hessian,
                      Command::Lagrangian})
        if (to_string(c) == s) return c;
    throw Error("unknown command '" + s + "'");
}

struct ExperimentSpec {
    Command command = Command::Capacity;
    ScenarioConfig scenario;
    std::string output_path;
    std::vector<Scheme> schemes;
    std::vector<int> nbs_grid = {4, 6, 8, 10, 12, 14, 16};  ///< kstar only
    std::string input_path;                                  ///< fit only
    double hessian_step = 1e-4;
    int threads = 0;
};

// ------------------------------------------------------------------------
// Grids and numbers

/// "%.12g"
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Parses "start:step:stop" (inclusive) or a comma list; dB units.
inline std::vector<double> parse_grid(const std::string& text) {
    auto to_num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw Error("bad grid '" + text + "'");
        }
        if (used != s.size() || !std::isfinite(v)) throw Error("bad grid '" + text + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw Error("bad grid '" + text + "' (expected start:step:stop)");
        const double start = to_num(parts[0]), step = to_num(parts[1]), stop = to_num(parts[2]);
        if (!(step > 0.0) || stop < start) throw Error("bad grid '" + text + "' (need step > 0, stop >= start)");
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(to_num(p));
    }
    if (out.empty()) throw Error("empty grid '" + text + "'");
    return out;
}

inline std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_grid(text)) {
        if (v != std::floor(v)) throw Error("grid '" + text + "' must contain integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline std::vector<Scheme> parse_schemes(const std::string& text) {
    std::vector<Scheme> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(parse_scheme(p));
    if (out.empty()) throw Error("no schemes given");
    return out;
}

// ------------------------------------------------------------------------
// Scenario JSON

/**
 * Applies a flat JSON object whose keys mirror ScenarioConfig fields.
 * `snr_db` may be an array or a grid string. Unknown keys are rejected.
 */
inline void apply_json(ScenarioConfig& cfg, const nlohmann::json& j) {
    if (!j.is_object()) throw Error("scenario config must be a JSON object");
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "k") cfg.k = val.get<int>();
            else if (key == "m") cfg.m = val.get<int>();
            else if (key == "n_bs") cfg.n_bs = val.get<int>();
            else if (key == "snr_db")
                cfg.snr_db = val.is_string() ? parse_grid(val.get<std::string>()) : val.get<std::vector<double>>();
            else if (key == "p_bs") cfg.p_bs = val.get<double>();
            else if (key == "ip_db") cfg.ip_db = val.get<double>();
            else if (key == "noise_power") cfg.noise_power = val.get<double>();
            else if (key == "i_m") cfg.i_m = val.get<double>();
            else if (key == "trials") cfg.trials = val.get<int>();
            else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
            else if (key == "modulation") cfg.modulation = parse_modulation(val.get<std::string>());
            else if (key == "max_trials") cfg.max_trials = val.get<long long>();
            else if (key == "min_bit_errors") cfg.min_bit_errors = val.get<long long>();
            else if (key == "symbols_per_trial") cfg.symbols_per_trial = val.get<int>();
            else throw Error("unknown scenario field '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("scenario config: ") + e.what());
    }
}

inline nlohmann::json to_json(const ScenarioConfig& cfg) {
    return {{"k", cfg.k},
            {"m", cfg.m},
            {"n_bs", cfg.n_bs},
            {"snr_db", cfg.snr_db},
            {"p_bs", cfg.p_bs},
            {"ip_db", cfg.ip_db},
            {"noise_power", cfg.noise_power},
            {"i_m", cfg.i_m},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"modulation", to_string(cfg.modulation)},
            {"max_trials", cfg.max_trials},
            {"min_bit_errors", cfg.min_bit_errors},
            {"symbols_per_trial", cfg.symbols_per_trial}};
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("config file '" + path + "': " + e.what());
    }
}

/**
 * Defaults, then the ZFWF_SEED environment seed, then the config file, then
 * flag overrides (already collected into a JSON object).
 */
inline ScenarioConfig resolve_scenario(const std::string& config_path, const nlohmann::json& overrides) {
    ScenarioConfig cfg;
    if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            cfg.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) throw Error("");
        } catch (...) {
            throw Error(std::string(kSeedEnv) + " must be an unsigned integer");
        }
    }
    if (!config_path.empty()) apply_json(cfg, load_json_file(config_path));
    if (!overrides.is_null()) apply_json(cfg, overrides);
    return cfg;
}

// ------------------------------------------------------------------------
// CSV writers

inline std::string scheme_list(const std::vector<Scheme>& schemes) {
    std::string s;
    for (std::size_t i = 0; i < schemes.size(); ++i) s += (i ? "," : "") + to_string(schemes[i]);
    return s;
}

inline void write_comment(std::ostream& os, Command cmd, const ScenarioConfig& cfg, const std::string& extra = "") {
    os << "# zfwf " << kVersion << " command=" << to_string(cmd) << " seed=" << cfg.seed
       << " trials=" << cfg.trials << " K=" << cfg.k << " M=" << cfg.m << " n_BS=" << cfg.n_bs
       << " ip_db=" << fmt(cfg.ip_db) << " noise_power=" << fmt(cfg.noise_power)
       << " modulation=" << to_string(cfg.modulation);
    if (!extra.empty()) os << ' ' << extra;
    os << '\n';
}

inline void write_capacity_csv(std::ostream& os, const std::vector<CapacityCurve>& curves) {
    if (curves.empty()) throw Error("no capacity curves to write");
    write_comment(os, Command::Capacity, curves.front().scenario);
    os << "snr_db,scheme,mean_rate,std_err,trials\n";
    for (std::size_t s = 0; s < curves.front().snr_db.size(); ++s)
        for (const auto& c : curves)
            os << fmt(c.snr_db[s]) << ',' << to_string(c.scheme) << ',' << fmt(c.mean_rate[s]) << ','
               << fmt(c.std_err[s]) << ',' << c.trials << '\n';
}

inline void write_ber_csv(std::ostream& os, const std::vector<BerCurve>& curves) {
    if (curves.empty()) throw Error("no BER curves to write");
    const auto& cfg = curves.front().scenario;
    write_comment(os, Command::Ber, cfg,
                  "max_trials=" + std::to_string(cfg.max_trials) + " min_bit_errors=" +
                      std::to_string(cfg.min_bit_errors) + " symbols_per_trial=" +
                      std::to_string(cfg.symbols_per_trial));
    os << "snr_db,scheme,ber,bits\n";
    for (std::size_t s = 0; s < curves.front().snr_db.size(); ++s)
        for (const auto& c : curves)
            os << fmt(c.snr_db[s]) << ',' << to_string(c.scheme) << ',' << fmt(c.ber[s]) << ','
               << c.bits_simulated[s] << '\n';
}

inline void write_kstar_csv(std::ostream& os, const ScenarioConfig& cfg, const std::vector<int>& nbs_grid,
                            const std::vector<KstarPoint>& pts) {
    std::string grid;
    for (std::size_t i = 0; i < nbs_grid.size(); ++i) grid += (i ? "," : "") + std::to_string(nbs_grid[i]);
    write_comment(os, Command::Kstar, cfg, "nbs_grid=" + grid);
    os << "n_bs,snr_db,k_star,peak_rate\n";
    for (const auto& p : pts) os << p.n_bs << ',' << fmt(p.snr_db) << ',' << p.k_star << ',' << fmt(p.peak_rate) << '\n';
}

/// Two blocks: per-SNR linear fits, then the power-law rows for phi and beta.
inline void write_fit_csv(std::ostream& os, const SurrogateFit& fit, const std::string& input, std::size_t points) {
    os << "# zfwf " << kVersion << " command=fit input=" << input << " points=" << points << " form=linear-phi\n";
    os << "snr_db,slope,intercept,rmse\n";
    for (const auto& l : fit.linear)
        os << fmt(l.snr_db) << ',' << fmt(l.slope) << ',' << fmt(l.intercept) << ',' << fmt(l.rmse) << '\n';
    os << "target,a,b,c,rmse\n";
    for (const auto* p : {&fit.phi, &fit.beta})
        os << to_string(p->target) << ',' << fmt(p->a) << ',' << fmt(p->b) << ',' << fmt(p->c) << ','
           << fmt(p->rmse) << '\n';
}

/// Reads (n_bs, snr_db, k_star) rows from a kstar CSV.
inline std::vector<std::tuple<int, double, int>> read_kstar_csv(std::istream& in) {
    std::vector<std::tuple<int, double, int>> rows;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("n_bs,snr_db,k_star", 0) != 0) throw Error("fit input is not a kstar CSV (bad header)");
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw Error("fit input: malformed row '" + line + "'");
        try {
            rows.emplace_back(std::stoi(a), std::stod(b), std::stoi(c));
        } catch (const std::exception&) {
            throw Error("fit input: malformed row '" + line + "'");
        }
    }
    if (!header) throw Error("fit input has no header row");
    return rows;
}

// ------------------------------------------------------------------------
// Orchestration

struct RunSummary {
    std::string scheme;
    std::size_t grid_size = 0;
};

inline RunSummary execute(const ExperimentSpec& spec, std::ostream& os) {
    const ScenarioConfig& cfg = spec.scenario;
    RunSummary sum;
    switch (spec.command) {
        case Command::Capacity: {
            std::vector<CapacityCurve> curves;
            for (Scheme s : spec.schemes) curves.push_back(run_capacity(cfg, s, spec.threads));
            write_capacity_csv(os, curves);
            sum = {scheme_list(spec.schemes), cfg.snr_db.size()};
            break;
        }
        case Command::Ber: {
            std::vector<BerCurve> curves;
            for (Scheme s : spec.schemes) curves.push_back(run_ber(cfg, s, spec.threads));
            write_ber_csv(os, curves);
            sum = {scheme_list(spec.schemes), cfg.snr_db.size()};
            break;
        }
        case Command::Kstar: {
            KstarOptions opt{cfg.noise_power, cfg.ip_db, spec.threads};
            const auto pts = kstar_sweep(spec.nbs_grid, cfg.snr_db, cfg.m, cfg.trials, cfg.seed, opt);
            write_kstar_csv(os, cfg, spec.nbs_grid, pts);
            sum = {"ZFWF", pts.size()};
            break;
        }
        case Command::Fit: {
            std::ifstream in(spec.input_path);
            if (!in) throw Error("cannot read fit input '" + spec.input_path + "'");
            const auto rows = read_kstar_csv(in);
            const SurrogateFit fit = fit_surrogate(rows);
            write_fit_csv(os, fit, spec.input_path, rows.size());
            sum = {"-", fit.linear.size()};
            break;
        }
        case Command::Hessian: {
            const Scheme scheme = spec.schemes.empty() ? Scheme::ZFEP : spec.schemes.front();
            validate_for(cfg, scheme);
            const double p_bs = cfg.p_bs_at(cfg.snr_db.front());
            std::vector<HessianReport> reps(static_cast<std::size_t>(cfg.trials));
            parallel_for(0, cfg.trials, spec.threads, [&](long long t) {
                const ChannelSet ch = generate_channels(cfg, static_cast<std::uint64_t>(t));
                reps[static_cast<std::size_t>(t)] =
                    sumrate_hessian(ch, build_precoder(scheme, ch, p_bs), spec.hessian_step);
            });
            write_comment(os, Command::Hessian, cfg,
                          "scheme=" + to_string(scheme) + " snr_db=" + fmt(cfg.snr_db.front()) +
                              " step=" + fmt(spec.hessian_step));
            os << "trial,min_eig,max_eig,indefinite,asymmetry\n";
            for (std::size_t t = 0; t < reps.size(); ++t)
                os << t << ',' << fmt(reps[t].min_eig) << ',' << fmt(reps[t].max_eig) << ','
                   << (reps[t].indefinite ? 1 : 0) << ',' << fmt(reps[t].asymmetry) << '\n';
            sum = {to_string(scheme), reps.size()};
            break;
        }
        case Command::Lagrangian: {
            cfg.validate_zf();
            const double p_bs = cfg.p_bs_at(cfg.snr_db.front());
            std::vector<StationarityReport> reps(static_cast<std::size_t>(cfg.trials));
            parallel_for(0, cfg.trials, spec.threads, [&](long long t) {
                const ChannelSet ch = generate_channels(cfg, static_cast<std::uint64_t>(t));
                reps[static_cast<std::size_t>(t)] = zfwf_stationarity(ch, p_bs);
            });
            write_comment(os, Command::Lagrangian, cfg, "scheme=ZFWF snr_db=" + fmt(cfg.snr_db.front()));
            os << "trial,sum_rate,lagrangian,lambda,stationarity\n";
            for (std::size_t t = 0; t < reps.size(); ++t)
                os << t << ',' << fmt(reps[t].sum_rate) << ',' << fmt(reps[t].lagrangian) << ','
                   << fmt(reps[t].lambda) << ',' << fmt(reps[t].max_active_grad) << '\n';
            sum = {"ZFWF", reps.size()};
            break;
        }
    }
    return sum;
}

/**
 * Runs one experiment and writes its CSV to spec.output_path. Prints a
 * one-line summary on success; on failure prints the failed condition and
 * returns nonzero.
 */
inline int run(const ExperimentSpec& spec, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    try {
        if (spec.output_path.empty()) throw Error("no output path given");
        if ((spec.command == Command::Capacity || spec.command == Command::Ber) && spec.schemes.empty())
            throw Error("no schemes given");
        if (spec.command == Command::Fit && spec.input_path.empty()) throw Error("fit needs an input kstar CSV");
        if (spec.command != Command::Fit) spec.scenario.validate();
        if (spec.scenario.snr_db.empty()) throw Error("empty SNR grid");
        if (!std::ofstream(spec.output_path, std::ios::app))
            throw Error("cannot write output path '" + spec.output_path + "'");

        std::ostringstream buf;
        const auto start = std::chrono::steady_clock::now();
        const RunSummary sum = execute(spec, buf);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::ofstream out(spec.output_path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write output path '" + spec.output_path + "'");
        out << buf.str();
        out.close();
        if (!out) throw Error("failed writing output path '" + spec.output_path + "'");

        char wall_s[32];
        std::snprintf(wall_s, sizeof wall_s, "%.2fs", wall);
        log << to_string(spec.command) << ": scheme=" << sum.scheme << " grid=" << sum.grid_size
            << " wall=" << wall_s << " out=" << spec.output_path << '\n';
        return 0;
    } catch (const std::exception& e) {
        err << "zfwf " << to_string(spec.command) << ": error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace zfwf
