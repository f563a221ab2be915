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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace zfwf {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Raised for violated preconditions (bad dimensions, infeasible scenarios,
/// degenerate inputs). The message names the failed condition.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/**
 * One fading realization of the cognitive downlink.
 *
 * Row k of `H` is h_k^H (BS to secondary user k), row m of `G` is g_m^H
 * (BS to primary user m). The PU-to-SU interference is a constant power
 * `pu_interference` that adds to the receiver noise.
 */
struct ChannelSet {
    CMatrix H;
    CMatrix G;
    double noise_power = 1.0;
    double pu_interference = 1.0;

    ChannelSet() = default;
    ChannelSet(CMatrix h, CMatrix g, double noise, double ip)
        : H(std::move(h)), G(std::move(g)), noise_power(noise), pu_interference(ip) {
        if (G.size() == 0) G.resize(0, H.cols());
        if (H.cols() != G.cols())
            throw Error("ChannelSet: H and G must have the same number of columns (n_BS)");
        if (H.rows() == 0 || H.cols() == 0)
            throw Error("ChannelSet: H must be non-empty");
        if (!H.allFinite() || !G.allFinite())
            throw Error("ChannelSet: channel entries must be finite");
        if (!(noise_power >= 0.0) || !(pu_interference >= 0.0))
            throw Error("ChannelSet: noise and PU interference powers must be >= 0");
        if (!(noise_power + pu_interference > 0.0))
            throw Error("ChannelSet: noise_power + pu_interference must be > 0");
    }

    int k() const { return static_cast<int>(H.rows()); }
    int m() const { return static_cast<int>(G.rows()); }
    int n_bs() const { return static_cast<int>(H.cols()); }
    double effective_noise() const { return noise_power + pu_interference; }
};

/// Beam directions T (n_BS x K), per-user powers p, and W = T diag(sqrt(p)).
class Precoder {
  public:
    Precoder() = default;
    Precoder(CMatrix t, RVector p) : T_(std::move(t)), p_(std::move(p)) {
        if (T_.cols() != p_.size())
            throw Error("Precoder: T has " + std::to_string(T_.cols()) + " columns but p has " +
                        std::to_string(p_.size()) + " entries");
        if ((p_.array() < 0.0).any() || !p_.allFinite())
            throw Error("Precoder: powers must be finite and >= 0");
        W_ = T_ * p_.cwiseSqrt().asDiagonal();
    }

    /// Wraps an arbitrary beamforming matrix; directions are W itself with unit powers.
    static Precoder from_matrix(const CMatrix& w) { return Precoder(w, RVector::Ones(w.cols())); }

    const CMatrix& T() const { return T_; }
    const RVector& p() const { return p_; }
    const CMatrix& W() const { return W_; }
    int k() const { return static_cast<int>(W_.cols()); }
    int n_bs() const { return static_cast<int>(W_.rows()); }

    /// sum_k p_k ||t_k||^2
    double total_power() const { return W_.squaredNorm(); }

  private:
    CMatrix T_;
    RVector p_;
    CMatrix W_;
};

enum class Modulation { Qam4 };

inline std::string to_string(Modulation) { return "4qam"; }

inline Modulation parse_modulation(const std::string& s) {
    if (s == "4qam" || s == "4-QAM" || s == "4QAM" || s == "qpsk" || s == "QPSK")
        return Modulation::Qam4;
    throw Error("unsupported modulation '" + s + "' (only 4-QAM is implemented)");
}

/// Experiment parameters. Defaults reproduce the reference scenario
/// (K=5, M=1, n_BS=8, 0 dB PU interference, 4-QAM).
struct ScenarioConfig {
    int k = 5;
    int m = 1;
    int n_bs = 8;
    std::vector<double> snr_db = {-15, -10, -5, 0, 5, 10, 15, 20, 25, 30, 35};
    double p_bs = 1.0;  ///< single-point budget; sweeps derive P_BS from snr_db
    double ip_db = 0.0;
    double noise_power = 1.0;
    double i_m = 1.0;  ///< PU cap, reporting only
    int trials = 2000;
    std::uint64_t seed = 20180919ULL;
    Modulation modulation = Modulation::Qam4;

    // BER stopping rule
    long long max_trials = 1000000;
    long long min_bit_errors = 500;
    int symbols_per_trial = 16;

    double pu_interference() const { return db_to_linear(ip_db); }
    double effective_noise() const { return noise_power + pu_interference(); }

    /// P_BS giving transmit SNR `snr` (dB) over the thermal noise floor.
    double p_bs_at(double snr) const { return noise_power * db_to_linear(snr); }

    void validate() const {
        if (k < 1) throw Error("scenario: K must be >= 1");
        if (m < 0) throw Error("scenario: M must be >= 0");
        if (n_bs < 1) throw Error("scenario: n_BS must be >= 1");
        if (trials < 1) throw Error("scenario: trials must be >= 1");
        if (!(p_bs > 0.0)) throw Error("scenario: P_BS must be > 0");
        if (!(noise_power >= 0.0) || !std::isfinite(ip_db))
            throw Error("scenario: noise_power must be >= 0 and I_p finite");
        if (!(effective_noise() > 0.0)) throw Error("scenario: noise_power + I_p must be > 0");
        if (max_trials < 1 || min_bit_errors < 1 || symbols_per_trial < 1)
            throw Error("scenario: BER stopping-rule parameters must be >= 1");
    }

    /// ZF needs (M + K - 1) < n_BS, i.e. K <= n_BS - M.
    void validate_zf() const {
        validate();
        if (m + k - 1 >= n_bs)
            throw Error("scenario infeasible for zero-forcing: need M + K - 1 < n_BS (K=" +
                        std::to_string(k) + ", M=" + std::to_string(m) +
                        ", n_BS=" + std::to_string(n_bs) + ")");
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Stream tags keep channel, symbol and probe draws independent.
enum class Stream : std::uint64_t { Channel = 1, Symbols = 2, Probe = 3 };

/// Engine for (seed, stream, a, b); the result depends on nothing else.
inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t a,
                                   std::uint64_t b = 0) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = detail::splitmix64(h ^ a);
    h = detail::splitmix64(h ^ b);
    return std::mt19937_64(h);
}

/// Fills `out` with i.i.d. CN(0, 1) entries, row by row.
template <class Engine>
void fill_cn(CMatrix& out, Engine& eng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            const double re = nd(eng);
            const double im = nd(eng);
            out(r, c) = cd(re, im);
        }
}

/**
 * Rayleigh channels for one trial, a pure function of (cfg.seed, trial_index).
 *
 * G is drawn before H and H row by row, so for fixed (seed, trial, M, n_BS)
 * the first K rows of H do not depend on K. Sweeps over K rely on this to
 * share channel draws.
 */
inline ChannelSet generate_channels(const ScenarioConfig& cfg, std::uint64_t trial_index) {
    auto eng = make_engine(cfg.seed, Stream::Channel, trial_index,
                           (static_cast<std::uint64_t>(cfg.n_bs) << 32) | static_cast<std::uint32_t>(cfg.m));
    CMatrix g(cfg.m, cfg.n_bs);
    CMatrix h(cfg.k, cfg.n_bs);
    fill_cn(g, eng);
    fill_cn(h, eng);
    return ChannelSet(std::move(h), std::move(g), cfg.noise_power, cfg.pu_interference());
}

inline void check_dims(const ChannelSet& ch, const Precoder& prec) {
    if (prec.n_bs() != ch.n_bs() || prec.k() != ch.k())
        throw Error("precoder is " + std::to_string(prec.n_bs()) + "x" + std::to_string(prec.k()) +
                    " but channel needs " + std::to_string(ch.n_bs()) + "x" + std::to_string(ch.k()));
}

/// Per-user SINR for all users at once, from the K x K effective channel H W.
inline RVector sinr_all(const ChannelSet& ch, const Precoder& prec) {
    check_dims(ch, prec);
    const Eigen::MatrixXd gain = (ch.H * prec.W()).cwiseAbs2();
    const RVector signal = gain.diagonal();
    const RVector interference = gain.rowwise().sum() - signal;
    return signal.array() / (interference.array() + ch.effective_noise());
}

inline double sinr(const ChannelSet& ch, const Precoder& prec, int k) {
    check_dims(ch, prec);
    if (k < 0 || k >= ch.k()) throw Error("sinr: user index out of range");
    const auto hk = ch.H.row(k);
    double signal = 0.0;
    double interference = 0.0;
    for (int j = 0; j < ch.k(); ++j) {
        const double g = std::norm((hk * prec.W().col(j))(0, 0));
        (j == k ? signal : interference) += g;
    }
    return signal / (interference + ch.effective_noise());
}

/// Sum of log2(1 + SINR_k) in bits/s/Hz.
inline double sum_rate(const ChannelSet& ch, const Precoder& prec) {
    return sinr_all(ch, prec).array().log1p().sum() / std::log(2.0);
}

/// Received power sum_k |g_m^H w_k|^2 at primary user m.
inline double pu_interference(const ChannelSet& ch, const Precoder& prec, int m) {
    check_dims(ch, prec);
    if (m < 0 || m >= ch.m()) throw Error("pu_interference: PU index out of range");
    return (ch.G.row(m) * prec.W()).squaredNorm();
}

}  // namespace zfwf
