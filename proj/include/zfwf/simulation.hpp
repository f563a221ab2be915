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

#include "zfwf/core_model.hpp"
#include "zfwf/precoders.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace zfwf {

// ------------------------------------------------------------------------
// Deterministic parallel helpers

/// Neumaier-compensated sum, accumulated in index order.
class CompensatedSum {
  public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/**
 * Calls fn(i) for i in [begin, end). Each index is visited exactly once;
 * callers write results into per-index slots so the outcome does not
 * depend on the thread count. The first exception is rethrown.
 */
template <class Fn>
void parallel_for(long long begin, long long end, int threads, Fn&& fn) {
    const long long count = end - begin;
    if (count <= 0) return;
    const int workers = static_cast<int>(std::min<long long>(resolve_threads(threads), count));
    if (workers == 1) {
        for (long long i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long long i = next.fetch_add(1);
                if (i >= end) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(end);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ------------------------------------------------------------------------
// Schemes

enum class Scheme { ZFWF, ZFEP, MMSE };

inline std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::ZFWF: return "ZFWF";
        case Scheme::ZFEP: return "ZFEP";
        case Scheme::MMSE: return "MMSE";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return std::toupper(c); });
    if (u == "ZFWF" || u == "ZF-WF") return Scheme::ZFWF;
    if (u == "ZFEP" || u == "ZF-EP") return Scheme::ZFEP;
    if (u == "MMSE") return Scheme::MMSE;
    throw Error("unknown scheme '" + s + "' (expected ZFWF, ZFEP or MMSE)");
}

inline bool is_zero_forcing(Scheme s) { return s != Scheme::MMSE; }

inline void validate_for(const ScenarioConfig& cfg, Scheme scheme) {
    if (is_zero_forcing(scheme)) {
        cfg.validate_zf();
    } else {
        cfg.validate();
        if (cfg.k > cfg.n_bs) throw Error("scenario infeasible for MMSE: need K <= n_BS");
    }
}

/// Precoder for `scheme`; `zf_t` carries precomputed ZF directions (ignored for MMSE).
inline Precoder build_precoder(Scheme scheme, const ChannelSet& ch, double p_bs, const CMatrix& zf_t) {
    switch (scheme) {
        case Scheme::ZFWF: return zf_waterfill(ch, p_bs, zf_t);
        case Scheme::ZFEP: return zf_equalpower(ch, p_bs, zf_t);
        case Scheme::MMSE: return mmse_precoder(ch, p_bs);
    }
    throw Error("unknown scheme");
}

inline Precoder build_precoder(Scheme scheme, const ChannelSet& ch, double p_bs) {
    return build_precoder(scheme, ch, p_bs, is_zero_forcing(scheme) ? zf_directions(ch) : CMatrix());
}

// ------------------------------------------------------------------------
// Ergodic sum capacity

struct CapacityCurve {
    std::vector<double> snr_db;
    std::vector<double> mean_rate;
    std::vector<double> std_err;
    int trials = 0;
    Scheme scheme = Scheme::ZFWF;
    ScenarioConfig scenario;
};

/// Per-trial sum rates, trials x snr points. Trial t always uses generate_channels(cfg, t).
inline Eigen::MatrixXd capacity_samples(const ScenarioConfig& cfg, Scheme scheme, int threads = 0) {
    validate_for(cfg, scheme);
    const auto npts = static_cast<Eigen::Index>(cfg.snr_db.size());
    Eigen::MatrixXd rates(cfg.trials, npts);
    parallel_for(0, cfg.trials, threads, [&](long long t) {
        const ChannelSet ch = generate_channels(cfg, static_cast<std::uint64_t>(t));
        const CMatrix zf_t = is_zero_forcing(scheme) ? zf_directions(ch) : CMatrix();
        for (Eigen::Index s = 0; s < npts; ++s) {
            const Precoder prec = build_precoder(scheme, ch, cfg.p_bs_at(cfg.snr_db[s]), zf_t);
            rates(t, s) = sum_rate(ch, prec);
        }
    });
    return rates;
}

/// Mean and standard error per column, summed in trial order.
inline void column_stats(const Eigen::MatrixXd& samples, std::vector<double>& mean, std::vector<double>& se) {
    const auto n = samples.rows();
    mean.assign(samples.cols(), 0.0);
    se.assign(samples.cols(), 0.0);
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        CompensatedSum s;
        for (Eigen::Index r = 0; r < n; ++r) s.add(samples(r, c));
        const double m = s.value() / static_cast<double>(n);
        CompensatedSum sq;
        for (Eigen::Index r = 0; r < n; ++r) sq.add((samples(r, c) - m) * (samples(r, c) - m));
        mean[c] = m;
        se[c] = n > 1 ? std::sqrt(sq.value() / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    }
}

inline CapacityCurve run_capacity(const ScenarioConfig& cfg, Scheme scheme, int threads = 0) {
    const Eigen::MatrixXd samples = capacity_samples(cfg, scheme, threads);
    CapacityCurve curve;
    curve.snr_db = cfg.snr_db;
    curve.trials = cfg.trials;
    curve.scheme = scheme;
    curve.scenario = cfg;
    column_stats(samples, curve.mean_rate, curve.std_err);
    return curve;
}

// ------------------------------------------------------------------------
// Bit error rate

struct BerCurve {
    std::vector<double> snr_db;
    std::vector<double> ber;
    std::vector<long long> bits_simulated;
    std::vector<long long> bit_errors;
    std::vector<long long> trials_used;
    Scheme scheme = Scheme::ZFWF;
    ScenarioConfig scenario;
};

/// Gray-mapped unit-energy 4-QAM: bit 0 on the in-phase sign, bit 1 on quadrature.
inline cd qam4_symbol(unsigned bits) {
    const double a = 1.0 / std::sqrt(2.0);
    return {(bits & 1U) ? -a : a, (bits & 2U) ? -a : a};
}

inline unsigned qam4_detect(cd z) { return (z.real() < 0.0 ? 1U : 0U) | (z.imag() < 0.0 ? 2U : 0U); }

struct BitCount {
    long long bits = 0;
    long long errors = 0;
};

/**
 * Transmits `symbols` 4-QAM vectors x through y = H W x + n, n ~ CN(0, N),
 * and detects each user coherently on its scalar gain h_k^H w_k. A user with
 * zero gain is detected from the raw received sample.
 */
template <class Engine>
BitCount simulate_symbols(const ChannelSet& ch, const Precoder& prec, int symbols, Engine& eng) {
    const int K = ch.k();
    const CMatrix a = ch.H * prec.W();
    std::normal_distribution<double> nd(0.0, std::sqrt(ch.effective_noise() / 2.0));
    std::vector<unsigned> sent(K);
    CVector x(K);
    BitCount count;
    for (int s = 0; s < symbols; ++s) {
        for (int k = 0; k < K; ++k) {
            sent[k] = static_cast<unsigned>(eng() & 3U);
            x[k] = qam4_symbol(sent[k]);
        }
        for (int k = 0; k < K; ++k) {
            cd y = a.row(k) * x;
            const double nr = nd(eng);
            const double ni = nd(eng);
            y += cd(nr, ni);
            const cd gain = a(k, k);
            const unsigned got = qam4_detect(std::abs(gain) > 0.0 ? y / gain : y);
            count.errors += std::popcount(got ^ sent[k]);
        }
        count.bits += 2LL * K;
    }
    return count;
}

/**
 * Per SNR point, trials run in fixed batches until at least
 * `min_bit_errors` errors are counted or `max_trials` is reached. The
 * stopping decision is taken only at batch boundaries, so the result does
 * not depend on the thread count.
 */
inline BerCurve run_ber(const ScenarioConfig& cfg, Scheme scheme, int threads = 0) {
    validate_for(cfg, scheme);
    if (cfg.modulation != Modulation::Qam4) throw Error("run_ber: unsupported modulation");
    constexpr long long batch = 256;

    BerCurve curve;
    curve.snr_db = cfg.snr_db;
    curve.scheme = scheme;
    curve.scenario = cfg;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        const double p_bs = cfg.p_bs_at(cfg.snr_db[s]);
        long long bits = 0;
        long long errors = 0;
        long long done = 0;
        while (done < cfg.max_trials && errors < cfg.min_bit_errors) {
            const long long n = std::min(batch, cfg.max_trials - done);
            std::vector<BitCount> slot(static_cast<std::size_t>(n));
            parallel_for(0, n, threads, [&](long long i) {
                const auto t = static_cast<std::uint64_t>(done + i);
                const ChannelSet ch = generate_channels(cfg, t);
                const Precoder prec = build_precoder(scheme, ch, p_bs);
                auto eng = make_engine(cfg.seed, Stream::Symbols, t, s);
                slot[static_cast<std::size_t>(i)] = simulate_symbols(ch, prec, cfg.symbols_per_trial, eng);
            });
            for (const auto& c : slot) {
                bits += c.bits;
                errors += c.errors;
            }
            done += n;
        }
        curve.ber.push_back(static_cast<double>(errors) / static_cast<double>(bits));
        curve.bits_simulated.push_back(bits);
        curve.bit_errors.push_back(errors);
        curve.trials_used.push_back(done);
    }
    return curve;
}

// ------------------------------------------------------------------------
// Optimal number of secondary users

struct KstarPoint {
    int n_bs = 0;
    double snr_db = 0.0;
    int k_star = 0;
    double peak_rate = 0.0;
    std::vector<double> mean_rate_by_k;  ///< index K-1
};

struct KstarOptions {
    double noise_power = 1.0;
    double ip_db = 0.0;
    int threads = 0;
};

/**
 * Mean ZFWF sum rate for every K = 1 .. n_BS - M and argmax over K (ties go
 * to the smaller K), for each (n_BS, SNR) pair. Trial t uses the same
 * channel draw for every K and every SNR. On ZF directions the rate of
 * user k is log2(1 + p_k / N) exactly, which is what is averaged here.
 * Output is ordered by n_BS, then SNR.
 */
inline std::vector<KstarPoint> kstar_sweep(const std::vector<int>& n_grid, const std::vector<double>& snr_grid,
                                           int m, int trials, std::uint64_t seed, const KstarOptions& opt = {}) {
    if (trials < 1) throw Error("kstar: trials must be >= 1");
    if (m < 0) throw Error("kstar: M must be >= 0");
    std::vector<KstarPoint> out;
    const auto nsnr = snr_grid.size();
    for (int n : n_grid) {
        if (n - m < 1) throw Error("kstar: need n_BS - M >= 1 (n_BS=" + std::to_string(n) + ", M=" + std::to_string(m) + ")");
        const int kmax = n - m;
        ScenarioConfig cfg;
        cfg.k = kmax;
        cfg.m = m;
        cfg.n_bs = n;
        cfg.seed = seed;
        cfg.noise_power = opt.noise_power;
        cfg.ip_db = opt.ip_db;
        cfg.trials = trials;
        cfg.validate_zf();
        const double noise = cfg.effective_noise();

        // rates[t] holds kmax x nsnr values
        std::vector<Eigen::MatrixXd> rates(static_cast<std::size_t>(trials));
        parallel_for(0, trials, opt.threads, [&](long long t) {
            const ChannelSet full = generate_channels(cfg, static_cast<std::uint64_t>(t));
            Eigen::MatrixXd r(kmax, static_cast<Eigen::Index>(nsnr));
            for (int k = 1; k <= kmax; ++k) {
                const ChannelSet ch(full.H.topRows(k), full.G, full.noise_power, full.pu_interference);
                const RVector b = noise * direction_costs(zf_directions(ch));
                for (std::size_t s = 0; s < nsnr; ++s) {
                    const WaterfillResult wr = waterfill(b, cfg.p_bs_at(snr_grid[s]));
                    r(k - 1, static_cast<Eigen::Index>(s)) = wr.p.array().log1p().sum() / std::log(2.0);
                }
            }
            rates[static_cast<std::size_t>(t)] = std::move(r);
        });

        for (std::size_t s = 0; s < nsnr; ++s) {
            KstarPoint pt;
            pt.n_bs = n;
            pt.snr_db = snr_grid[s];
            pt.k_star = 0;
            pt.peak_rate = -1.0;
            for (int k = 1; k <= kmax; ++k) {
                CompensatedSum acc;
                for (const auto& r : rates) acc.add(r(k - 1, static_cast<Eigen::Index>(s)));
                const double mean = acc.value() / trials;
                pt.mean_rate_by_k.push_back(mean);
                if (mean > pt.peak_rate) {
                    pt.peak_rate = mean;
                    pt.k_star = k;
                }
            }
            out.push_back(std::move(pt));
        }
    }
    return out;
}

inline KstarPoint kstar_search(int n_bs, double snr_db, int m, int trials, std::uint64_t seed,
                               const KstarOptions& opt = {}) {
    return kstar_sweep({n_bs}, {snr_db}, m, trials, seed, opt).front();
}

}  // namespace zfwf
