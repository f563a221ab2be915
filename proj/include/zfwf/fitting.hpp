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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace zfwf {

using Point = std::pair<double, double>;

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rmse = 0.0;
    double snr_db = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
inline LinearFit linear_fit(const std::vector<Point>& points, double snr_db = 0.0) {
    if (points.size() < 2) throw Error("linear_fit: need at least 2 points");
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0)) throw Error("linear_fit: need at least 2 distinct abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = y - (fit.slope * x + fit.intercept);
        ss += r * r;
    }
    fit.rmse = std::sqrt(ss / n);
    fit.snr_db = snr_db;
    return fit;
}

enum class FitTarget { Phi, Beta };

inline std::string to_string(FitTarget t) { return t == FitTarget::Phi ? "phi" : "beta"; }

struct PowerLawFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    FitTarget target = FitTarget::Phi;
    double rmse = 0.0;

    double operator()(double gamma) const { return a * std::pow(gamma, b) + c; }
};

namespace detail {

/// Best (a, b) for a fixed offset c by log-log regression; rmse is in the original space.
inline PowerLawFit powerlaw_given_offset(const std::vector<Point>& pts, double c) {
    PowerLawFit f;
    f.c = c;
    f.rmse = std::numeric_limits<double>::infinity();
    bool any_pos = false, any_neg = false;
    for (const auto& [g, v] : pts) {
        const double d = v - c;
        if (d > 0.0) any_pos = true;
        else if (d < 0.0) any_neg = true;
        else return f;
    }
    if (any_pos && any_neg) return f;
    const double sign = any_pos ? 1.0 : -1.0;

    std::vector<Point> logs;
    logs.reserve(pts.size());
    for (const auto& [g, v] : pts) logs.emplace_back(std::log(g), std::log(sign * (v - c)));
    const LinearFit lf = linear_fit(logs);
    f.a = sign * std::exp(lf.intercept);
    f.b = lf.slope;
    double ss = 0.0;
    for (const auto& [g, v] : pts) {
        const double r = f(g) - v;
        ss += r * r;
    }
    f.rmse = std::sqrt(ss / static_cast<double>(pts.size()));
    if (!std::isfinite(f.rmse)) f.rmse = std::numeric_limits<double>::infinity();
    return f;
}

}  // namespace detail

/**
 * Fits v = a * gamma^b + c (gamma linear, > 0).
 *
 * The offset c is searched on a 201-point grid spanning
 * [min v - range, max v + range]; for each candidate, (a, b) come from a
 * log-log regression of |v - c| on gamma. The bracket is then zoomed 10x
 * around the incumbent repeatedly until its spacing is negligible. A
 * candidate only replaces the incumbent when its rmse is strictly lower.
 */
inline PowerLawFit powerlaw_fit(const std::vector<Point>& points, FitTarget target = FitTarget::Phi) {
    if (points.size() < 4) throw Error("powerlaw_fit: need at least 4 points");
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    double gmin = vmin, gmax = -vmin;
    for (const auto& [g, v] : points) {
        if (!(g > 0.0) || !std::isfinite(g) || !std::isfinite(v))
            throw Error("powerlaw_fit: abscissae must be finite and > 0 (linear gamma)");
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
    }
    const double range = vmax - vmin;
    if (!(range > 0.0)) throw Error("powerlaw_fit: all values are equal");
    if (!(gmax > gmin)) throw Error("powerlaw_fit: need at least 2 distinct abscissae");

    constexpr int grid = 201;
    PowerLawFit best;
    best.rmse = std::numeric_limits<double>::infinity();
    double lo = vmin - range;
    double hi = vmax + range;
    for (int round = 0; round < 16; ++round) {
        const double spacing = (hi - lo) / (grid - 1);
        for (int i = 0; i < grid; ++i) {
            const PowerLawFit cand = detail::powerlaw_given_offset(points, lo + i * spacing);
            if (cand.rmse < best.rmse) best = cand;
        }
        if (!std::isfinite(best.rmse)) throw Error("powerlaw_fit: no admissible offset on the search grid");
        if (spacing < 1e-13 * std::max(1.0, std::abs(best.c)) || best.rmse == 0.0) break;
        const double half = (hi - lo) / 20.0;
        lo = best.c - half;
        hi = best.c + half;
    }
    best.target = target;
    return best;
}

/// K*(gamma, n_BS) = phi(gamma) n_BS + beta(gamma), phi and beta power laws;
/// phi is passed through tan() when `apply_tan` is set.
struct KstarFit {
    double a1 = 0.0, b1 = 0.0, c1 = 0.0;
    double a2 = 0.0, b2 = 0.0, c2 = 0.0;
    bool apply_tan = true;

    /// Published reference coefficients (tan form).
    static KstarFit reference() { return {-0.5189, -0.2608, 0.8107, -3.2938, 0.0360, 3.8715, true}; }
};

inline double kstar_formula_linear(const KstarFit& fit, double gamma, double n_bs) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("kstar_formula: gamma must be finite and > 0");
    const double phi = fit.a1 * std::pow(gamma, fit.b1) + fit.c1;
    const double beta = fit.a2 * std::pow(gamma, fit.b2) + fit.c2;
    return (fit.apply_tan ? std::tan(phi) : phi) * n_bs + beta;
}

inline double kstar_formula(const KstarFit& fit, double snr_db, double n_bs) {
    return kstar_formula_linear(fit, db_to_linear(snr_db), n_bs);
}

/// Nearest integer K in [1, n_BS - M].
inline int round_kstar(double value, int n_bs, int m) {
    const int hi = std::max(1, n_bs - m);
    const long r = std::lround(value);
    return static_cast<int>(std::clamp<long>(r, 1, hi));
}

struct SurrogateFit {
    std::vector<LinearFit> linear;  ///< one per SNR, ascending
    PowerLawFit phi;
    PowerLawFit beta;
    KstarFit formula;  ///< apply_tan = false, built from phi and beta
};

/**
 * Two-stage surrogate: per-SNR line K* = phi n_BS + beta over the supplied
 * (n_BS, SNR dB, K*) samples, then power laws phi(gamma), beta(gamma) in
 * linear gamma.
 */
inline SurrogateFit fit_surrogate(const std::vector<std::tuple<int, double, int>>& samples) {
    std::map<double, std::vector<Point>> by_snr;
    for (const auto& [n, snr, k] : samples) by_snr[snr].emplace_back(n, k);
    SurrogateFit out;
    std::vector<Point> phi_pts, beta_pts;
    for (const auto& [snr, pts] : by_snr) {
        LinearFit lf = linear_fit(pts, snr);
        out.linear.push_back(lf);
        phi_pts.emplace_back(db_to_linear(snr), lf.slope);
        beta_pts.emplace_back(db_to_linear(snr), lf.intercept);
    }
    out.phi = powerlaw_fit(phi_pts, FitTarget::Phi);
    out.beta = powerlaw_fit(beta_pts, FitTarget::Beta);
    out.formula = {out.phi.a, out.phi.b, out.phi.c, out.beta.a, out.beta.b, out.beta.c, false};
    return out;
}

}  // namespace zfwf
