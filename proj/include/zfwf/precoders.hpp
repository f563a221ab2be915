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
#include <numeric>
#include <vector>

namespace zfwf {

struct WaterfillResult {
    RVector p;
    double mu = 0.0;
    std::vector<int> active_set;  ///< ascending user indices with p_k > 0
};

/**
 * Exact water-filling: maximizes sum_k log(1 + p_k) subject to
 * sum_k b_k p_k = P, giving p_k = [mu - b_k]^+ / b_k with
 * sum_k [mu - b_k]^+ = P.
 *
 * The water level comes from the sorted-threshold search: with b sorted
 * ascending, take the largest r with mu_r = (P + b_(1) + ... + b_(r)) / r > b_(r).
 */
inline WaterfillResult waterfill(const RVector& b, double p_bs) {
    if (b.size() == 0) throw Error("waterfill: empty b vector");
    if (!(p_bs > 0.0) || !std::isfinite(p_bs)) throw Error("waterfill: P_BS must be finite and > 0");
    if (!b.allFinite() || (b.array() <= 0.0).any())
        throw Error("waterfill: all b_k must be finite and > 0");

    const auto K = static_cast<int>(b.size());
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return b[i] < b[j]; });

    // prefix sums over the sorted b
    std::vector<double> prefix(K + 1, 0.0);
    for (int r = 0; r < K; ++r) prefix[r + 1] = prefix[r] + b[order[r]];

    int active = 1;
    double mu = p_bs + b[order[0]];
    for (int r = K; r >= 1; --r) {
        const double mu_r = (p_bs + prefix[r]) / r;
        if (mu_r > b[order[r - 1]]) {
            active = r;
            mu = mu_r;
            break;
        }
    }

    WaterfillResult out;
    out.mu = mu;
    out.p = RVector::Zero(K);
    for (int r = 0; r < active; ++r) {
        const int k = order[r];
        out.p[k] = (mu - b[k]) / b[k];
        out.active_set.push_back(k);
    }
    std::sort(out.active_set.begin(), out.active_set.end());
    return out;
}

/**
 * Zero-forcing beam directions that also null every primary user.
 *
 * The rows of G are orthonormalized (Householder QR of G^H) so that
 * P = I - Q Q^H is an exact orthogonal projector onto the PU null space.
 * With T' = P H^H the directions are T = T' (H T')^{-1}, giving H T = I and
 * G T = 0.
 */
inline CMatrix zf_directions(const ChannelSet& ch) {
    const int K = ch.k();
    const int M = ch.m();
    const int n = ch.n_bs();
    if (M + K - 1 >= n)
        throw Error("zf_directions: need M + K - 1 < n_BS (K=" + std::to_string(K) +
                    ", M=" + std::to_string(M) + ", n_BS=" + std::to_string(n) + ")");

    CMatrix t_proj = ch.H.adjoint();
    if (M > 0) {
        Eigen::ColPivHouseholderQR<CMatrix> qr(ch.G.adjoint());
        if (qr.rank() < M) throw Error("zf_directions: PU channel matrix G is rank deficient");
        const CMatrix q = qr.householderQ() * CMatrix::Identity(n, M);
        t_proj -= q * (q.adjoint() * t_proj);
        // second pass removes the O(eps) leakage of the first
        t_proj -= q * (q.adjoint() * t_proj);
    }

    const CMatrix gram = ch.H * t_proj;
    Eigen::FullPivLU<CMatrix> lu(gram);
    if (lu.rank() < K)
        throw Error("zf_directions: projected channel H T' is rank deficient (stacked [G; H] rows dependent)");
    CMatrix t = t_proj * lu.inverse();
    // one step of iterative refinement on H T = I
    t += t_proj * lu.solve(CMatrix::Identity(K, K) - ch.H * t);
    return t;
}

/// b_k = ||t_k||^2
inline RVector direction_costs(const CMatrix& t) { return t.colwise().squaredNorm().transpose(); }

/**
 * Rate-optimal powers on fixed interference-free directions. The rate of
 * user k is log2(1 + p_k / N), so water-filling runs on N b_k and the
 * resulting levels are rescaled by N. The returned result carries the
 * water level of the scaled problem.
 */
inline WaterfillResult zf_power_levels(const CMatrix& t, double noise, double p_bs) {
    if (!(noise > 0.0)) throw Error("zf_power_levels: effective noise must be > 0");
    WaterfillResult wr = waterfill(noise * direction_costs(t), p_bs);
    wr.p *= noise;
    return wr;
}

inline Precoder zf_waterfill(const ChannelSet& ch, double p_bs, const CMatrix& t) {
    return Precoder(t, zf_power_levels(t, ch.effective_noise(), p_bs).p);
}

inline Precoder zf_waterfill(const ChannelSet& ch, double p_bs) {
    return zf_waterfill(ch, p_bs, zf_directions(ch));
}

/// Uniform per-user power on the ZF beams, normalized to sum_k p_k ||t_k||^2 = P_BS.
inline Precoder zf_equalpower(const ChannelSet& /*ch*/, double p_bs, const CMatrix& t) {
    if (!(p_bs > 0.0)) throw Error("zf_equalpower: P_BS must be > 0");
    const double level = p_bs / direction_costs(t).sum();
    return Precoder(t, RVector::Constant(t.cols(), level));
}

inline Precoder zf_equalpower(const ChannelSet& ch, double p_bs) {
    return zf_equalpower(ch, p_bs, zf_directions(ch));
}

/// Unscaled regularized inverse H^H (H H^H + alpha I)^{-1}.
inline CMatrix mmse_directions(const ChannelSet& ch, double alpha) {
    const int K = ch.k();
    const CMatrix gram = ch.H * ch.H.adjoint() + alpha * CMatrix::Identity(K, K);
    return ch.H.adjoint() * gram.llt().solve(CMatrix::Identity(K, K));
}

/**
 * Regularized channel inversion with alpha = K (sigma^2 + I_p) / P_BS,
 * globally rescaled to total power P_BS. PU interference is not constrained.
 */
inline Precoder mmse_precoder(const ChannelSet& ch, double p_bs) {
    if (!(p_bs > 0.0)) throw Error("mmse_precoder: P_BS must be > 0");
    if (ch.k() > ch.n_bs()) throw Error("mmse_precoder: need K <= n_BS");
    const double alpha = ch.k() * ch.effective_noise() / p_bs;
    CMatrix w = mmse_directions(ch, alpha);
    w *= std::sqrt(p_bs / w.squaredNorm());

    const RVector norms = w.colwise().norm().transpose();
    CMatrix t = w;
    RVector p(norms.size());
    for (Eigen::Index k = 0; k < norms.size(); ++k) {
        if (norms[k] > 0.0) {
            t.col(k) /= norms[k];
            p[k] = norms[k] * norms[k];
        } else {
            p[k] = 0.0;
        }
    }
    return Precoder(t, p);
}

}  // namespace zfwf
