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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace zfwf {

// Real parametrization of a complex n x K beamformer:
// x = [Re(vec W); Im(vec W)], column-major, length 2 n K.

inline RVector to_params(const CMatrix& w) {
    const Eigen::Index n = w.size();
    RVector x(2 * n);
    const auto v = w.reshaped();
    x.head(n) = v.real();
    x.tail(n) = v.imag();
    return x;
}

inline CMatrix from_params(const RVector& x, int n_bs, int k) {
    const Eigen::Index n = static_cast<Eigen::Index>(n_bs) * k;
    if (x.size() != 2 * n) throw Error("from_params: parameter vector has wrong length");
    CMatrix w(n_bs, k);
    w.reshaped() = x.head(n).cast<cd>() + cd(0.0, 1.0) * x.tail(n).cast<cd>();
    return w;
}

inline double sum_rate(const ChannelSet& ch, const CMatrix& w) {
    return sum_rate(ch, Precoder::from_matrix(w));
}

/**
 * Gradient of the sum rate with respect to the real parameters of W.
 *
 * With A = H W, T_k = sum_j |A_kj|^2 + N and I_k = T_k - |A_kk|^2, the
 * complex gradient (d/dRe + i d/dIm) is (2 / ln 2) H^H (A .* C) where
 * C_kj = 1/T_k - [j != k] / I_k.
 */
inline RVector sumrate_gradient(const ChannelSet& ch, const CMatrix& w) {
    if (w.rows() != ch.n_bs() || w.cols() != ch.k()) throw Error("sumrate_gradient: dimension mismatch");
    const int K = ch.k();
    const CMatrix a = ch.H * w;
    const Eigen::MatrixXd g = a.cwiseAbs2();
    const RVector total = g.rowwise().sum().array() + ch.effective_noise();
    const RVector interference = total - g.diagonal();
    CMatrix weighted(K, K);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < K; ++j)
            weighted(k, j) = a(k, j) * (1.0 / total[k] - (j != k ? 1.0 / interference[k] : 0.0));
    const CMatrix grad = (2.0 / std::log(2.0)) * ch.H.adjoint() * weighted;
    return to_params(grad);
}

/// Central-difference gradient of a scalar function of a real vector.
template <class F>
RVector central_gradient(F&& f, const RVector& x, double step) {
    RVector g(x.size());
    RVector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

struct HessianReport {
    RVector eigenvalues;  ///< ascending, of the symmetrized Hessian
    double min_eig = 0.0;
    double max_eig = 0.0;
    bool indefinite = false;
    double asymmetry = 0.0;  ///< max |H_ij - H_ji| before symmetrization
    double tolerance = 0.0;
};

inline HessianReport hessian_report(const Eigen::MatrixXd& raw) {
    HessianReport rep;
    rep.asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd sym = 0.5 * (raw + raw.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("hessian: eigen-decomposition failed");
    rep.eigenvalues = es.eigenvalues();
    rep.min_eig = rep.eigenvalues.minCoeff();
    rep.max_eig = rep.eigenvalues.maxCoeff();
    rep.tolerance = 1e-6 * std::max(1.0, std::abs(rep.max_eig));
    rep.indefinite = rep.min_eig < -rep.tolerance && rep.max_eig > rep.tolerance;
    return rep;
}

/**
 * Numerical Hessian of the sum rate at W over the 2 n_BS K real parameters:
 * central differences (step h) of the analytic gradient, then symmetrized.
 * The raw asymmetry is O(h^2) and is kept in the report.
 */
inline HessianReport sumrate_hessian(const ChannelSet& ch, const Precoder& prec, double step = 1e-4) {
    check_dims(ch, prec);
    if (!(step > 0.0)) throw Error("sumrate_hessian: step must be > 0");
    const RVector x = to_params(prec.W());
    const Eigen::Index d = x.size();
    const int n = ch.n_bs();
    const int K = ch.k();

    auto grad_at = [&](const RVector& p) {
        const CMatrix w = from_params(p, n, K);
        if (!std::isfinite(sum_rate(ch, w))) throw Error("sumrate_hessian: non-finite objective while probing");
        RVector g = sumrate_gradient(ch, w);
        if (!g.allFinite()) throw Error("sumrate_hessian: non-finite gradient while probing");
        return g;
    };

    Eigen::MatrixXd raw(d, d);
    RVector probe = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        probe[i] = x[i] + step;
        const RVector up = grad_at(probe);
        probe[i] = x[i] - step;
        const RVector down = grad_at(probe);
        probe[i] = x[i];
        raw.col(i) = (up - down) / (2.0 * step);
    }
    return hessian_report(raw);
}

/**
 * L = sum_k log2(1 + SINR_k) - sum_k lambda_k (||w_k||^2 / P_BS - 1)
 *     - sum_m (mu_m / I_m) (sum_k |g_m^H w_k|^2 - 1)
 */
inline double lagrangian(const ChannelSet& ch, const Precoder& prec, const RVector& lambda,
                         const RVector& mu, double p_bs, const RVector& i_m) {
    check_dims(ch, prec);
    if (lambda.size() != ch.k()) throw Error("lagrangian: lambda must have K entries");
    if (mu.size() != ch.m() || i_m.size() != ch.m())
        throw Error("lagrangian: mu and I_m must have M entries");
    if ((lambda.array() < 0.0).any() || (mu.array() < 0.0).any())
        throw Error("lagrangian: multipliers must be >= 0");
    if ((i_m.array() == 0.0).any()) throw Error("lagrangian: I_m entries must be non-zero");
    if (!(p_bs > 0.0)) throw Error("lagrangian: P_BS must be > 0");

    const CMatrix& w = prec.W();
    double value = sum_rate(ch, prec);
    const RVector col_power = w.colwise().squaredNorm().transpose();
    value -= (lambda.array() * (col_power.array() / p_bs - 1.0)).sum();
    if (ch.m() > 0) {
        const RVector pu_power = (ch.G * w).rowwise().squaredNorm();
        value -= (mu.array() / i_m.array() * (pu_power.array() - 1.0)).sum();
    }
    return value;
}

struct ProbeReport {
    int matrices = 0;
    int indefinite = 0;
};

/**
 * Random Hermitian matrices with a negative main diagonal (-|N(0,1)|) and
 * CN(0,1) off-diagonal entries; counts how many have eigenvalues of both
 * signs. Reproduces the random-matrix corroboration experiment.
 */
inline ProbeReport indefiniteness_probe(int dim, int count, std::uint64_t seed) {
    if (dim < 1 || count < 1) throw Error("indefiniteness_probe: dim and count must be >= 1");
    ProbeReport rep;
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int c = 0; c < count; ++c) {
        auto eng = make_engine(seed, Stream::Probe, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(dim));
        CMatrix a(dim, dim);
        for (int i = 0; i < dim; ++i) {
            a(i, i) = -std::abs(nd(eng));
            for (int j = i + 1; j < dim; ++j) {
                const cd z(nd(eng) * std::sqrt(0.5), nd(eng) * std::sqrt(0.5));
                a(i, j) = z;
                a(j, i) = std::conj(z);
            }
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
        const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        ++rep.matrices;
        if (es.eigenvalues().minCoeff() < -tol && es.eigenvalues().maxCoeff() > tol) ++rep.indefinite;
    }
    return rep;
}

struct StationarityReport {
    double lambda = 0.0;          ///< common multiplier on the power terms
    double max_active_grad = 0.0; ///< max |dL/dp_k| over active users
    double budget_residual = 0.0; ///< sum-rate gradient component inside the budget plane
    double sum_rate = 0.0;
    double lagrangian = 0.0;
    std::vector<int> active_set;
};

/**
 * Stationarity of the Lagrangian at the ZFWF point, restricted to power moves
 * along the ZF directions (mu = 0). With water level mu_w of the
 * noise-scaled problem, dR/dp_k = b_k / (ln2 mu_w) on active users, so the
 * common multiplier lambda = P_BS / (ln2 mu_w) makes dL/dp_k vanish there.
 * Both derivatives are taken by central differences of relative step `step`.
 */
inline StationarityReport zfwf_stationarity(const ChannelSet& ch, double p_bs, double step = 1e-4) {
    const CMatrix t = zf_directions(ch);
    const WaterfillResult wr = zf_power_levels(t, ch.effective_noise(), p_bs);
    const RVector b = direction_costs(t);
    const int K = ch.k();

    StationarityReport rep;
    rep.lambda = p_bs / (std::log(2.0) * wr.mu);
    rep.active_set = wr.active_set;
    const RVector lambda = RVector::Constant(K, rep.lambda);
    const RVector mu = RVector::Zero(ch.m());
    const RVector i_m = RVector::Ones(ch.m());

    auto lag = [&](const RVector& p) { return lagrangian(ch, Precoder(t, p), lambda, mu, p_bs, i_m); };
    auto rate = [&](const RVector& p) { return sum_rate(ch, Precoder(t, p)); };
    rep.sum_rate = rate(wr.p);
    rep.lagrangian = lag(wr.p);

    RVector grad_rate = RVector::Zero(K);
    RVector probe = wr.p;
    for (int k : wr.active_set) {
        const double h = step * wr.p[k];
        probe[k] = wr.p[k] + h;
        const double lu = lag(probe), ru = rate(probe);
        probe[k] = wr.p[k] - h;
        const double ld = lag(probe), rd = rate(probe);
        probe[k] = wr.p[k];
        rep.max_active_grad = std::max(rep.max_active_grad, std::abs((lu - ld) / (2.0 * h)));
        grad_rate[k] = (ru - rd) / (2.0 * h);
    }

    // project the active-set rate gradient onto {d : sum_k b_k d_k = 0}
    RVector b_active = RVector::Zero(K);
    for (int k : wr.active_set) b_active[k] = b[k];
    const RVector inplane = grad_rate - (grad_rate.dot(b_active) / b_active.squaredNorm()) * b_active;
    rep.budget_residual = inplane.cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace zfwf
