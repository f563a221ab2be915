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


#include "zfwf/analysis.hpp"

#include <gtest/gtest.h>

using namespace zfwf;

namespace {

ChannelSet draw(int k, int m, int n, std::uint64_t trial) {
    ScenarioConfig cfg;
    cfg.k = k;
    cfg.m = m;
    cfg.n_bs = n;
    return generate_channels(cfg, trial);
}

CMatrix random_beams(int n, int k, std::uint64_t seed) {
    auto eng = make_engine(seed, Stream::Probe, 1000 + seed);
    CMatrix w(n, k);
    fill_cn(w, eng);
    return w;
}

}  // namespace

TEST(Params, RoundTrip) {
    const CMatrix w = random_beams(4, 3, 1);
    EXPECT_TRUE(from_params(to_params(w), 4, 3) == w);
    EXPECT_THROW(from_params(RVector::Zero(5), 4, 3), Error);
}

TEST(Gradient, MatchesFiniteDifferences) {
    for (int trial = 0; trial < 10; ++trial) {
        const ChannelSet ch = draw(3, 1, 4, trial);
        const CMatrix w = random_beams(4, 3, trial);
        const RVector analytic = sumrate_gradient(ch, w);
        const RVector numeric = central_gradient(
            [&](const RVector& x) { return sum_rate(ch, from_params(x, 4, 3)); }, to_params(w), 1e-6);
        EXPECT_LT((analytic - numeric).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, analytic.cwiseAbs().maxCoeff()));
    }
}

TEST(Hessian, SingleUserBelowUnitSinrIsNotIndefinite) {
    // log(1 + |h^H w|^2 / N) has positive tangential curvature once the SINR exceeds 1
    CMatrix h(1, 3);
    h << 1.0, 0.5, cd(0.0, 0.3);
    const ChannelSet ch(h, CMatrix(), 1.0, 1.0);
    const CMatrix t = h.adjoint() / h.squaredNorm();
    const double p_low = 0.5 * ch.effective_noise();
    const double p_high = 8.0 * ch.effective_noise();
    const HessianReport low = sumrate_hessian(ch, Precoder(t, RVector::Constant(1, p_low)));
    EXPECT_FALSE(low.indefinite);
    const HessianReport high = sumrate_hessian(ch, Precoder(t, RVector::Constant(1, p_high)));
    EXPECT_TRUE(high.indefinite);
}

TEST(Hessian, SomeZfepPointIsIndefinite) {
    int indefinite = 0;
    for (int trial = 0; trial < 100 && indefinite == 0; ++trial) {
        const ChannelSet ch = draw(3, 0, 4, trial);
        if (sumrate_hessian(ch, zf_equalpower(ch, 10.0)).indefinite) ++indefinite;
    }
    EXPECT_GE(indefinite, 1);
}

TEST(Hessian, StepDoublingChangesSpectrumLittle) {
    for (int trial = 0; trial < 5; ++trial) {
        const ChannelSet ch = draw(3, 0, 4, trial);
        const Precoder prec = zf_equalpower(ch, 10.0);
        const HessianReport a = sumrate_hessian(ch, prec, 1e-4);
        const HessianReport b = sumrate_hessian(ch, prec, 2e-4);
        const double scale = a.eigenvalues.cwiseAbs().maxCoeff();
        EXPECT_LT((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 0.01 * scale);
    }
}

TEST(Hessian, AsymmetryShrinksWithStep) {
    const ChannelSet ch = draw(3, 0, 4, 2);
    const Precoder prec = zf_equalpower(ch, 10.0);
    const double coarse = sumrate_hessian(ch, prec, 4e-2).asymmetry;
    const double fine = sumrate_hessian(ch, prec, 2e-2).asymmetry;
    EXPECT_GT(coarse, 0.0);
    EXPECT_GE(coarse / fine, 3.0);
}

TEST(Hessian, ReportOnKnownMatrices) {
    const HessianReport pd = hessian_report(Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal().toDenseMatrix());
    EXPECT_FALSE(pd.indefinite);
    EXPECT_DOUBLE_EQ(pd.min_eig, 1.0);
    const HessianReport ind = hessian_report(Eigen::Vector2d(-1.0, 2.0).asDiagonal().toDenseMatrix());
    EXPECT_TRUE(ind.indefinite);
    Eigen::Matrix2d skew;
    skew << 1.0, 0.5, 0.0, 1.0;
    EXPECT_DOUBLE_EQ(hessian_report(skew).asymmetry, 0.5);
    const HessianReport tiny = hessian_report(Eigen::Vector2d(-1e-9, 1.0).asDiagonal().toDenseMatrix());
    EXPECT_FALSE(tiny.indefinite);
}

TEST(Lagrangian, ZeroMultipliersGiveSumRateExactly) {
    for (int trial = 0; trial < 20; ++trial) {
        const ChannelSet ch = draw(3, 2, 6, trial);
        const Precoder prec = Precoder::from_matrix(random_beams(6, 3, trial));
        EXPECT_EQ(lagrangian(ch, prec, RVector::Zero(3), RVector::Zero(2), 5.0, RVector::Ones(2)),
                  sum_rate(ch, prec));
    }
}

TEST(Lagrangian, ZeroBeamsWithUnitMultipliers) {
    const ChannelSet ch = draw(3, 2, 6, 0);
    const Precoder zero = Precoder::from_matrix(CMatrix::Zero(6, 3));
    EXPECT_DOUBLE_EQ(lagrangian(ch, zero, RVector::Ones(3), RVector::Zero(2), 5.0, RVector::Ones(2)), 3.0);
    EXPECT_DOUBLE_EQ(lagrangian(ch, zero, RVector::Zero(3), RVector::Ones(2), 5.0, RVector::Constant(2, 4.0)), 0.5);
}

TEST(Lagrangian, RejectsBadMultipliers) {
    const ChannelSet ch = draw(3, 2, 6, 0);
    const Precoder prec = Precoder::from_matrix(random_beams(6, 3, 0));
    EXPECT_THROW(lagrangian(ch, prec, RVector::Zero(3), RVector::Zero(2), 5.0, RVector::Zero(2)), Error);
    EXPECT_THROW(lagrangian(ch, prec, RVector::Zero(2), RVector::Zero(2), 5.0, RVector::Ones(2)), Error);
    EXPECT_THROW(lagrangian(ch, prec, -RVector::Ones(3), RVector::Zero(2), 5.0, RVector::Ones(2)), Error);
    EXPECT_THROW(lagrangian(ch, prec, RVector::Zero(3), RVector::Zero(2), 0.0, RVector::Ones(2)), Error);
}

TEST(Stationarity, ZfwfPointIsStationary) {
    for (int trial = 0; trial < 20; ++trial) {
        const ChannelSet ch = draw(5, 1, 8, trial);
        const StationarityReport rep = zfwf_stationarity(ch, 10.0);
        EXPECT_GT(rep.lambda, 0.0);
        EXPECT_FALSE(rep.active_set.empty());
        EXPECT_LT(rep.max_active_grad, 1e-4);
        EXPECT_LT(rep.budget_residual, 1e-4);
    }
}

TEST(Stationarity, EqualPowerIsNotStationaryInGeneral) {
    // along the budget plane the ZFEP powers leave a rate gradient
    const ChannelSet ch = draw(5, 1, 8, 4);
    const CMatrix t = zf_directions(ch);
    const RVector b = direction_costs(t);
    const Precoder ep = zf_equalpower(ch, 10.0, t);
    const double base = sum_rate(ch, ep);
    const double shift = 1e-2;
    int best = 0, worst = 0;
    for (int k = 1; k < 5; ++k) {
        if (b[k] < b[best]) best = k;
        if (b[k] > b[worst]) worst = k;
    }
    RVector p = ep.p();
    p[best] += shift / b[best];
    p[worst] -= shift / b[worst];
    EXPECT_GT(sum_rate(ch, Precoder(t, p)), base);
}

TEST(Probe, RandomNegativeDiagonalHermitianMatricesAreOftenIndefinite) {
    const ProbeReport rep = indefiniteness_probe(6, 100, 1);
    EXPECT_EQ(rep.matrices, 100);
    EXPECT_GT(rep.indefinite, 50);
    EXPECT_EQ(indefiniteness_probe(1, 10, 1).indefinite, 0);
    EXPECT_THROW(indefiniteness_probe(0, 10, 1), Error);
}
