// Copyright 2026 The qfermion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qfermion/bqsde.hpp"
#include "qfermion/catalog.hpp"
#include "qfermion/forward.hpp"
#include "qfermion/runner.hpp"

namespace qf {
namespace {

Driver linear(double a) {
    Driver d;
    d.f = [a](int, const CliffordElement &y, const CliffordElement &) { return a * y; };
    d.g1 = std::abs(a);
    return d;
}

Driver zero_driver() {
    Driver d;
    d.f = [](int, const CliffordElement &y, const CliffordElement &) { return CliffordElement::zero(y.n()); };
    return d;
}

TEST(Forward, ControlledDriftIntegratesExactly) {
    TimeGrid g(1.0, 8);
    ControlProblem pb = build_catalog_problem("lq_scalar", g, {{"b", 2.0}});
    StatePath x = euler_forward(pb.coeffs, pb.x0, constant_control(g, 0.25 * identity(8)));
    // x_n = x_0 + b u T with a = c = 0.
    EXPECT_LE(max_abs_diff(x.values.back(), 1.5 * identity(8)), 1e-15);
    EXPECT_TRUE(is_adapted(x));
}

TEST(Forward, LinearDriftIsEulerProduct) {
    TimeGrid g(1.0, 10);
    ControlProblem pb = build_catalog_problem("lq_scalar", g, {{"a", -1.0}});
    StatePath x = euler_forward(pb.coeffs, pb.x0, constant_control(g, CliffordElement::zero(10)));
    EXPECT_NEAR(vacuum(x.values.back()).real(), std::pow(0.9, 10), 1e-14);
}

TEST(Forward, MultiplicativeNoiseStaysAdaptedWithGrowingSupport) {
    TimeGrid g(1.0, 6);
    ControlProblem pb = build_catalog_problem("odd_drift", g);
    StatePath x = euler_forward(pb.coeffs, pb.x0, constant_control(g, 0.3 * identity(6)));
    EXPECT_TRUE(is_adapted(x));
    EXPECT_GT(x.values.back().size(), 6u);
    EXPECT_TRUE(support_doubling(pb));
    EXPECT_FALSE(support_doubling(build_catalog_problem("lq_scalar", g)));
}

TEST(Forward, RejectsNonScalarInitialState) {
    TimeGrid g(1.0, 4);
    ControlProblem pb = build_catalog_problem("lq_scalar", g);
    EXPECT_THROW(euler_forward(pb.coeffs, generator(4, 0), constant_control(g, identity(4))), std::invalid_argument);
}

TEST(Forward, AprioriRatioFinite) {
    TimeGrid g(1.0, 8);
    ControlProblem pb = build_catalog_problem("control_in_noise", g);
    StatePath x = euler_forward(pb.coeffs, pb.x0, constant_control(g, identity(8)));
    AprioriForwardReport r = apriori_check(x, pb.x0, 2.0);
    EXPECT_TRUE(r.finite);
    EXPECT_GT(r.ratio, 0.0);
}

TEST(Forward, SpikeStepsCoverTheWidth) {
    TimeGrid g(1.0, 8);
    EXPECT_EQ(spike_steps(g, 0.25, 0.0), std::make_pair(0, 2));
    EXPECT_EQ(spike_steps(g, 0.25, 0.5), std::make_pair(4, 6));
    EXPECT_THROW(spike_steps(g, 0.05, 0.0), std::invalid_argument);
}

TEST(Forward, NumericFrechetMatchesAnalytic) {
    std::mt19937_64 rng(31);
    TimeGrid g(1.0, 6);
    ControlProblem pb = build_catalog_problem("odd_drift", g, {{"a", -0.7}, {"c", 0.4}});
    CliffordElement x = random_element(6, 3, rng);
    CliffordElement dir = random_element(6, 3, rng);
    CliffordElement u = identity(6);
    EXPECT_LE(norm2(numeric_frechet(pb.coeffs, Coefficient::D, 3, x, u, dir) - pb.coeffs.Dx(3, x, u)(dir)), 1e-6);
    EXPECT_LE(norm2(numeric_frechet(pb.coeffs, Coefficient::F, 3, x, u, dir) - pb.coeffs.Fx(3, x, u)(dir)), 1e-6);
    EXPECT_LE(norm2(numeric_frechet(pb.coeffs, Coefficient::G, 3, x, u, dir) - pb.coeffs.Gx(3, x, u)(dir)), 1e-6);
    EXPECT_LE(norm2(numeric_second_frechet(pb.coeffs, Coefficient::D, 3, x, u, dir)), 1e-6);
}

TEST(Bqsde, ZeroDriverGivesTheMartingale) {
    std::mt19937_64 rng(32);
    TimeGrid g(1.0, 6);
    CliffordElement yT = random_element(6, 6, rng, 0.5);
    BackwardPath p = solve_stepwise(zero_driver(), g, yT);
    for (int k = 0; k <= 6; k++) {
        EXPECT_LE(max_abs_diff(p.y[k], cond_expect(yT, k)), 1e-15);
    }
    auto [Y, res] = mrep_extract(MartingaleSeq{g, p.y});
    for (int k = 0; k < 6; k++) {
        EXPECT_LE(max_abs_diff(p.Y[k], Y.values[k]), 1e-12);
    }
    PicardResult pr = solve_picard(zero_driver(), g, yT);
    EXPECT_EQ(pr.productive_sweeps, 1);
    EXPECT_EQ(sup_distance(pr.path, p), 0.0);
}

TEST(Bqsde, HandExpansionOnTwoSteps) {
    TimeGrid g(1.0, 2);
    BackwardPath p = solve_stepwise(zero_driver(), g, mul(generator(2, 0), generator(2, 1)));
    EXPECT_TRUE(p.y[1].is_zero());
    EXPECT_LE(max_abs_diff(p.Y[1], (1.0 / std::sqrt(g.dt())) * generator(2, 0)), 1e-15);
}

TEST(Bqsde, ScalarLinearClosedForm) {
    // y_0 = e^{-aT} for f = a y and y_T = I. The implicit recursion is
    // y_k = y_{k+1} / (1 + a dt), so the discrete value is (1 + dt)^{-n}.
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        TimeGrid g(1.0, n);
        BackwardPath p = solve_stepwise(linear(1.0), g, identity(n));
        EXPECT_NEAR(vacuum(p.y[0]).real(), std::pow(1.0 + g.dt(), -n), 1e-12);
        double err = std::abs(vacuum(p.y[0]).real() - std::exp(-1.0));
        EXPECT_LE(err, 0.01);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 2.0, 0.05);
        }
        prev = err;
        EXPECT_LE(residual(p, linear(1.0), identity(n)), 1e-10);
    }
}

TEST(Bqsde, ExplicitResidualIsSecondOrderPerStep) {
    std::vector<double> r;
    for (int n : {16, 32, 64}) {
        TimeGrid g(1.0, n);
        r.push_back(residual(solve_stepwise(linear(1.0), g, identity(n), StepMode::Explicit), linear(1.0),
                             identity(n)));
    }
    EXPECT_NEAR(r[0] / r[1], 4.0, 0.2);
    EXPECT_NEAR(r[1] / r[2], 4.0, 0.2);
}

TEST(Bqsde, ZeroedMartingalePartLeavesLargeResidual) {
    TimeGrid g(1.0, 4);
    CliffordElement yT = identity(4) + mul(generator(4, 0), generator(4, 3));
    BackwardPath p = solve_stepwise(zero_driver(), g, yT);
    for (auto &Y : p.Y) {
        Y = CliffordElement::zero(4);
    }
    EXPECT_GT(residual(p, zero_driver(), yT), 0.1);
}

TEST(Bqsde, PicardAgreesWithStepwiseAndWindowsLargeDrivers) {
    TimeGrid g(1.0, 64);
    CliffordElement yT = identity(64) + mul(generator(64, 1), generator(64, 62));
    PicardOptions po;
    po.tol = 1e-12;
    po.max_iter = 1000;
    PicardResult pr = solve_picard(linear(8.0), g, yT, po);
    EXPECT_GE(pr.windows, 2);
    for (size_t i = 0; i < pr.window_factors.size(); i++) {
        EXPECT_LE(pr.window_factors[i], po.window_factor + 1e-12);
    }
    BackwardPath st = solve_stepwise(linear(8.0), g, yT);
    EXPECT_LE(sup_distance(pr.path, st), 1e-9);
    EXPECT_LE(residual(pr.path, linear(8.0), yT), 1e-9);
}

TEST(Bqsde, SmallDriverUsesOneWindow) {
    TimeGrid g(1.0, 16);
    PicardResult pr = solve_picard(linear(0.3), g, identity(16));
    EXPECT_EQ(pr.windows, 1);
    EXPECT_NEAR(pr.contraction_constant, 1.0, 1e-9);
}

TEST(Bqsde, PicardReportsNonConvergence) {
    TimeGrid g(1.0, 16);
    PicardOptions po;
    po.max_iter = 2;
    EXPECT_THROW(solve_picard(linear(1.0), g, identity(16) + generator(16, 3), po), std::runtime_error);
}

TEST(Bqsde, UniqueFromRandomStart) {
    std::mt19937_64 rng(33);
    TimeGrid g(1.0, 12);
    CliffordElement yT = identity(12) + generator(12, 5) + mul(generator(12, 2), generator(12, 9));
    PicardOptions po;
    po.tol = 1e-12;
    po.max_iter = 2000;
    PicardResult a = solve_picard(linear(1.0), g, yT, po);
    BackwardPath init{g, {}, {}};
    for (int k = 0; k <= 12; k++) {
        init.y.push_back(random_element(12, k, rng));
    }
    for (int k = 0; k < 12; k++) {
        init.Y.push_back(random_element(12, k, rng));
    }
    po.initial = init;
    PicardResult b = solve_picard(linear(1.0), g, yT, po);
    EXPECT_LE(sup_distance(a.path, b.path), 1e-11);
}

TEST(Bqsde, AprioriRatioVacuousOnZeroData) {
    TimeGrid g(1.0, 4);
    BackwardPath p = solve_stepwise(zero_driver(), g, CliffordElement::zero(4));
    AprioriBackwardReport r = apriori_backward_check(p, zero_driver(), CliffordElement::zero(4));
    EXPECT_TRUE(r.vacuous);
}

TEST(Bqsde, AprioriRatioStableUnderRefinement) {
    std::vector<double> ratios;
    for (int n : {8, 16, 32}) {
        TimeGrid g(1.0, n);
        CliffordElement yT = identity(n) + generator(n, 0);
        BackwardPath p = solve_stepwise(zero_driver(), g, yT);
        AprioriBackwardReport r = apriori_backward_check(p, zero_driver(), yT, 1.5);
        EXPECT_TRUE(r.finite);
        ratios.push_back(r.ratio);
    }
    EXPECT_NEAR(ratios[1] / ratios[0], 1.0, 0.1);
    EXPECT_NEAR(ratios[2] / ratios[1], 1.0, 0.1);
}

}  // namespace
}  // namespace qf
