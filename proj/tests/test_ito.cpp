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

#include "qfermion/element_operator.hpp"
#include "qfermion/ito.hpp"
#include "qfermion/runner.hpp"

namespace qf {
namespace {

TEST(ElementOperator, StructuredNodesMatchDenseMatrices) {
    std::mt19937_64 rng(21);
    int n = 4;
    CliffordElement a = random_element(n, n, rng);
    CliffordElement b = random_element(n, n, rng);
    CliffordElement x = random_element(n, n, rng);
    std::vector<ElementOperator> ops = {
        ElementOperator::left_mul(a),
        ElementOperator::right_mul(b),
        ElementOperator::grading(n),
        ElementOperator::grade_affine(n, 2.0, cplx(0.0, 1.0)),
        compose(ElementOperator::left_mul(a), ElementOperator::right_mul(b)),
        ElementOperator::left_mul(a) + cplx(3.0) * ElementOperator::grading(n),
    };
    for (const auto &op : ops) {
        CliffordElement direct = op(x);
        CliffordElement via = from_vector(n, op.materialize() * to_vector(x));
        EXPECT_LE(max_abs_diff(direct, via), 1e-12);
    }
    EXPECT_LE(max_abs_diff(ElementOperator::left_mul(a)(x), mul(a, x)), 1e-15);
    EXPECT_LE(max_abs_diff(ElementOperator::right_mul(b)(x), mul(x, b)), 1e-15);
}

TEST(ElementOperator, CompositionAppliesRightOperandFirst) {
    int n = 3;
    CliffordElement g0 = generator(n, 0);
    CliffordElement g1 = generator(n, 1);
    ElementOperator t = compose(ElementOperator::left_mul(g0), ElementOperator::left_mul(g1));
    EXPECT_EQ(t(identity(n)), mul(g0, g1));
}

TEST(ElementOperator, GradeAffineCombinationsFold) {
    int n = 200;
    ElementOperator t = ElementOperator::scalar(n, 2.0) + ElementOperator::grading(n);
    t = compose(t, cplx(0.5) * ElementOperator::identity(n));
    auto ga = t.as_grade_affine();
    ASSERT_TRUE(ga.has_value());
    EXPECT_EQ(ga->first, cplx(1.0));
    EXPECT_EQ(ga->second, cplx(0.5));
    EXPECT_EQ(t.kind(), ElementOperator::Kind::GradeAffine);
}

TEST(ElementOperator, AdjointSatisfiesPairingIdentity) {
    std::mt19937_64 rng(22);
    int n = 4;
    CliffordElement a = random_element(n, n, rng);
    CliffordElement x = random_element(n, n, rng);
    CliffordElement y = random_element(n, n, rng);
    ElementOperator t = compose(ElementOperator::left_mul(a), ElementOperator::grading(n)) +
                        ElementOperator::right_mul(random_element(n, n, rng));
    EXPECT_LE(std::abs(pairing(t(x), y) - pairing(x, op_adjoint(t)(y))), 1e-12);
}

TEST(ElementOperator, GradePartsSumBack) {
    std::mt19937_64 rng(23);
    int n = 3;
    ElementOperator t = ElementOperator::left_mul(random_element(n, n, rng));
    auto [e, o] = op_grade_parts(t);
    EXPECT_LE(op_distance(e + o, t), 1e-12);
    EXPECT_LE(op_distance(grading_conjugate(e), e), 1e-12);
    EXPECT_LE(op_distance(grading_conjugate(o), cplx(-1.0) * o), 1e-12);
}

TEST(Brownian, SquareIsTimeTimesIdentity) {
    TimeGrid g(2.0, 16);
    for (int k = 0; k <= 16; k++) {
        CliffordElement w = brownian(g, k);
        EXPECT_LE(max_abs_diff(mul(w, w), g.t(k) * identity(16)), 1e-12);
        EXPECT_LE(max_abs_diff(mul(adjoint(w), w), g.t(k) * identity(16)), 1e-12);
    }
}

TEST(Brownian, DisjointIncrementsAnticommute) {
    TimeGrid g(1.0, 6);
    CliffordElement a = dW(g, 1);
    CliffordElement b = dW(g, 4);
    EXPECT_LE(norm2(mul(a, b) + mul(b, a)), 1e-15);
}

TEST(Integrals, IsometryAndMartingaleProperty) {
    std::mt19937_64 rng(24);
    TimeGrid g(1.0, 8);
    for (int i = 0; i < 20; i++) {
        AdaptedProcess f = random_adapted(g, rng, 0.5);
        MartingaleSeq r = right_integral(f);
        MartingaleSeq l = left_integral(f);
        double quad = 0.0;
        for (const auto &fk : f.values) {
            quad += g.dt() * norm2(fk) * norm2(fk);
        }
        EXPECT_NEAR(norm2(r.values.back()) * norm2(r.values.back()), quad, 1e-12);
        EXPECT_NEAR(norm2(l.values.back()) * norm2(l.values.back()), quad, 1e-12);
        EXPECT_LE(check_martingale(r), 1e-12);
        EXPECT_LE(check_martingale(l), 1e-12);
        EXPECT_TRUE(is_adapted(r));
    }
}

TEST(Integrals, LeftAndRightDifferByTheOddPart) {
    TimeGrid g(1.0, 2);
    AdaptedProcess f{g, {identity(2), generator(2, 0)}};
    CliffordElement r = right_integral(f).values.back();
    CliffordElement l = left_integral(f).values.back();
    // gamma_0 dW_1 = -dW_1 gamma_0 while the even integrand commutes.
    EXPECT_LE(max_abs_diff(r + l, 2.0 * dW(g, 0)), 1e-15);
}

TEST(MartingaleRepresentation, HandExpansionOnTwoSteps) {
    TimeGrid g(1.0, 2);
    CliffordElement mT = mul(generator(2, 0), generator(2, 1));
    MartingaleSeq m{g, {cond_expect(mT, 0), cond_expect(mT, 1), mT}};
    EXPECT_TRUE(m.values[1].is_zero());
    auto [Y, res] = mrep_extract(m);
    EXPECT_LE(res, 1e-15);
    EXPECT_TRUE(Y.values[0].is_zero());
    EXPECT_LE(max_abs_diff(Y.values[1], (1.0 / std::sqrt(g.dt())) * generator(2, 0)), 1e-15);
}

TEST(MartingaleRepresentation, ExactOnRandomMartingales) {
    std::mt19937_64 rng(25);
    TimeGrid g(1.0, 7);
    for (int i = 0; i < 20; i++) {
        CliffordElement mT = random_element(7, 7, rng, 0.5);
        MartingaleSeq m{g, {}};
        for (int k = 0; k <= 7; k++) {
            m.values.push_back(cond_expect(mT, k));
        }
        auto [Y, res] = mrep_extract(m);
        EXPECT_LE(res, 1e-12);
        EXPECT_TRUE(is_adapted(Y));
    }
}

TEST(MartingaleRepresentation, RejectsNonMartingales) {
    TimeGrid g(1.0, 2);
    MartingaleSeq m{g, {identity(2), generator(2, 1), generator(2, 1)}};
    EXPECT_THROW(mrep_extract(m), std::invalid_argument);
}

TEST(Commutation, NoiseCommutesWithEvenAndAnticommutesWithOdd) {
    std::mt19937_64 rng(26);
    TimeGrid g(1.0, 8);
    for (int i = 0; i < 20; i++) {
        EXPECT_LE(commutation_check(random_adapted(g, rng)), 1e-12);
    }
}

TEST(BgRatios, TwoNormRatiosAreUnity) {
    std::mt19937_64 rng(27);
    TimeGrid g(1.0, 6);
    BgRatios r = bg_ratios(random_adapted(g, rng), 2.0);
    EXPECT_TRUE(r.right_defined);
    EXPECT_NEAR(r.right_lower, 1.0, 1e-12);
    EXPECT_NEAR(r.left_lower, 1.0, 1e-12);
}

TEST(BgRatios, FiniteAwayFromTwo) {
    std::mt19937_64 rng(28);
    TimeGrid g(1.0, 6);
    for (double p : {1.25, 1.5, 3.0}) {
        BgRatios r = bg_ratios(random_adapted(g, rng, 0.5), p);
        EXPECT_TRUE(std::isfinite(r.right_lower) && std::isfinite(r.right_upper));
        EXPECT_GT(r.right_lower, 0.0);
    }
    EXPECT_THROW(bg_ratios(random_adapted(g, rng), 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace qf
