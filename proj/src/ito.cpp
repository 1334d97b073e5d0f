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

#include "qfermion/ito.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qf {

TimeGrid::TimeGrid(double horizon, int n_steps) : T_(horizon), n_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("time horizon must be positive and finite");
    }
    if (n_steps < 1 || n_steps > kMaxGenerators) {
        throw std::invalid_argument("n_steps must lie in 1.." + std::to_string(kMaxGenerators));
    }
}

bool is_adapted(const AdaptedProcess &f) {
    for (size_t k = 0; k < f.values.size(); k++) {
        if (f.values[k].n() != f.grid.n_steps() || !in_filtration(f.values[k], static_cast<int>(k))) {
            return false;
        }
    }
    return true;
}

void require_adapted(const AdaptedProcess &f, const char *what) {
    for (size_t k = 0; k < f.values.size(); k++) {
        if (f.values[k].n() != f.grid.n_steps()) {
            throw std::invalid_argument(std::string(what) + ": element at step " + std::to_string(k) +
                                        " has n=" + std::to_string(f.values[k].n()) + " but grid has " +
                                        std::to_string(f.grid.n_steps()) + " steps");
        }
        if (!in_filtration(f.values[k], static_cast<int>(k))) {
            throw std::invalid_argument(std::string(what) + ": not adapted at step " + std::to_string(k));
        }
    }
}

CliffordElement dW(const TimeGrid &g, int k) {
    if (k < 0 || k >= g.n_steps()) {
        throw std::out_of_range("increment index " + std::to_string(k) + " out of range");
    }
    return std::sqrt(g.dt()) * generator(g.n_steps(), k);
}

CliffordElement brownian(const TimeGrid &g, int k) {
    if (k < 0 || k > g.n_steps()) {
        throw std::out_of_range("brownian index " + std::to_string(k) + " out of range");
    }
    std::vector<Term> terms;
    double s = std::sqrt(g.dt());
    for (int j = 0; j < k; j++) {
        terms.push_back({bit(j), s});
    }
    return CliffordElement::from_terms(g.n_steps(), std::move(terms));
}

namespace {

MartingaleSeq integral(const AdaptedProcess &f, bool right) {
    require_adapted(f, right ? "right_integral" : "left_integral");
    const TimeGrid &g = f.grid;
    if (static_cast<int>(f.values.size()) != g.n_steps()) {
        throw std::invalid_argument("integrand must have n_steps values");
    }
    MartingaleSeq m{g, {}};
    m.values.reserve(g.n_steps() + 1);
    m.values.push_back(CliffordElement::zero(g.n_steps()));
    for (int k = 0; k < g.n_steps(); k++) {
        CliffordElement inc = right ? mul(f.values[k], dW(g, k)) : mul(dW(g, k), f.values[k]);
        m.values.push_back(m.values.back() + inc);
    }
    return m;
}

}  // namespace

MartingaleSeq right_integral(const AdaptedProcess &f) { return integral(f, true); }
MartingaleSeq left_integral(const AdaptedProcess &f) { return integral(f, false); }

double check_martingale(const AdaptedProcess &m) {
    double worst = 0.0;
    for (size_t k = 0; k + 1 < m.values.size(); k++) {
        worst = std::max(worst, norm2(cond_expect(m.values[k + 1], static_cast<int>(k)) - m.values[k]));
    }
    return worst;
}

AdaptedProcess increment_representation(const MartingaleSeq &m) {
    const TimeGrid &g = m.grid;
    AdaptedProcess y{g, {}};
    y.values.reserve(g.n_steps());
    for (int k = 0; k < g.n_steps(); k++) {
        CliffordElement w = dW(g, k);
        y.values.push_back((1.0 / g.dt()) * mul(m.values[k + 1] - m.values[k], w));
    }
    return y;
}

std::pair<AdaptedProcess, double> mrep_extract(const MartingaleSeq &m) {
    const TimeGrid &g = m.grid;
    if (static_cast<int>(m.values.size()) != g.n_steps() + 1) {
        throw std::invalid_argument("martingale must have n_steps + 1 values");
    }
    require_adapted(m, "mrep_extract");
    double scale = 1.0;
    for (const auto &v : m.values) {
        scale = std::max(scale, norm2(v));
    }
    if (check_martingale(m) > 1e-10 * scale) {
        throw std::invalid_argument("mrep_extract: sequence is not a martingale");
    }
    if (!m.values[0].is_scalar()) {
        throw std::invalid_argument("mrep_extract: initial value is not a scalar multiple of I");
    }
    AdaptedProcess y = increment_representation(m);
    double residual = 0.0;
    for (int k = 0; k < g.n_steps(); k++) {
        CliffordElement r = m.values[k + 1] - m.values[k] - mul(y.values[k], dW(g, k));
        residual = std::max(residual, norm2(r));
    }
    return {y, residual};
}

BgRatios bg_ratios(const AdaptedProcess &f, double p) {
    if (!(p > 1.0)) {
        throw std::invalid_argument("bg_ratios requires p > 1");
    }
    const TimeGrid &g = f.grid;
    BgRatios r;
    r.p = p;
    double quad = 0.0;
    for (const auto &v : f.values) {
        double nv = lp_norm(v, p);
        quad += g.dt() * nv * nv;
    }
    double lhs = std::sqrt(quad);
    double right = lp_norm(right_integral(f).values.back(), p);
    double left = lp_norm(left_integral(f).values.back(), p);
    if (right > 0.0 && lhs > 0.0) {
        r.right_defined = true;
        r.right_lower = lhs / right;
        r.right_upper = right / lhs;
    }
    if (left > 0.0 && lhs > 0.0) {
        r.left_defined = true;
        r.left_lower = lhs / left;
        r.left_upper = left / lhs;
    }
    return r;
}

double commutation_check(const AdaptedProcess &f) {
    require_adapted(f, "commutation_check");
    const TimeGrid &g = f.grid;
    double worst = 0.0;
    for (size_t k = 0; k < f.values.size() && static_cast<int>(k) < g.n_steps(); k++) {
        CliffordElement w = dW(g, static_cast<int>(k));
        CliffordElement e = even_part(f.values[k]);
        CliffordElement o = odd_part(f.values[k]);
        double v = norm2(mul(w, e) - mul(e, w)) + norm2(mul(w, o) + mul(o, w));
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace qf
