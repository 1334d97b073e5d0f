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

#include "qfermion/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qf {

CliffordElement ControlSpace::make(const std::vector<double> &coeffs) const {
    if (coeffs.size() != basis.size() || basis.empty()) {
        throw std::invalid_argument("control coefficient count does not match the basis");
    }
    CliffordElement u = CliffordElement::zero(basis[0].n());
    for (size_t i = 0; i < basis.size(); i++) {
        u += coeffs[i] * basis[i];
    }
    return u;
}

AdaptedProcess constant_control(const TimeGrid &g, const CliffordElement &c) {
    return AdaptedProcess{g, std::vector<CliffordElement>(g.n_steps(), c)};
}

namespace {

bool finite(const CliffordElement &a) {
    for (const Term &t : a.terms()) {
        if (!std::isfinite(t.amp.real()) || !std::isfinite(t.amp.imag())) {
            return false;
        }
    }
    return true;
}

const ElementFn &select(const Coefficients &c, Coefficient which) {
    switch (which) {
        case Coefficient::D:
            return c.D;
        case Coefficient::F:
            return c.F;
        case Coefficient::G:
            return c.G;
    }
    throw std::logic_error("unreachable");
}

}  // namespace

StatePath euler_forward(const Coefficients &coeffs, const CliffordElement &x0, const AdaptedProcess &u) {
    const TimeGrid &g = u.grid;
    int n = g.n_steps();
    if (static_cast<int>(u.values.size()) != n) {
        throw std::invalid_argument("euler_forward: control must have n_steps values");
    }
    require_adapted(u, "euler_forward control");
    if (x0.n() != n || !x0.is_scalar()) {
        throw std::invalid_argument("euler_forward: initial state must be a scalar multiple of I with n = n_steps");
    }
    StatePath path{g, {}};
    path.values.reserve(n + 1);
    path.values.push_back(x0);
    double dt = g.dt();
    for (int k = 0; k < n; k++) {
        const CliffordElement &x = path.values.back();
        CliffordElement w = dW(g, k);
        CliffordElement d = coeffs.D(k, x, u.values[k]);
        CliffordElement f = coeffs.F(k, x, u.values[k]);
        CliffordElement gg = coeffs.G(k, x, u.values[k]);
        if (!finite(d) || !finite(f) || !finite(gg)) {
            throw std::runtime_error("euler_forward: non-finite coefficient at step " + std::to_string(k));
        }
        CliffordElement next = x + dt * d + mul(f, w) + mul(w, gg);
        if (!in_filtration(next, k + 1)) {
            throw std::runtime_error("euler_forward: coefficients broke adaptedness at step " + std::to_string(k));
        }
        if (next.size() > kMaxStateTerms) {
            throw std::runtime_error("euler_forward: state exceeds " + std::to_string(kMaxStateTerms) +
                                     " monomials at step " + std::to_string(k) +
                                     "; multiplicative noise doubles the support per step, use fewer steps");
        }
        path.values.push_back(std::move(next));
    }
    return path;
}

AprioriForwardReport apriori_check(const StatePath &path, const CliffordElement &x0, double p) {
    AprioriForwardReport r;
    r.p = p;
    for (const auto &x : path.values) {
        double v = lp_norm(x, p);
        r.sup_norm_sq = std::max(r.sup_norm_sq, v * v);
    }
    double n0 = lp_norm(x0, p);
    r.ratio = r.sup_norm_sq / (1.0 + n0 * n0);
    r.finite = std::isfinite(r.ratio);
    return r;
}

std::pair<int, int> spike_steps(const TimeGrid &g, double eps, double offset) {
    double dt = g.dt();
    if (!(eps > 0.0) || eps > g.T() * (1.0 + 1e-12)) {
        throw std::invalid_argument("spike width must lie in (0, T]");
    }
    if (eps < dt * (1.0 - 1e-9)) {
        throw std::invalid_argument("spike width " + std::to_string(eps) + " is below the grid step " +
                                    std::to_string(dt) + "; refine the grid");
    }
    if (offset < 0.0 || offset >= g.T()) {
        throw std::invalid_argument("spike offset must lie in [0, T)");
    }
    int first = static_cast<int>(std::lround(offset / dt));
    int count = static_cast<int>(std::lround(eps / dt));
    first = std::min(first, g.n_steps() - 1);
    int last = std::min(first + std::max(count, 1), g.n_steps());
    return {first, last};
}

AdaptedProcess spike(const AdaptedProcess &ubar, const AdaptedProcess &u, double eps, double offset) {
    if (!(ubar.grid == u.grid) || ubar.values.size() != u.values.size()) {
        throw std::invalid_argument("spike: controls live on different grids");
    }
    auto [first, last] = spike_steps(ubar.grid, eps, offset);
    AdaptedProcess out = ubar;
    for (int k = first; k < last; k++) {
        out.values[k] = u.values[k];
    }
    return out;
}

CliffordElement numeric_frechet(const Coefficients &coeffs, Coefficient which, int k, const CliffordElement &x,
                                const CliffordElement &u, const CliffordElement &dir) {
    const ElementFn &phi = select(coeffs, which);
    double h = 1e-5 * (1.0 + norm2(x));
    CliffordElement plus = phi(k, x + h * dir, u);
    CliffordElement minus = phi(k, x - h * dir, u);
    return (1.0 / (2.0 * h)) * (plus - minus);
}

CliffordElement numeric_second_frechet(const Coefficients &coeffs, Coefficient which, int k,
                                       const CliffordElement &x, const CliffordElement &u,
                                       const CliffordElement &dir) {
    const ElementFn &phi = select(coeffs, which);
    double h = 1e-3 * (1.0 + norm2(x));
    CliffordElement plus = phi(k, x + h * dir, u);
    CliffordElement mid = phi(k, x, u);
    CliffordElement minus = phi(k, x - h * dir, u);
    return (1.0 / (h * h)) * (plus - 2.0 * mid + minus);
}

}  // namespace qf
