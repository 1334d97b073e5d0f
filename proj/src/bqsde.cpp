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

#include "qfermion/bqsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qf {

namespace {

void check_terminal(const TimeGrid &grid, const CliffordElement &yT) {
    if (yT.n() != grid.n_steps()) {
        throw std::invalid_argument("terminal value has n=" + std::to_string(yT.n()) + " but grid has " +
                                    std::to_string(grid.n_steps()) + " steps");
    }
    if (!in_filtration(yT, grid.n_steps())) {
        throw std::invalid_argument("terminal value is not adapted");
    }
}

BackwardPath zero_path(const TimeGrid &g) {
    int n = g.n_steps();
    return BackwardPath{g, std::vector<CliffordElement>(n + 1, CliffordElement::zero(n)),
                        std::vector<CliffordElement>(n, CliffordElement::zero(n))};
}

// One Picard sweep on steps [ks, ke) with terminal y_end; writes into out.
void sweep(const Driver &driver, const TimeGrid &g, const CliffordElement &y_end, int ks, int ke,
           const BackwardPath &z, BackwardPath &out) {
    double dt = g.dt();
    int n = g.n_steps();
    std::vector<CliffordElement> f(ke - ks, CliffordElement::zero(n));
    CliffordElement total = y_end;
    for (int j = ks; j < ke; j++) {
        f[j - ks] = driver.f(j, z.y[j], z.Y[j]);
        total -= dt * f[j - ks];
    }
    std::vector<CliffordElement> m(ke - ks + 1, CliffordElement::zero(n));
    for (int k = ks; k <= ke; k++) {
        m[k - ks] = cond_expect(total, k);
    }
    CliffordElement drift = CliffordElement::zero(n);
    for (int k = ks; k <= ke; k++) {
        out.y[k] = m[k - ks] + drift;
        if (k < ke) {
            out.Y[k] = (1.0 / dt) * mul(m[k - ks + 1] - m[k - ks], dW(g, k));
            drift += dt * f[k - ks];
        }
    }
    out.y[ke] = y_end;
}

double change(const BackwardPath &a, const BackwardPath &b, int ks, int ke) {
    double sq = std::sqrt(a.grid.dt());
    double c = 0.0;
    for (int k = ks; k <= ke; k++) {
        c = std::max(c, norm2(a.y[k] - b.y[k]));
        if (k < ke) {
            c = std::max(c, sq * norm2(a.Y[k] - b.Y[k]));
        }
    }
    return c;
}

double path_metric(const BackwardPath &a, const BackwardPath &b) {
    double sup = 0.0;
    for (size_t k = 0; k < a.y.size(); k++) {
        sup = std::max(sup, norm2(a.y[k] - b.y[k]));
    }
    double quad = 0.0;
    for (size_t k = 0; k < a.Y.size(); k++) {
        double v = norm2(a.Y[k] - b.Y[k]);
        quad += a.grid.dt() * v * v;
    }
    return sup + std::sqrt(quad);
}

double window_base(const Driver &d, const TimeGrid &g, int ks, int ke) {
    double len = (ke - ks) * g.dt();
    return (d.g1 * len) * (d.g1 * len) + d.g2 * d.g2 * len;
}

}  // namespace

BackwardPath solve_stepwise(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT, StepMode mode,
                            const StepwiseOptions &opts) {
    check_terminal(grid, yT);
    int n = grid.n_steps();
    double dt = grid.dt();
    BackwardPath p = zero_path(grid);
    p.y[n] = yT;
    for (int k = n - 1; k >= 0; k--) {
        CliffordElement a = cond_expect(p.y[k + 1], k);
        p.Y[k] = (1.0 / dt) * cond_expect(mul(p.y[k + 1], dW(grid, k)), k);
        if (mode == StepMode::Explicit) {
            p.y[k] = a - dt * driver.f(k, a, p.Y[k]);
            continue;
        }
        CliffordElement y = a;
        bool converged = false;
        for (int it = 0; it < opts.inner_max_iter; it++) {
            CliffordElement next = a - dt * driver.f(k, y, p.Y[k]);
            double delta = norm2(next - y);
            y = std::move(next);
            if (delta <= opts.inner_tol * std::max(1.0, norm2(y))) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw std::runtime_error("implicit step " + std::to_string(k) +
                                     " did not converge; reduce dt so that dt * g1 < 1");
        }
        p.y[k] = std::move(y);
    }
    return p;
}

double measure_contraction_constant(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT) {
    int n = grid.n_steps();
    double base = window_base(driver, grid, 0, n);
    if (base <= 0.0) {
        return 1.0;
    }
    BackwardPath z0 = zero_path(grid);
    BackwardPath g0 = zero_path(grid);
    sweep(driver, grid, yT, 0, n, z0, g0);
    double c = 0.0;
    for (int probe = 0; probe < 2; probe++) {
        BackwardPath z = zero_path(grid);
        for (int k = 0; k < n; k++) {
            if (probe == 0) {
                z.y[k] = identity(n);
            } else {
                z.Y[k] = identity(n);
            }
        }
        BackwardPath gz = zero_path(grid);
        sweep(driver, grid, yT, 0, n, z, gz);
        double rho = path_metric(gz, g0) / path_metric(z, z0);
        c = std::max(c, rho * rho / base);
    }
    return c;
}

PicardResult solve_picard(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT,
                          const PicardOptions &opts) {
    check_terminal(grid, yT);
    int n = grid.n_steps();
    PicardResult r;
    r.contraction_constant =
        opts.contraction_constant ? *opts.contraction_constant : measure_contraction_constant(driver, grid, yT);
    double c = r.contraction_constant;
    r.whole_interval_factor = c * window_base(driver, grid, 0, n);
    if (r.whole_interval_factor <= opts.activation_factor) {
        r.window_bounds.push_back({0, n});
    } else {
        int ke = n;
        while (ke > 0) {
            int ks = ke - 1;
            if (c * window_base(driver, grid, ks, ke) > opts.window_factor) {
                throw std::runtime_error("single step exceeds the contraction bound; refine the grid");
            }
            while (ks > 0 && c * window_base(driver, grid, ks - 1, ke) <= opts.window_factor) {
                ks--;
            }
            r.window_bounds.push_back({ks, ke});
            ke = ks;
        }
    }
    r.windows = static_cast<int>(r.window_bounds.size());
    BackwardPath cur = opts.initial ? *opts.initial : zero_path(grid);
    if (cur.y.size() != static_cast<size_t>(n + 1) || cur.Y.size() != static_cast<size_t>(n)) {
        throw std::invalid_argument("initial iterate has the wrong length");
    }
    CliffordElement y_end = yT;
    for (auto [ks, ke] : r.window_bounds) {
        r.window_factors.push_back(c * window_base(driver, grid, ks, ke));
        int sweeps = 0;
        bool converged = false;
        while (r.iterations < opts.max_iter) {
            BackwardPath next = cur;
            sweep(driver, grid, y_end, ks, ke, cur, next);
            sweeps++;
            r.iterations++;
            double delta = change(next, cur, ks, ke);
            cur = std::move(next);
            if (delta < opts.tol) {
                converged = true;
                break;
            }
        }
        r.window_sweeps.push_back(sweeps);
        if (!converged) {
            throw std::runtime_error("Picard iteration exceeded " + std::to_string(opts.max_iter) + " sweeps");
        }
        y_end = cur.y[ks];
    }
    r.productive_sweeps = r.iterations - r.windows;
    r.path = std::move(cur);
    return r;
}

double residual(const BackwardPath &path, const Driver &driver, const CliffordElement &yT) {
    const TimeGrid &g = path.grid;
    double dt = g.dt();
    double worst = norm2(path.y.back() - yT);
    for (int k = 0; k < g.n_steps(); k++) {
        CliffordElement r =
            path.y[k] - path.y[k + 1] + dt * driver.f(k, path.y[k], path.Y[k]) + mul(path.Y[k], dW(g, k));
        worst = std::max(worst, norm2(r));
    }
    return worst;
}

double sup_distance(const BackwardPath &a, const BackwardPath &b) {
    double d = 0.0;
    for (size_t k = 0; k < a.y.size(); k++) {
        d = std::max(d, norm2(a.y[k] - b.y[k]));
    }
    return d;
}

AprioriBackwardReport apriori_backward_check(const BackwardPath &path, const Driver &driver,
                                             const CliffordElement &yT, double p_prime) {
    AprioriBackwardReport r;
    r.p_prime = p_prime;
    const TimeGrid &g = path.grid;
    int n = g.n_steps();
    double sup = 0.0;
    for (const auto &y : path.y) {
        sup = std::max(sup, lp_norm(y, p_prime));
    }
    double quad = 0.0;
    for (const auto &Y : path.Y) {
        double v = lp_norm(Y, p_prime);
        quad += g.dt() * v * v;
    }
    r.numerator = sup + std::sqrt(quad);
    double src = 0.0;
    CliffordElement z = CliffordElement::zero(n);
    for (int k = 0; k < n; k++) {
        src += lp_norm(driver.f(k, z, z), p_prime) * g.dt();
    }
    r.denominator = lp_norm(yT, p_prime) + src;
    if (r.denominator == 0.0) {
        r.vacuous = r.numerator == 0.0;
        r.ratio = r.vacuous ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        r.ratio = r.numerator / r.denominator;
    }
    r.finite = std::isfinite(r.ratio);
    return r;
}

}  // namespace qf
