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

#include "qfermion/max_principle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <stdexcept>
#include <thread>

namespace qf {

double cost_of_path(const ControlProblem &problem, const StatePath &x, const AdaptedProcess &u) {
    const TimeGrid &g = problem.grid;
    double j = 0.0;
    for (int k = 0; k < g.n_steps(); k++) {
        j += problem.L(k, x.values[k], u.values[k]) * g.dt();
    }
    return j + problem.h(x.values.back());
}

double cost(const ControlProblem &problem, const AdaptedProcess &u) {
    return cost_of_path(problem, euler_forward(problem.coeffs, problem.x0, u), u);
}

SpikeSet make_spike_set(const TimeGrid &g, double eps, double offset) {
    auto [first, last] = spike_steps(g, eps, offset);
    return SpikeSet{first, last};
}

namespace {

struct Frozen {
    ElementOperator Dx, Fx, Gx;
};

Frozen frozen_at(const ControlProblem &pb, int k, const CliffordElement &x, const CliffordElement &u) {
    return Frozen{pb.coeffs.Dx(k, x, u), pb.coeffs.Fx(k, x, u), pb.coeffs.Gx(k, x, u)};
}

void check_pair(const ControlProblem &pb, const StatePath &xbar, const AdaptedProcess &ubar) {
    int n = pb.grid.n_steps();
    if (static_cast<int>(xbar.values.size()) != n + 1 || static_cast<int>(ubar.values.size()) != n) {
        throw std::invalid_argument("state/control lengths do not match the problem grid");
    }
}

}  // namespace

StatePath solve_var_y(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                      const AdaptedProcess &u, double eps, double offset) {
    check_pair(problem, xbar, ubar);
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    double dt = g.dt();
    SpikeSet s = make_spike_set(g, eps, offset);
    StatePath y{g, {CliffordElement::zero(n)}};
    y.values.reserve(n + 1);
    for (int k = 0; k < n; k++) {
        const CliffordElement &xb = xbar.values[k];
        const CliffordElement &ub = ubar.values[k];
        Frozen op = frozen_at(problem, k, xb, ub);
        const CliffordElement &yk = y.values[k];
        CliffordElement a = op.Fx(yk);
        CliffordElement b = op.Gx(yk);
        if (s.contains(k)) {
            a += problem.coeffs.F(k, xb, u.values[k]) - problem.coeffs.F(k, xb, ub);
            b += problem.coeffs.G(k, xb, u.values[k]) - problem.coeffs.G(k, xb, ub);
        }
        CliffordElement w = dW(g, k);
        y.values.push_back(yk + dt * op.Dx(yk) + mul(a, w) + mul(w, b));
    }
    return y;
}

StatePath solve_var_z(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                      const AdaptedProcess &u, const StatePath &y, double eps, double offset) {
    check_pair(problem, xbar, ubar);
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    double dt = g.dt();
    SpikeSet s = make_spike_set(g, eps, offset);
    StatePath z{g, {CliffordElement::zero(n)}};
    z.values.reserve(n + 1);
    const Coefficients &c = problem.coeffs;
    for (int k = 0; k < n; k++) {
        const CliffordElement &xb = xbar.values[k];
        const CliffordElement &ub = ubar.values[k];
        const CliffordElement &yk = y.values[k];
        const CliffordElement &zk = z.values[k];
        Frozen op = frozen_at(problem, k, xb, ub);
        CliffordElement d = op.Dx(zk) + 0.5 * c.Dxx(k, xb, ub)(yk, yk);
        CliffordElement a = op.Fx(zk) + 0.5 * c.Fxx(k, xb, ub)(yk, yk);
        CliffordElement b = op.Gx(zk) + 0.5 * c.Gxx(k, xb, ub)(yk, yk);
        if (s.contains(k)) {
            const CliffordElement &uk = u.values[k];
            d += c.D(k, xb, uk) - c.D(k, xb, ub);
            a += c.Fx(k, xb, uk)(yk) - op.Fx(yk);
            b += c.Gx(k, xb, uk)(yk) - op.Gx(yk);
        }
        CliffordElement w = dW(g, k);
        z.values.push_back(zk + dt * d + mul(a, w) + mul(w, b));
    }
    return z;
}

double loglog_slope(const std::vector<double> &eps, const std::vector<double> &values) {
    if (eps.size() != values.size() || eps.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two matched points");
    }
    double mx = 0.0;
    double my = 0.0;
    size_t m = eps.size();
    for (size_t i = 0; i < m; i++) {
        mx += std::log(eps[i]);
        my += std::log(values[i]);
    }
    mx /= m;
    my /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (size_t i = 0; i < m; i++) {
        double dx = std::log(eps[i]) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

double sup_norm_sq(const StatePath &a, double p) {
    double s = 0.0;
    for (const auto &v : a.values) {
        double x = lp_norm(v, p);
        s = std::max(s, x * x);
    }
    return s;
}

StatePath diff(const StatePath &a, const StatePath &b) {
    StatePath r{a.grid, {}};
    r.values.reserve(a.values.size());
    for (size_t k = 0; k < a.values.size(); k++) {
        r.values.push_back(a.values[k] - b.values[k]);
    }
    return r;
}

void classify(LadderSeries &s, const std::vector<double> &eps) {
    size_t zeros = 0;
    for (double v : s.values) {
        if (v <= kLadderZeroFloor) {
            zeros++;
        }
    }
    if (zeros == s.values.size()) {
        s.status = LadderStatus::IdenticallyZero;
        s.slope = 0.0;
    } else if (zeros > 0) {
        s.status = LadderStatus::Degenerate;
        s.slope = 0.0;
    } else {
        s.status = LadderStatus::Fitted;
        s.slope = loglog_slope(eps, s.values);
    }
}

}  // namespace

LadderReport variation_ladder(const ControlProblem &problem, const AdaptedProcess &ubar, const AdaptedProcess &u,
                              const std::vector<double> &eps_list, double offset, int min_steps) {
    const TimeGrid &g = problem.grid;
    for (double e : eps_list) {
        if (e < min_steps * g.dt() * (1.0 - 1e-9)) {
            throw std::invalid_argument("ladder eps below " + std::to_string(min_steps) +
                                        " grid steps; refine the grid");
        }
    }
    LadderReport r;
    r.offset = offset;
    r.eps_list = eps_list;
    const char *names[5] = {"xi", "y", "z", "eta", "zeta"};
    const double targets[5] = {1.0, 1.0, 2.0, 2.0, 2.0};
    for (int i = 0; i < 5; i++) {
        r.series.push_back(LadderSeries{names[i], targets[i], {}, 0.0, LadderStatus::Degenerate});
    }
    StatePath xbar = euler_forward(problem.coeffs, problem.x0, ubar);
    for (double e : eps_list) {
        AdaptedProcess ue = spike(ubar, u, e, offset);
        StatePath xe = euler_forward(problem.coeffs, problem.x0, ue);
        StatePath y = solve_var_y(problem, xbar, ubar, u, e, offset);
        StatePath z = solve_var_z(problem, xbar, ubar, u, y, e, offset);
        StatePath xi = diff(xe, xbar);
        StatePath eta = diff(xi, y);
        StatePath zeta = diff(eta, z);
        double vals[5] = {sup_norm_sq(xi, problem.p), sup_norm_sq(y, problem.p), sup_norm_sq(z, problem.p),
                          sup_norm_sq(eta, problem.p), sup_norm_sq(zeta, problem.p)};
        for (int i = 0; i < 5; i++) {
            r.series[i].values.push_back(vals[i]);
        }
        if (vals[4] > std::max(vals[3], kLadderZeroFloor)) {
            r.zeta_below_eta = false;
        }
    }
    for (auto &s : r.series) {
        classify(s, eps_list);
    }
    return r;
}

namespace {

struct AdjointOps {
    ElementOperator dx_adj;
    ElementOperator a_adj;
    CliffordElement lx;
};

}  // namespace

AdjointPair first_adjoint(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar) {
    check_pair(problem, xbar, ubar);
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    std::vector<AdjointOps> ops;
    ops.reserve(n);
    for (int k = 0; k < n; k++) {
        Frozen f = frozen_at(problem, k, xbar.values[k], ubar.values[k]);
        ElementOperator a = compose(ElementOperator::grading(n), f.Fx) + f.Gx;
        ops.push_back(AdjointOps{op_adjoint(f.Dx), op_adjoint(a), problem.Lx(k, xbar.values[k], ubar.values[k])});
    }
    Driver d;
    d.f = [&ops](int k, const CliffordElement &phi, const CliffordElement &Phi) {
        const AdjointOps &o = ops[k];
        return -(o.dx_adj(phi) + o.a_adj(grading(Phi)) - o.lx);
    };
    BackwardPath bp = solve_stepwise(d, g, -problem.hx(xbar.values.back()), StepMode::Implicit);
    return AdjointPair{std::move(bp.y), std::move(bp.Y)};
}

cplx hamiltonian(const ControlProblem &problem, int k, const CliffordElement &x, const CliffordElement &u,
                 const CliffordElement &phi, const CliffordElement &Phi) {
    const Coefficients &c = problem.coeffs;
    CliffordElement noise = grading(c.F(k, x, u)) + c.G(k, x, u);
    return pairing(phi, c.D(k, x, u)) + pairing(grading(Phi), noise) - problem.L(k, x, u);
}

namespace {

std::pair<cplx, cplx> require_deterministic(const ElementOperator &op, const char *name, int k) {
    auto ga = op.as_grade_affine();
    if (!ga) {
        throw StochasticCoefficientError(std::string("second adjoint: ") + name + " at step " + std::to_string(k) +
                                         " is not a deterministic map (alpha I + beta grading); the general "
                                         "operator-valued equation is not supported");
    }
    return *ga;
}

}  // namespace

SecondAdjointPath second_adjoint_deterministic(const ControlProblem &problem, const StatePath &xbar,
                                               const AdaptedProcess &ubar, const AdjointPair &adj) {
    check_pair(problem, xbar, ubar);
    (void)adj;
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    double dt = g.dt();
    SecondAdjointPath out;
    out.P.resize(n + 1);
    ElementOperator pn = cplx(-1.0) * problem.hxx(xbar.values.back()).op;
    require_deterministic(pn, "terminal Hessian", n);
    out.P[n] = pn;
    ElementOperator ups = ElementOperator::grading(n);
    for (int k = n - 1; k >= 0; k--) {
        const CliffordElement &xb = xbar.values[k];
        const CliffordElement &ub = ubar.values[k];
        Frozen f = frozen_at(problem, k, xb, ub);
        require_deterministic(f.Dx, "Dx", k);
        require_deterministic(f.Fx, "Fx", k);
        require_deterministic(f.Gx, "Gx", k);
        const Coefficients &c = problem.coeffs;
        if (!c.Dxx(k, xb, ub).known_zero || !c.Fxx(k, xb, ub).known_zero || !c.Gxx(k, xb, ub).known_zero) {
            throw StochasticCoefficientError("second adjoint: curvature of D, F or G pairs with the random adjoint "
                                             "state; only curvature-free coefficients are supported");
        }
        ElementOperator hxx = cplx(-1.0) * problem.Lxx(k, xb, ub).op;
        require_deterministic(hxx, "Hamiltonian Hessian", k);
        const ElementOperator &p = out.P[k + 1];
        ElementOperator a = compose(ups, f.Fx) + f.Gx;
        ElementOperator b = f.Fx + compose(ups, f.Gx);
        ElementOperator rhs = compose(op_adjoint(f.Dx), p) + compose(p, f.Dx) +
                              compose(op_adjoint(a), compose(p, b)) + hxx;
        ElementOperator next = p + cplx(dt) * rhs;
        auto ga = next.as_grade_affine();
        auto gs = op_adjoint(next).as_grade_affine();
        out.max_asymmetry = std::max({out.max_asymmetry, std::abs(ga->first - gs->first),
                                      std::abs(ga->second - gs->second)});
        out.P[k] = cplx(0.5) * (next + op_adjoint(next));
    }
    return out;
}

double mp_lhs(const ControlProblem &problem, int k, const CliffordElement &u_cand, const StatePath &xbar,
              const AdaptedProcess &ubar, const AdjointPair &adj, const SecondAdjointPath *P,
              bool first_order_only) {
    const Coefficients &c = problem.coeffs;
    const CliffordElement &x = xbar.values[k];
    const CliffordElement &ub = ubar.values[k];
    double lhs = std::real(hamiltonian(problem, k, x, ub, adj.phi[k], adj.Phi[k])) -
                 std::real(hamiltonian(problem, k, x, u_cand, adj.phi[k], adj.Phi[k]));
    CliffordElement dF = c.F(k, x, u_cand) - c.F(k, x, ub);
    CliffordElement dG = c.G(k, x, u_cand) - c.G(k, x, ub);
    if (dF.is_zero() && dG.is_zero()) {
        return lhs;
    }
    if (P == nullptr) {
        if (first_order_only) {
            return lhs;
        }
        throw std::invalid_argument("mp_lhs: second adjoint required when F or G depend on the control");
    }
    auto [pe, po] = op_grade_parts(P->P[k]);
    ElementOperator pdiff = pe - po;
    CliffordElement left = dF + grading(dG);
    CliffordElement right = grading(dF) + dG;
    return lhs - 0.5 * std::real(pairing(pdiff(left), right));
}

DualityReport duality_check(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                            const AdaptedProcess &u, double eps, double offset, const AdjointPair &adj) {
    const TimeGrid &g = problem.grid;
    const Coefficients &c = problem.coeffs;
    int n = g.n_steps();
    double dt = g.dt();
    SpikeSet s = make_spike_set(g, eps, offset);
    StatePath y = solve_var_y(problem, xbar, ubar, u, eps, offset);
    StatePath z = solve_var_z(problem, xbar, ubar, u, y, eps, offset);
    DualityReport r;
    r.lhs_y = pairing(adj.phi[n], y.values[n]);
    r.lhs_yz = pairing(adj.phi[n], y.values[n] + z.values[n]);
    cplx rhs_z = 0.0;
    for (int k = 0; k < n; k++) {
        const CliffordElement &xb = xbar.values[k];
        const CliffordElement &ub = ubar.values[k];
        const CliffordElement &yk = y.values[k];
        CliffordElement lx = problem.Lx(k, xb, ub);
        CliffordElement ups_phi = grading(adj.Phi[k]);
        CliffordElement sD = 0.5 * c.Dxx(k, xb, ub)(yk, yk);
        CliffordElement sF = 0.5 * c.Fxx(k, xb, ub)(yk, yk);
        CliffordElement sG = 0.5 * c.Gxx(k, xb, ub)(yk, yk);
        r.rhs_y += dt * pairing(lx, yk);
        if (s.contains(k)) {
            const CliffordElement &uk = u.values[k];
            CliffordElement dF = c.F(k, xb, uk) - c.F(k, xb, ub);
            CliffordElement dG = c.G(k, xb, uk) - c.G(k, xb, ub);
            r.rhs_y += dt * pairing(ups_phi, grading(dF) + dG);
            sD += c.D(k, xb, uk) - c.D(k, xb, ub);
            sF += c.Fx(k, xb, uk)(yk) - c.Fx(k, xb, ub)(yk);
            sG += c.Gx(k, xb, uk)(yk) - c.Gx(k, xb, ub)(yk);
        }
        rhs_z += dt * (pairing(lx, z.values[k]) + pairing(adj.phi[k], sD) + pairing(ups_phi, grading(sF) + sG));
    }
    r.rhs_yz = r.rhs_y + rhs_z;
    r.residual_y = std::abs(r.lhs_y - r.rhs_y);
    r.residual_yz = std::abs(r.lhs_yz - r.rhs_yz);
    return r;
}

CostExpansionReport cost_expansion_check(const ControlProblem &problem, const AdaptedProcess &ubar,
                                         const AdaptedProcess &u, const std::vector<double> &eps_list,
                                         double offset) {
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    double dt = g.dt();
    CostExpansionReport r;
    r.offset = offset;
    r.eps_list = eps_list;
    StatePath xbar = euler_forward(problem.coeffs, problem.x0, ubar);
    double jbar = cost_of_path(problem, xbar, ubar);
    for (double e : eps_list) {
        SpikeSet s = make_spike_set(g, e, offset);
        AdaptedProcess ue = spike(ubar, u, e, offset);
        double je = cost(problem, ue);
        StatePath y = solve_var_y(problem, xbar, ubar, u, e, offset);
        StatePath z = solve_var_z(problem, xbar, ubar, u, y, e, offset);
        const CliffordElement &xn = xbar.values[n];
        CliffordElement yz = y.values[n] + z.values[n];
        double expansion = jbar + std::real(pairing(problem.hx(xn), yz)) +
                           0.5 * problem.hxx(xn)(y.values[n], y.values[n]);
        for (int k = 0; k < n; k++) {
            const CliffordElement &xb = xbar.values[k];
            const CliffordElement &ub = ubar.values[k];
            double run = std::real(pairing(problem.Lx(k, xb, ub), y.values[k] + z.values[k])) +
                         0.5 * problem.Lxx(k, xb, ub)(y.values[k], y.values[k]);
            if (s.contains(k)) {
                run += problem.L(k, xb, u.values[k]) - problem.L(k, xb, ub);
            }
            expansion += dt * run;
        }
        r.residuals.push_back(std::abs(je - expansion));
    }
    // Linear dynamics with quadratic costs make the expansion exact, leaving
    // only rounding in the difference of two O(1) costs.
    double floor = kCostRoundoff * (1.0 + std::abs(jbar));
    r.identically_zero =
        std::all_of(r.residuals.begin(), r.residuals.end(), [floor](double v) { return v <= floor; });
    bool any_zero = std::any_of(r.residuals.begin(), r.residuals.end(), [floor](double v) { return v <= floor; });
    r.slope = (any_zero || eps_list.size() < 2) ? 0.0 : loglog_slope(eps_list, r.residuals);
    return r;
}

int coarse_block(int k, int n_steps, int steps_coarse) {
    return static_cast<int>((static_cast<long long>(k) * steps_coarse) / n_steps);
}

BruteForceResult brute_force_optimum(const ControlProblem &problem, int steps_coarse,
                                     const std::vector<double> &value_grid, int threads) {
    const TimeGrid &g = problem.grid;
    int n = g.n_steps();
    int nb = static_cast<int>(problem.control_space.basis.size());
    if (steps_coarse < 1 || steps_coarse > 4 || steps_coarse > n) {
        throw std::invalid_argument("brute force needs 1 <= steps_coarse <= min(4, n_steps)");
    }
    if (nb < 1 || value_grid.empty()) {
        throw std::invalid_argument("brute force needs a control basis and a non-empty value grid");
    }
    int digits = steps_coarse * nb;
    long long total = 1;
    for (int i = 0; i < digits; i++) {
        total *= static_cast<long long>(value_grid.size());
        if (total > kBruteForceBudget) {
            throw std::invalid_argument("brute force enumeration exceeds the budget of " +
                                        std::to_string(kBruteForceBudget) + " evaluations");
        }
    }
    auto decode = [&](long long idx) {
        std::vector<double> v(digits);
        for (int i = digits - 1; i >= 0; i--) {
            v[i] = value_grid[idx % value_grid.size()];
            idx /= static_cast<long long>(value_grid.size());
        }
        return v;
    };
    auto control_for = [&](const std::vector<double> &v) {
        std::vector<CliffordElement> blocks;
        for (int b = 0; b < steps_coarse; b++) {
            std::vector<double> coeffs(v.begin() + b * nb, v.begin() + (b + 1) * nb);
            blocks.push_back(problem.control_space.make(coeffs));
        }
        AdaptedProcess u{g, {}};
        for (int k = 0; k < n; k++) {
            u.values.push_back(blocks[coarse_block(k, n, steps_coarse)]);
        }
        return u;
    };
    int nt = std::max(1, std::min<int>(threads, static_cast<int>(total)));
    std::vector<std::pair<double, long long>> best(nt, {std::numeric_limits<double>::infinity(), -1});
    auto work = [&](int t) {
        for (long long idx = t; idx < total; idx += nt) {
            double j = cost(problem, control_for(decode(idx)));
            if (j < best[t].first) {
                best[t] = {j, idx};
            }
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; t++) {
            pool.emplace_back(work, t);
        }
        for (auto &th : pool) {
            th.join();
        }
    }
    std::pair<double, long long> win = best[0];
    for (const auto &b : best) {
        if (b.first < win.first || (b.first == win.first && b.second < win.second)) {
            win = b;
        }
    }
    BruteForceResult r;
    r.coarse_values = decode(win.second);
    r.control = control_for(r.coarse_values);
    r.cost = win.first;
    r.evaluated = total;
    return r;
}

}  // namespace qf
