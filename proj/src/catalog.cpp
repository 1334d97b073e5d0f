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

#include "qfermion/catalog.hpp"

#include <cmath>
#include <stdexcept>

namespace qf {

namespace {

double op_bound(const ElementOperator &op) {
    if (auto ga = op.as_grade_affine()) {
        return std::abs(ga->first) + std::abs(ga->second);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> grid_values(double lo, double step, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; i++) {
        v.push_back(lo + step * i);
    }
    return v;
}

}  // namespace

ControlProblem make_linear_quadratic(const std::string &id, const TimeGrid &grid, const LinearQuadraticData &d,
                                     const CliffordElement &x0, const ControlSpace &controls, double p) {
    int n = grid.n_steps();
    ControlProblem pb;
    pb.id = id;
    pb.grid = grid;
    pb.p = p;
    pb.x0 = x0;
    pb.control_space = controls;
    auto affine = [](ElementOperator A, ElementOperator B) {
        return [A, B](int, const CliffordElement &x, const CliffordElement &u) { return A(x) + B(u); };
    };
    auto constant_op = [](ElementOperator A) {
        return [A](int, const CliffordElement &, const CliffordElement &) { return A; };
    };
    auto no_curvature = [n](int, const CliffordElement &, const CliffordElement &) { return BilinearMap::zero(n); };
    Coefficients &c = pb.coeffs;
    c.D = affine(d.AD, d.BD);
    c.F = affine(d.AF, d.BF);
    c.G = affine(d.AG, d.BG);
    c.Dx = constant_op(d.AD);
    c.Fx = constant_op(d.AF);
    c.Gx = constant_op(d.AG);
    c.Dxx = no_curvature;
    c.Fxx = no_curvature;
    c.Gxx = no_curvature;
    c.lipschitz_bound = std::max({op_bound(d.AD), op_bound(d.AF), op_bound(d.AG)});
    double q = d.q;
    double r = d.r;
    double s = d.s;
    pb.L = [q, r](int, const CliffordElement &x, const CliffordElement &u) {
        double nx = norm2(x);
        double nu = norm2(u);
        return q * nx * nx + r * nu * nu;
    };
    pb.Lx = [q](int, const CliffordElement &x, const CliffordElement &) { return (2.0 * q) * x; };
    pb.Lxx = [q, n](int, const CliffordElement &, const CliffordElement &) {
        return HessianForm::scaled_identity(n, 2.0 * q);
    };
    pb.h = [s](const CliffordElement &x) {
        double nx = norm2(x);
        return s * nx * nx;
    };
    pb.hx = [s](const CliffordElement &x) { return (2.0 * s) * x; };
    pb.hxx = [s, n](const CliffordElement &) { return HessianForm::scaled_identity(n, 2.0 * s); };
    auto control_free = [](const ElementOperator &B) {
        auto ga = B.as_grade_affine();
        return ga && ga->first == cplx(0.0) && ga->second == cplx(0.0);
    };
    pb.p_term_active = !control_free(d.BF) || !control_free(d.BG);
    return pb;
}

const std::vector<CatalogEntry> &catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> v;
        v.push_back(CatalogEntry{
            "lq_scalar",
            "D = a x + b u, F = c x, G = 0, L = q|x|^2 + r|u|^2, h = s|x|^2; control-free noise",
            {{"a", 0.0}, {"b", 1.0}, {"c", 0.0}, {"q", 0.0}, {"r", 1.0}, {"s", 1.0}, {"x0", 1.0}},
            1.0,
            8,
            grid_values(-1.5, 0.5, 7),
            false,
            {6, 8, 9, 10, 11},
            true});
        v.push_back(CatalogEntry{
            "control_in_noise",
            "D = a x + b u, F = c x + sigma u, G = 0, L = q|x|^2 + r|u|^2, h = s|x|^2; second-order term active",
            {{"a", 0.0}, {"b", 1.0}, {"c", 0.0}, {"sigma", 1.0}, {"q", 0.0}, {"r", 1.0}, {"s", 1.0}, {"x0", 1.0}},
            1.0,
            8,
            grid_values(-1.0, 1.0 / 3.0, 7),
            true,
            {8, 11},
            true});
        v.push_back(CatalogEntry{
            "odd_drift",
            "D = a x + b u, F = c x, G = g x + kappa u, L = q|x|^2 + r|u|^2, h = s|x|^2; left noise term",
            {{"a", 0.0}, {"b", 1.0}, {"c", 0.0}, {"g", 0.5}, {"kappa", 0.5}, {"q", 0.0}, {"r", 1.0}, {"s", 1.0},
             {"x0", 1.0}},
            1.0,
            8,
            grid_values(-1.0, 1.0 / 3.0, 7),
            true,
            {4, 5},
            false});
        v.push_back(CatalogEntry{"driverless",
                                 "D = 0, L = 0, F = c x + sigma u, G = 0, h = s|x|^2; exact discrete duality",
                                 {{"c", 0.5}, {"sigma", 1.0}, {"s", 1.0}, {"x0", 1.0}},
                                 1.0,
                                 8,
                                 grid_values(-0.75, 0.25, 7),
                                 true,
                                 {9},
                                 true});
        return v;
    }();
    return entries;
}

const CatalogEntry *find_catalog_entry(const std::string &id) {
    for (const auto &e : catalog()) {
        if (e.id == id) {
            return &e;
        }
    }
    return nullptr;
}

std::vector<std::string> catalog_ids() {
    std::vector<std::string> ids;
    for (const auto &e : catalog()) {
        ids.push_back(e.id);
    }
    return ids;
}

ControlProblem build_catalog_problem(const std::string &id, const TimeGrid &grid,
                                     const std::map<std::string, double> &params,
                                     const std::optional<CliffordElement> &x0, double p,
                                     const std::optional<std::vector<double>> &value_grid) {
    const CatalogEntry *e = find_catalog_entry(id);
    if (e == nullptr) {
        std::string ids;
        for (const auto &s : catalog_ids()) {
            ids += (ids.empty() ? "" : ", ") + s;
        }
        throw std::invalid_argument("unknown problem_id '" + id + "'; available: " + ids);
    }
    std::map<std::string, double> v = e->defaults;
    for (const auto &[k, val] : params) {
        if (!v.count(k)) {
            throw std::invalid_argument("parameter '" + k + "' is not defined for " + id);
        }
        v[k] = val;
    }
    int n = grid.n_steps();
    auto sc = [n](double c) { return ElementOperator::scalar(n, c); };
    auto get = [&v](const char *k) { return v.count(k) ? v.at(k) : 0.0; };
    LinearQuadraticData d{sc(0), sc(0), sc(0), sc(0), sc(0), sc(0), 0.0, 0.0, 0.0};
    if (id == "lq_scalar") {
        d.AD = sc(get("a"));
        d.BD = sc(get("b"));
        d.AF = sc(get("c"));
    } else if (id == "control_in_noise") {
        d.AD = sc(get("a"));
        d.BD = sc(get("b"));
        d.AF = sc(get("c"));
        d.BF = sc(get("sigma"));
    } else if (id == "odd_drift") {
        d.AD = sc(get("a"));
        d.BD = sc(get("b"));
        d.AF = sc(get("c"));
        d.AG = sc(get("g"));
        d.BG = sc(get("kappa"));
    } else if (id == "driverless") {
        d.AF = sc(get("c"));
        d.BF = sc(get("sigma"));
    }
    d.q = get("q");
    d.r = get("r");
    d.s = get("s");
    ControlSpace cs{{identity(n)}, value_grid ? *value_grid : e->default_value_grid};
    CliffordElement start = x0 ? *x0 : CliffordElement::scalar(n, get("x0"));
    return make_linear_quadratic(id, grid, d, start, cs, p);
}

}  // namespace qf
