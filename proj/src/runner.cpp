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

#include "qfermion/runner.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace qf {

namespace {

std::string join_issues(const std::vector<SchemaIssue> &issues) {
    std::string s;
    for (const auto &i : issues) {
        if (!s.empty()) {
            s += "; ";
        }
        s += (i.pointer.empty() ? "/" : i.pointer) + ": " + i.message;
    }
    return s;
}

[[noreturn]] void fail(const std::string &pointer, const std::string &message) {
    throw SpecError({SchemaIssue{pointer, message}});
}

double get_number(const json &j, const std::string &pointer) {
    if (!j.is_number()) {
        fail(pointer, "expected a number");
    }
    return j.get<double>();
}

int get_int(const json &j, const std::string &pointer) {
    if (!j.is_number_integer()) {
        fail(pointer, "expected an integer");
    }
    return j.get<int>();
}

std::vector<double> get_numbers(const json &j, const std::string &pointer) {
    if (!j.is_array()) {
        fail(pointer, "expected an array of numbers");
    }
    std::vector<double> v;
    for (size_t i = 0; i < j.size(); i++) {
        v.push_back(get_number(j[i], pointer + "/" + std::to_string(i)));
    }
    return v;
}

std::vector<int> get_ints(const json &j, const std::string &pointer) {
    if (!j.is_array()) {
        fail(pointer, "expected an array of integers");
    }
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); i++) {
        v.push_back(get_int(j[i], pointer + "/" + std::to_string(i)));
    }
    return v;
}

cplx get_complex(const json &j, const std::string &pointer) {
    if (j.is_number()) {
        return cplx(j.get<double>(), 0.0);
    }
    if (j.is_object()) {
        double re = j.contains("re") ? get_number(j["re"], pointer + "/re") : 0.0;
        double im = j.contains("im") ? get_number(j["im"], pointer + "/im") : 0.0;
        return cplx(re, im);
    }
    fail(pointer, "expected a number or {re, im}");
}

void check_keys(const json &j, const std::string &pointer, const std::set<std::string> &allowed,
                std::vector<SchemaIssue> &issues) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            issues.push_back({pointer + "/" + it.key(), "unknown field"});
        }
    }
}

// Runs one field parser and records its issues instead of aborting.
template <class F>
void collect(std::vector<SchemaIssue> &issues, F &&f) {
    try {
        f();
    } catch (const SpecError &e) {
        issues.insert(issues.end(), e.issues().begin(), e.issues().end());
    } catch (const std::exception &e) {
        issues.push_back({"", e.what()});
    }
}

// Five halvings from T/4, clipped to widths of at least min_steps grid steps.
std::vector<double> default_eps_list(double T, int n, int min_steps) {
    std::vector<double> v;
    for (int i = 0; i < 5; i++) {
        double e = T / 4.0 / std::pow(2.0, i);
        if (e >= min_steps * (T / n) * (1.0 - 1e-9)) {
            v.push_back(e);
        }
    }
    return v;
}

}  // namespace

bool support_doubling(const ControlProblem &pb) {
    int n = pb.grid.n_steps();
    CliffordElement zero = CliffordElement::zero(n);
    for (const OperatorFn *f : {&pb.coeffs.Fx, &pb.coeffs.Gx}) {
        auto ga = (*f)(0, pb.x0, zero).as_grade_affine();
        if (!ga || ga->first != cplx(0.0) || ga->second != cplx(0.0)) {
            return true;
        }
    }
    return false;
}

namespace {

std::vector<double> default_inline_grid() { return {-1.0, -0.5, 0.0, 0.5, 1.0}; }

}  // namespace

SpecError::SpecError(std::vector<SchemaIssue> issues)
    : std::runtime_error("invalid problem spec: " + join_issues(issues)), issues_(std::move(issues)) {}

json element_to_json(const CliffordElement &a) {
    json terms = json::array();
    for (const Term &t : a.terms()) {
        json m = t.mask.fits64() ? json(t.mask.low64()) : json(mask_to_string(t.mask));
        terms.push_back(json{{"mask", m}, {"re", t.amp.real()}, {"im", t.amp.imag()}});
    }
    return json{{"n", a.n()}, {"terms", terms}};
}

CliffordElement element_from_json(const json &j, const std::string &pointer) {
    if (!j.is_object()) {
        fail(pointer, "expected an element {n, terms}");
    }
    if (!j.contains("n")) {
        fail(pointer + "/n", "missing generator count");
    }
    int n = get_int(j["n"], pointer + "/n");
    if (n < 0 || n > kMaxGenerators) {
        fail(pointer + "/n", "generator count must lie in 0.." + std::to_string(kMaxGenerators));
    }
    std::vector<Term> terms;
    if (j.contains("terms")) {
        const json &ts = j["terms"];
        if (!ts.is_array()) {
            fail(pointer + "/terms", "expected an array");
        }
        for (size_t i = 0; i < ts.size(); i++) {
            std::string tp = pointer + "/terms/" + std::to_string(i);
            const json &t = ts[i];
            if (!t.is_object() || !t.contains("mask")) {
                fail(tp, "expected {mask, re, im}");
            }
            Mask m;
            if (t["mask"].is_number_unsigned() || (t["mask"].is_number_integer() && t["mask"].get<int64_t>() >= 0)) {
                m = Mask(t["mask"].get<uint64_t>());
            } else if (t["mask"].is_string()) {
                try {
                    m = mask_from_string(t["mask"].get<std::string>());
                } catch (const std::exception &e) {
                    fail(tp + "/mask", e.what());
                }
            } else {
                fail(tp + "/mask", "expected a non-negative integer or decimal string");
            }
            if ((m & ~low_bits(n)) != Mask(0)) {
                fail(tp + "/mask", "uses a generator outside 0.." + std::to_string(n - 1));
            }
            double re = t.contains("re") ? get_number(t["re"], tp + "/re") : 0.0;
            double im = t.contains("im") ? get_number(t["im"], tp + "/im") : 0.0;
            terms.push_back({m, cplx(re, im)});
        }
    }
    return CliffordElement::from_terms(n, std::move(terms));
}

ElementOperator linear_map_from_json(const json &j, int n, const std::string &pointer) {
    if (j.is_number()) {
        return ElementOperator::scalar(n, j.get<double>());
    }
    if (!j.is_object() || j.size() != 1) {
        fail(pointer, "expected a linear map with exactly one of scalar, left, right, grading, sum, compose");
    }
    const std::string key = j.begin().key();
    const json &v = j.begin().value();
    std::string vp = pointer + "/" + key;
    auto element = [&]() {
        CliffordElement a = element_from_json(v, vp);
        if (a.n() != n) {
            fail(vp + "/n", "element has n=" + std::to_string(a.n()) + " but the grid has " + std::to_string(n) +
                                " steps");
        }
        return a;
    };
    if (key == "scalar") {
        return ElementOperator::scalar(n, get_complex(v, vp));
    }
    if (key == "left") {
        return ElementOperator::left_mul(element());
    }
    if (key == "right") {
        return ElementOperator::right_mul(element());
    }
    if (key == "grading") {
        if (!v.is_boolean() || !v.get<bool>()) {
            fail(vp, "expected true");
        }
        return ElementOperator::grading(n);
    }
    if (key == "sum" || key == "compose") {
        if (!v.is_array() || v.empty()) {
            fail(vp, "expected a non-empty array of linear maps");
        }
        ElementOperator acc = linear_map_from_json(v[0], n, vp + "/0");
        for (size_t i = 1; i < v.size(); i++) {
            ElementOperator next = linear_map_from_json(v[i], n, vp + "/" + std::to_string(i));
            acc = key == "sum" ? acc + next : compose(acc, next);
        }
        return acc;
    }
    fail(vp, "unknown linear map kind '" + key + "'");
}

namespace {

const std::set<std::string> kTopKeys = {"problem_id", "coefficients", "params",       "T",
                                        "n_steps",    "grid",         "p",            "p_prime",
                                        "x0",         "control",      "eps_list",     "offsets",
                                        "min_eps_steps", "value_grid", "candidates",  "steps_coarse",
                                        "assert_mp",  "duality_levels", "suite",      "bqsde"};

LinearQuadraticData inline_data(const json &c, int n, const std::string &pointer) {
    auto zero = ElementOperator::scalar(n, 0.0);
    LinearQuadraticData d{zero, zero, zero, zero, zero, zero, 0.0, 0.0, 0.0};
    if (!c.is_object()) {
        fail(pointer, "expected an object with D, F, G, q, r, s");
    }
    std::vector<SchemaIssue> issues;
    check_keys(c, pointer, {"D", "F", "G", "q", "r", "s"}, issues);
    auto pair = [&](const char *name, ElementOperator &A, ElementOperator &B) {
        if (!c.contains(name)) {
            return;
        }
        std::string p = pointer + "/" + name;
        const json &e = c[name];
        if (!e.is_object()) {
            issues.push_back({p, "expected {x: map, u: map}"});
            return;
        }
        check_keys(e, p, {"x", "u"}, issues);
        collect(issues, [&] {
            if (e.contains("x")) {
                A = linear_map_from_json(e["x"], n, p + "/x");
            }
        });
        collect(issues, [&] {
            if (e.contains("u")) {
                B = linear_map_from_json(e["u"], n, p + "/u");
            }
        });
    };
    pair("D", d.AD, d.BD);
    pair("F", d.AF, d.BF);
    pair("G", d.AG, d.BG);
    for (const char *k : {"q", "r", "s"}) {
        collect(issues, [&] {
            if (c.contains(k)) {
                double v = get_number(c[k], pointer + "/" + k);
                (k[0] == 'q' ? d.q : k[0] == 'r' ? d.r : d.s) = v;
            }
        });
    }
    if (!issues.empty()) {
        throw SpecError(issues);
    }
    return d;
}

}  // namespace

ProblemSpec parse_problem(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        fail("", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
        fail("", "expected a JSON object");
    }
    std::vector<SchemaIssue> issues;
    check_keys(j, "", kTopKeys, issues);
    ProblemSpec s;
    const CatalogEntry *entry = nullptr;
    if (!j.contains("problem_id") || !j["problem_id"].is_string()) {
        issues.push_back({"/problem_id", "required string (a catalog id or \"inline\")"});
        throw SpecError(issues);
    }
    s.problem_id = j["problem_id"].get<std::string>();
    if (s.problem_id == "inline") {
        s.is_inline = true;
        if (!j.contains("coefficients")) {
            issues.push_back({"/coefficients", "required for inline problems"});
        }
    } else {
        entry = find_catalog_entry(s.problem_id);
        if (entry == nullptr) {
            std::string ids;
            for (const auto &id : catalog_ids()) {
                ids += (ids.empty() ? "" : ", ") + id;
            }
            issues.push_back({"/problem_id", "unknown catalog id '" + s.problem_id + "'; available: " + ids});
            throw SpecError(issues);
        }
        s.T = entry->default_T;
        s.n_steps = entry->default_n_steps;
        s.value_grid = entry->default_value_grid;
        s.assert_mp = entry->oracle_exact;
        if (j.contains("coefficients")) {
            issues.push_back({"/coefficients", "only allowed for inline problems"});
        }
    }
    if (s.is_inline) {
        s.value_grid = default_inline_grid();
    }
    const json *grid = &j;
    std::string gp;
    if (j.contains("grid")) {
        grid = &j["grid"];
        gp = "/grid";
        if (!grid->is_object()) {
            issues.push_back({gp, "expected {T, n_steps}"});
            throw SpecError(issues);
        }
        check_keys(*grid, gp, {"T", "n_steps"}, issues);
    }
    // Everything below depends on dt, so stop only if T or n_steps is bad.
    const size_t before_grid = issues.size();
    collect(issues, [&] {
        if (grid->contains("T")) {
            s.T = get_number((*grid)["T"], gp + "/T");
            if (!(s.T > 0.0) || !std::isfinite(s.T)) {
                fail(gp + "/T", "horizon must be positive and finite");
            }
        }
    });
    collect(issues, [&] {
        if (grid->contains("n_steps")) {
            s.n_steps = get_int((*grid)["n_steps"], gp + "/n_steps");
            if (s.n_steps < 1 || s.n_steps > kMaxGenerators) {
                fail(gp + "/n_steps", "must lie in 1.." + std::to_string(kMaxGenerators));
            }
        }
    });
    if (issues.size() > before_grid) {
        throw SpecError(issues);
    }
    int n = s.n_steps;
    double dt = s.T / n;
    collect(issues, [&] {
        if (!j.contains("params")) {
            return;
        }
        if (!j["params"].is_object()) {
            fail("/params", "expected an object of numbers");
        }
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            std::string pp = "/params/" + it.key();
            if (s.is_inline || !entry->defaults.count(it.key())) {
                std::string names;
                if (entry) {
                    for (const auto &[k, v] : entry->defaults) {
                        names += (names.empty() ? "" : ", ") + k;
                    }
                }
                issues.push_back({pp, "unknown parameter" + (names.empty() ? "" : "; expected one of " + names)});
                continue;
            }
            s.params[it.key()] = get_number(it.value(), pp);
        }
    });
    if (s.is_inline && j.contains("coefficients")) {
        s.coefficients = j["coefficients"];
        collect(issues, [&] { inline_data(s.coefficients, n, "/coefficients"); });
    }
    collect(issues, [&] {
        if (j.contains("p")) {
            s.p = get_number(j["p"], "/p");
            if (!(s.p >= 2.0)) {
                fail("/p", "must be at least 2");
            }
        }
    });
    collect(issues, [&] {
        if (j.contains("p_prime")) {
            s.p_prime = get_number(j["p_prime"], "/p_prime");
            if (!(s.p_prime > 1.0 && s.p_prime <= 2.0)) {
                fail("/p_prime", "must lie in (1, 2]");
            }
        }
    });
    collect(issues, [&] {
        if (j.contains("x0")) {
            CliffordElement x0 = element_from_json(j["x0"], "/x0");
            if (x0.n() != n) {
                fail("/x0/n", "element has n=" + std::to_string(x0.n()) + " but the grid has " +
                                  std::to_string(n) + " steps");
            }
            if (!x0.is_scalar()) {
                fail("/x0", "initial state must be a scalar multiple of I");
            }
            s.x0 = x0;
        }
    });
    s.ubar = {0.0};
    s.u = {1.0};
    collect(issues, [&] {
        if (!j.contains("control")) {
            return;
        }
        const json &c = j["control"];
        if (!c.is_object()) {
            fail("/control", "expected {ubar, u}");
        }
        check_keys(c, "/control", {"ubar", "u"}, issues);
        for (const char *k : {"ubar", "u"}) {
            if (!c.contains(k)) {
                continue;
            }
            std::string cp = std::string("/control/") + k;
            std::vector<double> v = c[k].is_number() ? std::vector<double>{get_number(c[k], cp)}
                                                     : get_numbers(c[k], cp);
            if (v.size() != 1 && static_cast<int>(v.size()) != n) {
                fail(cp, "expected one value or n_steps = " + std::to_string(n) + " values");
            }
            (k[1] == 'b' ? s.ubar : s.u) = v;
        }
    });
    collect(issues, [&] {
        if (j.contains("min_eps_steps")) {
            s.min_eps_steps = get_int(j["min_eps_steps"], "/min_eps_steps");
            if (s.min_eps_steps < 1) {
                fail("/min_eps_steps", "must be at least 1");
            }
        }
    });
    s.eps_list = default_eps_list(s.T, n, s.min_eps_steps);
    if (s.eps_list.size() < 2 && !j.contains("min_eps_steps")) {
        // Coarse grids: allow single-step spikes so the default sweep still fits.
        s.min_eps_steps = 1;
        s.eps_list = default_eps_list(s.T, n, 1);
    }
    collect(issues, [&] {
        if (j.contains("eps_list")) {
            s.eps_list = get_numbers(j["eps_list"], "/eps_list");
            if (s.eps_list.size() < 2) {
                fail("/eps_list", "needs at least two widths for a slope fit");
            }
        }
        for (size_t i = 0; i < s.eps_list.size(); i++) {
            double e = s.eps_list[i];
            if (!(e > 0.0) || e > s.T * (1.0 + 1e-12) || e < s.min_eps_steps * dt * (1.0 - 1e-9)) {
                fail("/eps_list/" + std::to_string(i), "width must lie in [min_eps_steps * dt, T]");
            }
        }
    });
    collect(issues, [&] {
        if (j.contains("offsets")) {
            s.offsets = get_numbers(j["offsets"], "/offsets");
            if (s.offsets.empty()) {
                fail("/offsets", "needs at least one offset");
            }
        }
        for (size_t i = 0; i < s.offsets.size(); i++) {
            if (s.offsets[i] < 0.0 || s.offsets[i] >= s.T) {
                fail("/offsets/" + std::to_string(i), "offset must lie in [0, T)");
            }
        }
    });
    collect(issues, [&] {
        if (j.contains("value_grid")) {
            s.value_grid = get_numbers(j["value_grid"], "/value_grid");
            if (s.value_grid.empty()) {
                fail("/value_grid", "must not be empty");
            }
        }
    });
    s.candidates = s.value_grid;
    collect(issues, [&] {
        if (j.contains("candidates")) {
            s.candidates = get_numbers(j["candidates"], "/candidates");
        }
    });
    collect(issues, [&] {
        if (j.contains("steps_coarse")) {
            s.steps_coarse = get_int(j["steps_coarse"], "/steps_coarse");
        }
        if (s.steps_coarse < 1 || s.steps_coarse > std::min(4, n)) {
            fail("/steps_coarse", "must lie in 1..min(4, n_steps)");
        }
        if (std::pow(static_cast<double>(s.value_grid.size()), s.steps_coarse) > kBruteForceBudget) {
            fail("/steps_coarse", "enumeration exceeds the budget of " + std::to_string(kBruteForceBudget));
        }
    });
    collect(issues, [&] {
        if (j.contains("assert_mp")) {
            if (!j["assert_mp"].is_boolean()) {
                fail("/assert_mp", "expected a boolean");
            }
            s.assert_mp = j["assert_mp"].get<bool>();
        }
    });
    int level_cap = kMaxGenerators;
    if (issues.empty()) {
        collect(issues, [&] {
            if (support_doubling(build_problem(s))) {
                level_cap = kMaxDoublingSteps;
            }
        });
    }
    int n0 = n;
    while (n0 > 4 && 4 * n0 > level_cap) {
        n0 /= 2;
    }
    s.duality_levels = {n0, 2 * n0, 4 * n0};
    collect(issues, [&] {
        if (j.contains("duality_levels")) {
            s.duality_levels = get_ints(j["duality_levels"], "/duality_levels");
        }
        if (s.duality_levels.size() < 2) {
            fail("/duality_levels", "needs at least two grid sizes");
        }
        for (size_t i = 0; i < s.duality_levels.size(); i++) {
            int m = s.duality_levels[i];
            if (m < 1 || m > kMaxGenerators || s.eps_list[0] < s.T / m * (1.0 - 1e-9)) {
                fail("/duality_levels/" + std::to_string(i),
                     "grid size must lie in 1.." + std::to_string(kMaxGenerators) + " and resolve eps_list[0]");
            }
        }
    });
    collect(issues, [&] {
        if (!j.contains("suite")) {
            return;
        }
        const json &st = j["suite"];
        if (!st.is_object()) {
            fail("/suite", "expected an object");
        }
        check_keys(st, "/suite",
                   {"n", "samples", "car_max_n", "jw_max_n", "jw_samples", "holder_pairs", "holder_max_n", "ito_n",
                    "martingales", "bg_p"},
                   issues);
        SuiteSettings &ss = s.suite;
        std::pair<const char *, int *> ints[] = {{"n", &ss.n},
                                                 {"samples", &ss.samples},
                                                 {"car_max_n", &ss.car_max_n},
                                                 {"jw_max_n", &ss.jw_max_n},
                                                 {"jw_samples", &ss.jw_samples},
                                                 {"holder_pairs", &ss.holder_pairs},
                                                 {"holder_max_n", &ss.holder_max_n},
                                                 {"ito_n", &ss.ito_n},
                                                 {"martingales", &ss.martingales}};
        for (auto [k, ptr] : ints) {
            if (st.contains(k)) {
                *ptr = get_int(st[k], std::string("/suite/") + k);
                if (*ptr < 1) {
                    fail(std::string("/suite/") + k, "must be positive");
                }
            }
        }
        if (ss.n > 16 || ss.car_max_n > 16 || ss.ito_n > 16) {
            fail("/suite", "n, car_max_n and ito_n must not exceed 16");
        }
        if (ss.jw_max_n > 14 || ss.holder_max_n > kMaxSpectralGenerators) {
            fail("/suite", "jw_max_n must not exceed 14 and holder_max_n " + std::to_string(kMaxSpectralGenerators));
        }
        if (st.contains("bg_p")) {
            ss.bg_p = get_numbers(st["bg_p"], "/suite/bg_p");
            for (size_t i = 0; i < ss.bg_p.size(); i++) {
                if (!(ss.bg_p[i] > 1.0)) {
                    fail("/suite/bg_p/" + std::to_string(i), "must exceed 1");
                }
            }
        }
    });
    collect(issues, [&] {
        if (!j.contains("bqsde")) {
            return;
        }
        const json &b = j["bqsde"];
        if (!b.is_object()) {
            fail("/bqsde", "expected an object");
        }
        check_keys(b, "/bqsde",
                   {"a", "c", "levels", "window_g1", "window_n", "picard_tol", "picard_max_iter", "stepwise_C"},
                   issues);
        BqsdeSettings &bs = s.bqsde;
        if (b.contains("a")) {
            bs.a = get_number(b["a"], "/bqsde/a");
        }
        if (b.contains("c")) {
            bs.c = get_number(b["c"], "/bqsde/c");
        }
        if (b.contains("levels")) {
            bs.levels = get_ints(b["levels"], "/bqsde/levels");
        }
        for (size_t i = 0; i < bs.levels.size(); i++) {
            if (bs.levels[i] < 1 || bs.levels[i] > kMaxGenerators) {
                fail("/bqsde/levels/" + std::to_string(i), "must lie in 1.." + std::to_string(kMaxGenerators));
            }
        }
        if (b.contains("window_g1")) {
            bs.window_g1 = get_number(b["window_g1"], "/bqsde/window_g1");
        }
        if (b.contains("window_n")) {
            bs.window_n = get_int(b["window_n"], "/bqsde/window_n");
            if (bs.window_n < 2 || bs.window_n > kMaxGenerators) {
                fail("/bqsde/window_n", "must lie in 2.." + std::to_string(kMaxGenerators));
            }
        }
        if (b.contains("picard_tol")) {
            bs.picard_tol = get_number(b["picard_tol"], "/bqsde/picard_tol");
            if (!(bs.picard_tol > 0.0)) {
                fail("/bqsde/picard_tol", "must be positive");
            }
        }
        if (b.contains("picard_max_iter")) {
            bs.picard_max_iter = get_int(b["picard_max_iter"], "/bqsde/picard_max_iter");
        }
        if (b.contains("stepwise_C")) {
            bs.stepwise_C = get_number(b["stepwise_C"], "/bqsde/stepwise_C");
        }
    });
    if (!issues.empty()) {
        throw SpecError(issues);
    }
    return s;
}

ProblemSpec parse_problem_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail("", "cannot open problem file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

json spec_to_json(const ProblemSpec &s) {
    json j;
    j["problem_id"] = s.problem_id;
    if (s.is_inline) {
        j["coefficients"] = s.coefficients;
    }
    json params = json::object();
    if (const CatalogEntry *e = find_catalog_entry(s.problem_id)) {
        for (const auto &[k, v] : e->defaults) {
            params[k] = s.params.count(k) ? s.params.at(k) : v;
        }
    }
    j["params"] = params;
    j["grid"] = json{{"T", s.T}, {"n_steps", s.n_steps}};
    j["p"] = s.p;
    j["p_prime"] = s.p_prime;
    if (s.x0) {
        j["x0"] = element_to_json(*s.x0);
    }
    j["control"] = json{{"ubar", s.ubar}, {"u", s.u}};
    j["eps_list"] = s.eps_list;
    j["offsets"] = s.offsets;
    j["min_eps_steps"] = s.min_eps_steps;
    j["value_grid"] = s.value_grid;
    j["candidates"] = s.candidates;
    j["steps_coarse"] = s.steps_coarse;
    j["assert_mp"] = s.assert_mp;
    j["duality_levels"] = s.duality_levels;
    const SuiteSettings &ss = s.suite;
    j["suite"] = json{{"n", ss.n},
                      {"samples", ss.samples},
                      {"car_max_n", ss.car_max_n},
                      {"jw_max_n", ss.jw_max_n},
                      {"jw_samples", ss.jw_samples},
                      {"holder_pairs", ss.holder_pairs},
                      {"holder_max_n", ss.holder_max_n},
                      {"ito_n", ss.ito_n},
                      {"martingales", ss.martingales},
                      {"bg_p", ss.bg_p}};
    const BqsdeSettings &bs = s.bqsde;
    j["bqsde"] = json{{"a", bs.a},
                      {"c", bs.c},
                      {"levels", bs.levels},
                      {"window_g1", bs.window_g1},
                      {"window_n", bs.window_n},
                      {"picard_tol", bs.picard_tol},
                      {"picard_max_iter", bs.picard_max_iter},
                      {"stepwise_C", bs.stepwise_C}};
    return j;
}

ControlProblem build_problem(const ProblemSpec &spec, std::optional<int> n_steps) {
    int n = n_steps.value_or(spec.n_steps);
    TimeGrid grid(spec.T, n);
    CliffordElement x0 = spec.x0 ? CliffordElement::scalar(n, spec.x0->coeff(Mask(0)))
                                 : CliffordElement::scalar(n, 1.0);
    if (spec.is_inline) {
        LinearQuadraticData d = inline_data(spec.coefficients, n, "/coefficients");
        ControlSpace cs{{identity(n)}, spec.value_grid};
        return make_linear_quadratic("inline", grid, d, x0, cs, spec.p);
    }
    std::optional<CliffordElement> start;
    if (spec.x0) {
        start = x0;
    }
    return build_catalog_problem(spec.problem_id, grid, spec.params, start, spec.p, spec.value_grid);
}

AdaptedProcess spec_control(const ProblemSpec &spec, const std::vector<double> &coeffs, const TimeGrid &grid,
                            const ControlSpace &controls) {
    (void)spec;
    int n = grid.n_steps();
    AdaptedProcess u{grid, {}};
    size_t len = coeffs.size();
    for (int k = 0; k < n; k++) {
        size_t idx = len == 1 ? 0 : static_cast<size_t>(k) * len / static_cast<size_t>(n);
        std::vector<double> c(controls.basis.size(), 0.0);
        c[0] = coeffs[idx];
        u.values.push_back(controls.make(c));
    }
    return u;
}

CliffordElement random_element(int n, int k, std::mt19937_64 &rng, double density) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Term> terms;
    if (k <= 12) {
        for (uint64_t m = 0; m < (uint64_t{1} << k); m++) {
            double re = normal(rng);
            double im = normal(rng);
            if (density >= 1.0 || unif(rng) < density) {
                terms.push_back({Mask(m), cplx(re, im)});
            }
        }
    } else {
        std::uniform_int_distribution<int> gen(0, k - 1);
        int count = std::max(1, static_cast<int>(64 * density));
        for (int i = 0; i < count; i++) {
            Mask m;
            int deg = 1 + static_cast<int>(unif(rng) * 4);
            for (int d = 0; d < deg; d++) {
                m ^= bit(gen(rng));
            }
            double re = normal(rng);
            double im = normal(rng);
            terms.push_back({m, cplx(re, im)});
        }
    }
    CliffordElement a = CliffordElement::from_terms(n, std::move(terms));
    double nrm = norm2(a);
    return nrm > 0.0 ? (1.0 / nrm) * a : a;
}

AdaptedProcess random_adapted(const TimeGrid &g, std::mt19937_64 &rng, double density) {
    AdaptedProcess f{g, {}};
    for (int k = 0; k < g.n_steps(); k++) {
        f.values.push_back(random_element(g.n_steps(), k, rng, density));
    }
    return f;
}

namespace {

// Tolerances and constants pinned for the report assertions.
constexpr double kExactTol = 1e-12;
constexpr double kLpTol = 1e-10;
constexpr double kFrechetTol = 1e-6;
constexpr double kBqsdeResidualTol = 1e-10;
constexpr double kClosedFormTol = 0.01;
constexpr double kStabilityTol = 0.10;
constexpr double kSlopeBand = 0.25;
constexpr double kDualityLow = 1.6;
constexpr double kDualityHigh = 2.4;
constexpr double kDualityExactTol = 1e-10;
constexpr double kMpFloor = 1e-6;
constexpr double kMpDtConstant = 1.0;
constexpr double kScalingFactor = 3.0;

struct Ctx {
    const ProblemSpec &spec;
    uint64_t seed;
    int threads;
    RunOutput &out;
    std::string section;

    void check(const std::string &name, bool pass, double value, double threshold, const std::string &note = "") {
        Assertion a{section + "." + name, pass, value, threshold, note};
        out.assertions.push_back(a);
        out.pass = out.pass && pass;
    }
    void le(const std::string &name, double value, double threshold, const std::string &note = "") {
        check(name, value <= threshold, value, threshold, note);
    }
    void ge(const std::string &name, double value, double threshold, const std::string &note = "") {
        check(name, value >= threshold, value, threshold, note);
    }
};

// Seeds differ per section so adding one section leaves the others unchanged.
std::mt19937_64 section_rng(uint64_t seed, const std::string &section) {
    uint64_t h = 1469598103934665603ull;
    for (char c : section) {
        h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
    }
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(h),
                      static_cast<uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

double finite_or_null_guard(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json summarize(const CliffordElement &a) {
    if (a.size() <= 64) {
        return element_to_json(a);
    }
    return json{{"n", a.n()}, {"term_count", a.size()}, {"norm2", norm2(a)},
                {"vacuum", json{{"re", vacuum(a).real()}, {"im", vacuum(a).imag()}}}};
}

// ---------------------------------------------------------------- algebra

json algebra_section(Ctx &c) {
    const SuiteSettings &ss = c.spec.suite;
    auto rng = section_rng(c.seed, "algebra");
    json j;
    double car = 0.0;
    double wsq = 0.0;
    auto t0 = std::chrono::steady_clock::now();
    for (int m = 1; m <= ss.car_max_n; m++) {
        for (int a = 0; a < m; a++) {
            for (int b = 0; b < m; b++) {
                CliffordElement ga = generator(m, a);
                CliffordElement gb = generator(m, b);
                CliffordElement target = a == b ? 2.0 * identity(m) : CliffordElement::zero(m);
                car = std::max(car, max_abs_diff(mul(ga, gb) + mul(gb, ga), target));
            }
        }
        TimeGrid g(1.0, m);
        for (int k = 0; k <= m; k++) {
            CliffordElement w = brownian(g, k);
            wsq = std::max(wsq, max_abs_diff(mul(w, w), g.t(k) * identity(m)));
        }
    }
    c.out.timings["algebra.car"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    j["car"] = json{{"max_n", ss.car_max_n}, {"residual", car}, {"brownian_square_residual", wsq}};
    c.le("car_residual", car, kExactTol);
    c.le("brownian_square_residual", wsq, kExactTol);

    int n = ss.n;
    double assoc = 0.0, trac = 0.0, pos_min = std::numeric_limits<double>::infinity(), pos_imag = 0.0;
    double adj_inv = 0.0, adj_mul = 0.0, faith = 0.0, ce_idem = 0.0, ce_module = 0.0, ce_mean = 0.0;
    std::uniform_int_distribution<int> kdist(0, n);
    for (int i = 0; i < ss.samples; i++) {
        double dens = 0.25 + 0.75 * (i % 4) / 3.0;
        CliffordElement a = random_element(n, n, rng, dens);
        CliffordElement b = random_element(n, n, rng, dens);
        CliffordElement d = random_element(n, n, rng, dens);
        assoc = std::max(assoc, max_abs_diff(mul(mul(a, b), d), mul(a, mul(b, d))));
        trac = std::max(trac, std::abs(vacuum(mul(a, b)) - vacuum(mul(b, a))));
        cplx pa = vacuum(mul(adjoint(a), a));
        pos_min = std::min(pos_min, pa.real());
        pos_imag = std::max(pos_imag, std::abs(pa.imag()));
        double sq = 0.0;
        for (const Term &t : a.terms()) {
            sq += std::norm(t.amp);
        }
        faith = std::max(faith, std::abs(pa.real() - sq));
        adj_inv = std::max(adj_inv, max_abs_diff(adjoint(adjoint(a)), a));
        adj_mul = std::max(adj_mul, max_abs_diff(adjoint(mul(a, b)), mul(adjoint(b), adjoint(a))));
        int k = kdist(rng);
        CliffordElement ea = cond_expect(d, k);
        ce_idem = std::max(ce_idem, max_abs_diff(cond_expect(ea, k), ea));
        CliffordElement ak = cond_expect(a, k);
        CliffordElement bk = cond_expect(b, k);
        ce_module = std::max(ce_module, max_abs_diff(cond_expect(mul(mul(ak, d), bk), k), mul(mul(ak, ea), bk)));
        ce_mean = std::max(ce_mean, std::abs(vacuum(ea) - vacuum(d)));
    }
    j["random"] = json{{"n", n},
                       {"samples", ss.samples},
                       {"associativity", assoc},
                       {"traciality", trac},
                       {"positivity_min", pos_min},
                       {"positivity_imag", pos_imag},
                       {"faithfulness", faith},
                       {"adjoint_involution", adj_inv},
                       {"adjoint_antimultiplicative", adj_mul},
                       {"cond_expect_idempotence", ce_idem},
                       {"cond_expect_module", ce_module},
                       {"cond_expect_mean", ce_mean}};
    c.le("associativity", assoc, kExactTol);
    c.le("traciality", trac, kExactTol);
    c.ge("positivity_min", pos_min, 0.0);
    c.le("faithfulness", faith, kExactTol);
    c.le("adjoint_antimultiplicative", adj_mul, kExactTol);
    c.le("cond_expect_module", ce_module, kExactTol);

    double hom = 0.0, star = 0.0, unit = 0.0, trace = 0.0;
    for (int i = 0; i < ss.jw_samples; i++) {
        int m = 1 + i % ss.jw_max_n;
        CliffordElement a = random_element(m, m, rng, 0.5);
        CliffordElement b = random_element(m, m, rng, 0.5);
        MatrixRep ra = jw_rep(a);
        MatrixRep rb = jw_rep(b);
        hom = std::max(hom, (jw_rep(mul(a, b)).mat - ra.mat * rb.mat).cwiseAbs().maxCoeff());
        star = std::max(star, (jw_rep(adjoint(a)).mat - ra.mat.adjoint()).cwiseAbs().maxCoeff());
        trace = std::max(trace, std::abs(ra.mat.trace() / static_cast<double>(ra.dim) - vacuum(a)));
        if (i < ss.jw_max_n) {
            MatrixRep ri = jw_rep(identity(m));
            unit = std::max(unit, (ri.mat - Eigen::MatrixXcd::Identity(ri.dim, ri.dim)).cwiseAbs().maxCoeff());
        }
    }
    j["jordan_wigner"] = json{{"samples", ss.jw_samples},
                              {"max_n", ss.jw_max_n},
                              {"homomorphism", hom},
                              {"adjoint", star},
                              {"unital", unit},
                              {"trace_vs_vacuum", trace}};
    c.le("jw_homomorphism", hom, kExactTol);
    c.le("jw_adjoint", star, kExactTol);
    c.le("jw_unital", unit, kExactTol);
    c.le("jw_trace_vs_vacuum", trace, kExactTol);

    const double ps[5] = {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
    long holder_v = 0, mono_v = 0, contr_v = 0, tri_v = 0, adj_v = 0;
    double holder_slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ss.holder_pairs; i++) {
        int m = 1 + i % ss.holder_max_n;
        double dens = (i % 3 == 0) ? 1.0 : 0.4;
        CliffordElement a = random_element(m, m, rng, dens);
        CliffordElement b = random_element(m, m, rng, dens);
        std::uniform_int_distribution<int> kd(0, m);
        int k = kd(rng);
        double na[5], nb[5];
        for (int pi = 0; pi < 5; pi++) {
            na[pi] = lp_norm(a, ps[pi]);
            nb[pi] = lp_norm(b, ps[pi]);
        }
        double ip = std::abs(pairing(a, b));
        for (int pi = 0; pi < 5; pi++) {
            // The conjugate exponent of ps[pi] is ps[4 - pi] only for the
            // symmetric pairs; compute it explicitly.
            double q = conjugate_exponent(ps[pi]);
            double naq = lp_norm(a, q);
            double rhs = naq * nb[pi];
            holder_slack = std::min(holder_slack, rhs - ip);
            if (ip > rhs + kLpTol) {
                holder_v++;
            }
            if (pi > 0 && na[pi - 1] > na[pi] + kLpTol) {
                mono_v++;
            }
            if (lp_norm(cond_expect(a, k), ps[pi]) > na[pi] + kLpTol) {
                contr_v++;
            }
            if (lp_norm(a + b, ps[pi]) > na[pi] + nb[pi] + kLpTol) {
                tri_v++;
            }
            if (std::abs(lp_norm(adjoint(a), ps[pi]) - na[pi]) > kLpTol) {
                adj_v++;
            }
        }
    }
    j["lp"] = json{{"pairs", ss.holder_pairs},
                   {"max_n", ss.holder_max_n},
                   {"p_values", json::array({1.0, 1.5, 2.0, 3.0, "inf"})},
                   {"holder_violations", holder_v},
                   {"monotonicity_violations", mono_v},
                   {"cond_expect_contraction_violations", contr_v},
                   {"triangle_violations", tri_v},
                   {"adjoint_invariance_violations", adj_v},
                   {"min_holder_slack", holder_slack},
                   {"tolerance", kLpTol}};
    c.le("holder_violations", static_cast<double>(holder_v), 0.0);
    c.le("monotonicity_violations", static_cast<double>(mono_v), 0.0);
    c.le("cond_expect_contraction_violations", static_cast<double>(contr_v), 0.0);
    c.le("triangle_violations", static_cast<double>(tri_v), 0.0);
    c.le("adjoint_invariance_violations", static_cast<double>(adj_v), 0.0);
    return j;
}

// ---------------------------------------------------------------- ito

json ito_section(Ctx &c) {
    const SuiteSettings &ss = c.spec.suite;
    auto rng = section_rng(c.seed, "ito");
    TimeGrid g(c.spec.T, ss.ito_n);
    int n = g.n_steps();
    json j;
    double wsq = 0.0;
    for (int k = 0; k <= n; k++) {
        CliffordElement w = brownian(g, k);
        wsq = std::max(wsq, max_abs_diff(mul(w, w), g.t(k) * identity(n)));
    }
    double iso_r = 0.0, iso_l = 0.0, mart = 0.0, comm = 0.0;
    bool adapted = true;
    for (int i = 0; i < ss.samples; i++) {
        AdaptedProcess f = random_adapted(g, rng, (i % 2) ? 1.0 : 0.3);
        MartingaleSeq r = right_integral(f);
        MartingaleSeq l = left_integral(f);
        double quad = 0.0;
        for (const auto &fk : f.values) {
            double v = norm2(fk);
            quad += g.dt() * v * v;
        }
        double rn = norm2(r.values.back());
        double ln = norm2(l.values.back());
        iso_r = std::max(iso_r, std::abs(rn * rn - quad));
        iso_l = std::max(iso_l, std::abs(ln * ln - quad));
        mart = std::max({mart, check_martingale(r), check_martingale(l)});
        adapted = adapted && is_adapted(r) && is_adapted(l);
        comm = std::max(comm, commutation_check(f));
    }
    double mrep = 0.0, recon = 0.0;
    for (int i = 0; i < ss.martingales; i++) {
        CliffordElement mn = random_element(n, n, rng, (i % 2) ? 1.0 : 0.3);
        MartingaleSeq m{g, {}};
        for (int k = 0; k <= n; k++) {
            m.values.push_back(cond_expect(mn, k));
        }
        auto [Y, res] = mrep_extract(m);
        mrep = std::max(mrep, res);
        CliffordElement sum = m.values[0];
        for (int k = 0; k < n; k++) {
            sum += mul(Y.values[k], dW(g, k));
        }
        recon = std::max(recon, norm2(sum - mn));
        adapted = adapted && is_adapted(Y);
    }
    j["grid"] = json{{"T", g.T()}, {"n_steps", n}};
    j["brownian_square_residual"] = wsq;
    j["isometry"] = json{{"samples", ss.samples}, {"right", iso_r}, {"left", iso_l}};
    j["martingale_defect"] = mart;
    j["martingale_representation"] =
        json{{"martingales", ss.martingales}, {"residual", mrep}, {"reconstruction", recon}};
    j["commutation"] = comm;
    j["adapted"] = adapted;
    c.le("brownian_square_residual", wsq, kExactTol);
    c.le("isometry_right", iso_r, kExactTol);
    c.le("isometry_left", iso_l, kExactTol);
    c.le("martingale_defect", mart, kExactTol);
    c.le("mrep_residual", mrep, kExactTol);
    c.le("mrep_reconstruction", recon, kExactTol);
    c.le("commutation", comm, kExactTol);
    c.check("adapted", adapted, adapted ? 1.0 : 0.0, 1.0);
    return j;
}

// ---------------------------------------------------------------- bg constants

json bg_section(Ctx &c) {
    const SuiteSettings &ss = c.spec.suite;
    auto rng = section_rng(c.seed, "bg");
    TimeGrid g(c.spec.T, ss.ito_n);
    std::ostringstream csv;
    csv.precision(17);
    csv << "sample,p,right_lower,right_upper,left_lower,left_upper\n";
    std::vector<AdaptedProcess> family;
    for (int i = 0; i < ss.samples; i++) {
        family.push_back(random_adapted(g, rng, (i % 3 == 0) ? 1.0 : 0.35));
    }
    json per_p = json::array();
    bool all_defined = true;
    double iso = 0.0;
    for (double p : ss.bg_p) {
        double rl = 0.0, ru = 0.0, ll = 0.0, lu = 0.0;
        for (int i = 0; i < ss.samples; i++) {
            BgRatios r = bg_ratios(family[i], p);
            all_defined = all_defined && r.right_defined && r.left_defined && std::isfinite(r.right_lower) &&
                          std::isfinite(r.right_upper) && std::isfinite(r.left_lower) && std::isfinite(r.left_upper);
            rl = std::max(rl, r.right_lower);
            ru = std::max(ru, r.right_upper);
            ll = std::max(ll, r.left_lower);
            lu = std::max(lu, r.left_upper);
            if (p == 2.0) {
                iso = std::max({iso, std::abs(r.right_lower - 1.0), std::abs(r.left_lower - 1.0)});
            }
            csv << i << "," << p << "," << r.right_lower << "," << r.right_upper << "," << r.left_lower << ","
                << r.left_upper << "\n";
        }
        per_p.push_back(json{{"p", p},
                             {"max_right_lower", rl},
                             {"max_right_upper", ru},
                             {"max_left_lower", ll},
                             {"max_left_upper", lu}});
    }
    c.out.csv["bg_constants.csv"] = csv.str();
    c.check("ratios_defined_and_finite", all_defined, all_defined ? 1.0 : 0.0, 1.0);
    if (std::find(ss.bg_p.begin(), ss.bg_p.end(), 2.0) != ss.bg_p.end()) {
        c.le("p2_ratio_unity", iso, kExactTol);
    }
    return json{{"grid", json{{"T", g.T()}, {"n_steps", g.n_steps()}}},
                {"samples", ss.samples},
                {"constants", per_p},
                {"note", "measured constants over the sampled family; no reference values are asserted"}};
}

// ---------------------------------------------------------------- forward

json forward_section(Ctx &c) {
    const ProblemSpec &s = c.spec;
    auto rng = section_rng(c.seed, "forward");
    ControlProblem pb = build_problem(s);
    const TimeGrid &g = pb.grid;
    int n = g.n_steps();
    AdaptedProcess ubar = spec_control(s, s.ubar, g, pb.control_space);
    StatePath x = euler_forward(pb.coeffs, pb.x0, ubar);
    json j;
    j["problem_id"] = pb.id;
    j["grid"] = json{{"T", g.T()}, {"n_steps", n}};
    j["control_note"] = "controls are piecewise constant on the grid";
    j["x_terminal"] = summarize(x.values.back());
    j["adapted"] = is_adapted(x);
    c.check("adapted", is_adapted(x), is_adapted(x) ? 1.0 : 0.0, 1.0);
    double p = popcount(x.values.back().support()) <= kMaxSpectralGenerators ? pb.p : 2.0;
    AprioriForwardReport ap = apriori_check(x, pb.x0, p);
    j["apriori"] = json{{"p", p}, {"sup_norm_sq", ap.sup_norm_sq}, {"ratio", number_or_null(ap.ratio)}};
    json family = json::array();
    double fam_max = 0.0;
    bool fam_finite = true;
    for (double scale : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        CliffordElement x0 = CliffordElement::scalar(n, scale);
        StatePath xs = euler_forward(pb.coeffs, x0, ubar);
        AprioriForwardReport r = apriori_check(xs, x0, 2.0);
        family.push_back(json{{"x0", scale}, {"ratio", number_or_null(r.ratio)}});
        fam_finite = fam_finite && r.finite;
        fam_max = std::max(fam_max, finite_or_null_guard(r.ratio));
    }
    j["apriori_family"] = json{{"p", 2.0}, {"ratios", family}, {"max_ratio", number_or_null(fam_max)}};
    c.check("apriori_finite", ap.finite && fam_finite, fam_max, std::numeric_limits<double>::infinity());

    json levels = json::array();
    std::vector<double> means;
    std::string stop;
    int cap = support_doubling(pb) ? std::max(n, kMaxDoublingSteps) : kMaxGenerators;
    for (int m = n; m <= cap && levels.size() < 4; m *= 2) {
        try {
            ControlProblem pm = build_problem(s, m);
            AdaptedProcess um = spec_control(s, s.ubar, pm.grid, pm.control_space);
            StatePath xm = euler_forward(pm.coeffs, pm.x0, um);
            means.push_back(vacuum(xm.values.back()).real());
            levels.push_back(json{{"n_steps", m}, {"terminal_mean", means.back()}});
        } catch (const std::runtime_error &e) {
            stop = e.what();
            break;
        }
    }
    json errs = json::array();
    json ratios = json::array();
    std::vector<double> ev;
    for (size_t i = 0; i + 1 < means.size(); i++) {
        ev.push_back(std::abs(means[i] - means[i + 1]));
        errs.push_back(ev.back());
    }
    bool exact = true;
    bool rate_ok = true;
    for (size_t i = 0; i + 1 < ev.size(); i++) {
        if (ev[i] > kExactTol || ev[i + 1] > kExactTol) {
            exact = false;
            double r = ev[i] / ev[i + 1];
            ratios.push_back(r);
            rate_ok = rate_ok && r > 1.5 && r < 2.5;
        }
    }
    j["refinement"] = json{{"levels", levels},
                           {"successive_differences", errs},
                           {"ratios", ratios},
                           {"exact", exact && !ev.empty()},
                           {"stopped", stop}};
    if (ev.size() >= 2) {
        c.check("refinement_first_order", exact || rate_ok, exact ? 0.0 : ratios.back().get<double>(), 2.0,
                "ratio of successive terminal-mean differences in (1.5, 2.5), or exact");
    }

    double fre1 = 0.0, fre2 = 0.0;
    std::uniform_int_distribution<int> kd(0, n - 1);
    for (int i = 0; i < 10; i++) {
        int k = kd(rng);
        CliffordElement xk = random_element(n, k, rng, 0.5);
        CliffordElement dir = random_element(n, k, rng, 0.5);
        const CliffordElement &uk = ubar.values[k];
        std::pair<Coefficient, const OperatorFn *> first[3] = {
            {Coefficient::D, &pb.coeffs.Dx}, {Coefficient::F, &pb.coeffs.Fx}, {Coefficient::G, &pb.coeffs.Gx}};
        const BilinearFn *second[3] = {&pb.coeffs.Dxx, &pb.coeffs.Fxx, &pb.coeffs.Gxx};
        for (int w = 0; w < 3; w++) {
            CliffordElement num = numeric_frechet(pb.coeffs, first[w].first, k, xk, uk, dir);
            CliffordElement ana = (*first[w].second)(k, xk, uk)(dir);
            fre1 = std::max(fre1, norm2(num - ana));
            CliffordElement num2 = numeric_second_frechet(pb.coeffs, first[w].first, k, xk, uk, dir);
            CliffordElement ana2 = (*second[w])(k, xk, uk)(dir, dir);
            fre2 = std::max(fre2, norm2(num2 - ana2));
        }
    }
    j["frechet"] = json{{"samples", 10}, {"first_order", fre1}, {"second_order", fre2}};
    c.le("frechet_first", fre1, kFrechetTol);
    c.le("frechet_second", fre2, kFrechetTol);
    return j;
}

// ---------------------------------------------------------------- bqsde

Driver linear_driver(double a, double cst) {
    Driver d;
    d.f = [a, cst](int, const CliffordElement &y, const CliffordElement &) {
        CliffordElement r = a * y;
        if (cst != 0.0) {
            r += CliffordElement::scalar(y.n(), cst);
        }
        return r;
    };
    d.g1 = std::abs(a);
    d.g2 = 0.0;
    return d;
}

json window_json(const PicardResult &r) {
    json w = json::array();
    for (size_t i = 0; i < r.window_bounds.size(); i++) {
        w.push_back(json{{"first", r.window_bounds[i].first},
                         {"last", r.window_bounds[i].second},
                         {"sweeps", r.window_sweeps[i]},
                         {"factor", r.window_factors[i]}});
    }
    return w;
}

json bqsde_section(Ctx &c) {
    const ProblemSpec &s = c.spec;
    const BqsdeSettings &b = s.bqsde;
    auto rng = section_rng(c.seed, "bqsde");
    json j;
    double T = s.T;
    Driver d = linear_driver(b.a, b.c);
    double closed = b.a != 0.0 ? std::exp(-b.a * T) * (1.0 + b.c / b.a) - b.c / b.a : 1.0 - b.c * T;
    json levels = json::array();
    std::vector<double> impl_over_dt, expl_over_dt, apriori;
    double worst_resid = 0.0;
    bool impl_bound = true;
    double last_err = 0.0;
    for (int m : b.levels) {
        TimeGrid g(T, m);
        CliffordElement yT = identity(m);
        BackwardPath imp = solve_stepwise(d, g, yT, StepMode::Implicit);
        BackwardPath exp = solve_stepwise(d, g, yT, StepMode::Explicit);
        PicardOptions po;
        po.tol = b.picard_tol;
        po.max_iter = std::max(b.picard_max_iter, 1000);
        PicardResult pr = solve_picard(d, g, yT, po);
        double di = sup_distance(imp, pr.path);
        double de = sup_distance(exp, pr.path);
        double err = std::abs(vacuum(imp.y[0]).real() - closed);
        double res = residual(imp, d, yT);
        worst_resid = std::max(worst_resid, res);
        impl_bound = impl_bound && di <= b.stepwise_C * g.dt();
        impl_over_dt.push_back(di / g.dt());
        expl_over_dt.push_back(de / g.dt());
        AprioriBackwardReport ar = apriori_backward_check(imp, d, yT, s.p_prime);
        apriori.push_back(ar.ratio);
        last_err = err;
        levels.push_back(json{{"n_steps", m},
                              {"y0", vacuum(imp.y[0]).real()},
                              {"closed_form", closed},
                              {"closed_form_error", err},
                              {"implicit_residual", res},
                              {"explicit_residual", residual(exp, d, yT)},
                              {"picard_iterations", pr.iterations},
                              {"picard_windows", pr.windows},
                              {"implicit_vs_picard", di},
                              {"implicit_vs_picard_over_dt", di / g.dt()},
                              {"explicit_vs_picard", de},
                              {"explicit_vs_picard_over_dt", de / g.dt()},
                              {"apriori_ratio", number_or_null(ar.ratio)}});
    }
    auto max_rel_change = [](const std::vector<double> &v) {
        double worst = 0.0;
        for (size_t i = 0; i + 1 < v.size(); i++) {
            worst = std::max(worst, std::abs(v[i + 1] / v[i] - 1.0));
        }
        return worst;
    };
    double expl_stab = max_rel_change(expl_over_dt);
    double ap_stab = max_rel_change(apriori);
    j["closed_form"] = json{{"a", b.a}, {"c", b.c}, {"T", T}, {"levels", levels}};
    j["stepwise_C"] = b.stepwise_C;
    j["explicit_over_dt_max_relative_change"] = expl_stab;
    j["apriori_max_relative_change"] = ap_stab;
    c.le("closed_form_error", last_err, kClosedFormTol);
    c.le("implicit_residual", worst_resid, kBqsdeResidualTol);
    c.check("implicit_vs_picard_le_C_dt", impl_bound, impl_over_dt.empty() ? 0.0 : *std::max_element(impl_over_dt.begin(), impl_over_dt.end()), b.stepwise_C);
    c.le("explicit_vs_picard_C_stability", expl_stab, kStabilityTol);
    c.le("apriori_ratio_stability", ap_stab, kStabilityTol);

    // Windowing with g1 T at the configured size.
    {
        TimeGrid g(T, b.window_n);
        int m = g.n_steps();
        Driver dw = linear_driver(b.window_g1 / T, 0.0);
        CliffordElement yT = identity(m) + mul(generator(m, 1), generator(m, m - 2));
        json w;
        w["g1_T"] = b.window_g1;
        w["n_steps"] = m;
        w["tol"] = b.picard_tol;
        w["max_iter"] = b.picard_max_iter;
        PicardOptions po;
        po.tol = b.picard_tol;
        po.max_iter = b.picard_max_iter;
        bool converged = false;
        int windows = 0;
        int iterations = 0;
        try {
            PicardResult pr = solve_picard(dw, g, yT, po);
            converged = true;
            windows = pr.windows;
            iterations = pr.iterations;
            BackwardPath st = solve_stepwise(dw, g, yT, StepMode::Implicit);
            w["contraction_constant"] = pr.contraction_constant;
            w["whole_interval_factor"] = pr.whole_interval_factor;
            w["windows"] = pr.windows;
            w["iterations"] = pr.iterations;
            w["productive_sweeps"] = pr.productive_sweeps;
            w["window_detail"] = window_json(pr);
            w["residual"] = residual(pr.path, dw, yT);
            w["distance_to_stepwise"] = sup_distance(pr.path, st);
        } catch (const std::runtime_error &e) {
            w["error"] = e.what();
        }
        PicardOptions strict = po;
        strict.tol = 1e-12;
        strict.max_iter = 100000;
        PicardResult ps = solve_picard(dw, g, yT, strict);
        w["iterations_at_tol_1e-12"] = ps.iterations;
        j["windowing"] = w;
        c.check("windowing_converged", converged, iterations, b.picard_max_iter);
        c.ge("windowing_windows", windows, 2.0);
    }

    // Uniqueness from two initial iterates and exactness for f = 0.
    {
        TimeGrid g(T, 32);
        int m = g.n_steps();
        CliffordElement yT = identity(m) + mul(generator(m, 2), generator(m, m - 1)) + generator(m, 5);
        PicardOptions po;
        po.tol = 1e-12;
        po.max_iter = 5000;
        PicardResult from_zero = solve_picard(d, g, yT, po);
        BackwardPath init{g, {}, {}};
        for (int k = 0; k <= m; k++) {
            init.y.push_back(3.0 * random_element(m, std::min(k, m), rng, 0.5));
        }
        for (int k = 0; k < m; k++) {
            init.Y.push_back(3.0 * random_element(m, k, rng, 0.5));
        }
        PicardOptions pr_opts = po;
        pr_opts.initial = init;
        PicardResult from_rand = solve_picard(d, g, yT, pr_opts);
        double uniq = sup_distance(from_zero.path, from_rand.path);
        Driver zero;
        zero.f = [m](int, const CliffordElement &, const CliffordElement &) { return CliffordElement::zero(m); };
        PicardResult pz = solve_picard(zero, g, yT, po);
        BackwardPath sz = solve_stepwise(zero, g, yT, StepMode::Implicit);
        double zero_diff = sup_distance(pz.path, sz);
        double zero_y = 0.0;
        for (int k = 0; k <= m; k++) {
            zero_y = std::max(zero_y, max_abs_diff(sz.y[k], cond_expect(yT, k)));
        }
        MartingaleSeq mart{g, sz.y};
        auto [Yrep, rres] = mrep_extract(mart);
        double zero_Y = 0.0;
        for (int k = 0; k < m; k++) {
            zero_Y = std::max(zero_Y, max_abs_diff(Yrep.values[k], sz.Y[k]));
        }
        j["uniqueness"] = json{{"n_steps", m},
                               {"distance", uniq},
                               {"iterations_zero_start", from_zero.iterations},
                               {"iterations_random_start", from_rand.iterations}};
        j["zero_driver"] = json{{"picard_iterations", pz.iterations},
                                {"picard_vs_stepwise", zero_diff},
                                {"martingale_defect", zero_y},
                                {"representation_defect", zero_Y}};
        c.le("uniqueness", uniq, 10.0 * po.tol);
        c.le("zero_driver_martingale", zero_y, kExactTol);
        c.le("zero_driver_representation", zero_Y, kExactTol);
        c.le("zero_driver_picard", zero_diff, kExactTol);
    }

    // Affine driver family.
    {
        TimeGrid g(T, 64);
        CliffordElement yT = identity(64) + generator(64, 7);
        json fam = json::array();
        double worst = 0.0;
        bool finite = true;
        for (double cst : {0.0, 1.0, 2.0, 3.0, 4.0}) {
            Driver da = linear_driver(0.0, cst);
            BackwardPath bp = solve_stepwise(da, g, yT, StepMode::Implicit);
            AprioriBackwardReport ar = apriori_backward_check(bp, da, yT, s.p_prime);
            fam.push_back(json{{"c", cst}, {"ratio", number_or_null(ar.ratio)}});
            finite = finite && ar.finite;
            worst = std::max(worst, finite_or_null_guard(ar.ratio));
        }
        j["affine_family"] = json{{"ratios", fam}, {"max_ratio", number_or_null(worst)}};
        c.check("affine_family_finite", finite, worst, std::numeric_limits<double>::infinity());
    }
    return j;
}

// ---------------------------------------------------------------- ladder

const char *status_name(LadderStatus s) {
    switch (s) {
        case LadderStatus::Fitted:
            return "fitted";
        case LadderStatus::IdenticallyZero:
            return "identically_zero";
        default:
            return "degenerate";
    }
}

json ladder_section(Ctx &c) {
    const ProblemSpec &s = c.spec;
    ControlProblem pb = build_problem(s);
    const TimeGrid &g = pb.grid;
    AdaptedProcess ubar = spec_control(s, s.ubar, g, pb.control_space);
    AdaptedProcess u = spec_control(s, s.u, g, pb.control_space);
    json j;
    j["problem_id"] = pb.id;
    j["grid"] = json{{"T", g.T()}, {"n_steps", g.n_steps()}};
    j["eps_list"] = s.eps_list;
    j["min_eps_steps"] = s.min_eps_steps;
    std::ostringstream csv;
    csv.precision(17);
    csv << "offset,eps,xi,y,z,eta,zeta,cost_residual\n";
    json offsets = json::array();
    for (double off : s.offsets) {
        LadderReport lr = variation_ladder(pb, ubar, u, s.eps_list, off, s.min_eps_steps);
        CostExpansionReport ce = cost_expansion_check(pb, ubar, u, s.eps_list, off);
        json series = json::array();
        json slopes = json::object();
        bool literal = true;
        for (const LadderSeries &ls : lr.series) {
            bool fitted = ls.status == LadderStatus::Fitted;
            bool zero = ls.status == LadderStatus::IdenticallyZero;
            bool one_sided = zero || (fitted && ls.slope >= ls.target_slope - kSlopeBand);
            bool two_sided = fitted && std::abs(ls.slope - ls.target_slope) <= kSlopeBand;
            literal = literal && two_sided;
            series.push_back(json{{"name", ls.name},
                                  {"target_slope", ls.target_slope},
                                  {"values", ls.values},
                                  {"slope", fitted ? json(ls.slope) : json(nullptr)},
                                  {"status", status_name(ls.status)},
                                  {"pass", one_sided},
                                  {"pass_literal", two_sided}});
            slopes[ls.name] = fitted ? json(ls.slope) : json(nullptr);
            c.check("offset_" + std::to_string(off) + "." + ls.name + "_slope", one_sided, fitted ? ls.slope : 0.0,
                    ls.target_slope - kSlopeBand, "fitted slope at least target - 0.25, or identically zero");
        }
        bool ce_ok = ce.identically_zero || ce.slope > 1.0;
        c.check("offset_" + std::to_string(off) + ".zeta_below_eta", lr.zeta_below_eta, 0.0, 0.0);
        c.check("offset_" + std::to_string(off) + ".cost_expansion_slope", ce_ok, ce.slope, 1.0);
        for (size_t i = 0; i < s.eps_list.size(); i++) {
            csv << off << "," << s.eps_list[i];
            for (const LadderSeries &ls : lr.series) {
                csv << "," << ls.values[i];
            }
            csv << "," << ce.residuals[i] << "\n";
        }
        offsets.push_back(json{{"offset", off},
                               {"series", series},
                               {"slopes", slopes},
                               {"zeta_below_eta", lr.zeta_below_eta},
                               {"pass_literal_two_sided", literal},
                               {"cost_expansion",
                                json{{"residuals", ce.residuals},
                                     {"slope", ce.identically_zero ? json(nullptr) : json(ce.slope)},
                                     {"identically_zero", ce.identically_zero},
                                     {"pass", ce_ok}}}});
    }
    j["offsets"] = offsets;
    c.out.csv["ladder.csv"] = csv.str();

    json levels = json::array();
    std::vector<double> ry, ryz;
    double eps = s.eps_list[0];
    double off = s.offsets[0];
    for (int m : s.duality_levels) {
        ControlProblem pm = build_problem(s, m);
        AdaptedProcess um = spec_control(s, s.ubar, pm.grid, pm.control_space);
        AdaptedProcess uu = spec_control(s, s.u, pm.grid, pm.control_space);
        StatePath xb = euler_forward(pm.coeffs, pm.x0, um);
        AdjointPair adj = first_adjoint(pm, xb, um);
        DualityReport dr = duality_check(pm, xb, um, uu, eps, off, adj);
        ry.push_back(dr.residual_y);
        ryz.push_back(dr.residual_yz);
        levels.push_back(json{{"n_steps", m},
                              {"lhs_y", dr.lhs_y.real()},
                              {"rhs_y", dr.rhs_y.real()},
                              {"residual_y", dr.residual_y},
                              {"lhs_yz", dr.lhs_yz.real()},
                              {"rhs_yz", dr.rhs_yz.real()},
                              {"residual_yz", dr.residual_yz}});
    }
    auto verdict = [&](const std::vector<double> &r, const std::string &name, json &dst) {
        bool exact = std::all_of(r.begin(), r.end(), [](double v) { return v <= kDualityExactTol; });
        json ratios = json::array();
        bool ok = true;
        double last = 0.0;
        for (size_t i = 0; i + 1 < r.size(); i++) {
            double q = r[i + 1] > 0.0 ? r[i] / r[i + 1] : std::numeric_limits<double>::infinity();
            ratios.push_back(number_or_null(q));
            ok = ok && q >= kDualityLow && q <= kDualityHigh;
            last = q;
        }
        dst[name + "_ratios"] = ratios;
        dst[name + "_exact"] = exact;
        c.check("duality_" + name, exact || ok, exact ? 0.0 : last, 2.0,
                "halving ratio in [1.6, 2.4], or exact to 1e-10 on every level");
    };
    json dual{{"eps", eps}, {"offset", off}, {"levels", levels}};
    verdict(ry, "y", dual);
    verdict(ryz, "yz", dual);
    j["duality"] = dual;
    return j;
}

// ---------------------------------------------------------------- max principle

ControlProblem scaled(const ControlProblem &pb, double k) {
    ControlProblem q = pb;
    auto L = pb.L;
    auto Lx = pb.Lx;
    auto Lxx = pb.Lxx;
    auto h = pb.h;
    auto hx = pb.hx;
    auto hxx = pb.hxx;
    q.L = [L, k](int t, const CliffordElement &x, const CliffordElement &u) { return k * L(t, x, u); };
    q.Lx = [Lx, k](int t, const CliffordElement &x, const CliffordElement &u) { return k * Lx(t, x, u); };
    q.Lxx = [Lxx, k](int t, const CliffordElement &x, const CliffordElement &u) {
        return HessianForm{k * Lxx(t, x, u).op};
    };
    q.h = [h, k](const CliffordElement &x) { return k * h(x); };
    q.hx = [hx, k](const CliffordElement &x) { return k * hx(x); };
    q.hxx = [hxx, k](const CliffordElement &x) { return HessianForm{k * hxx(x).op}; };
    return q;
}

AdaptedProcess coarse_control(const ControlProblem &pb, int steps_coarse, const std::vector<double> &v) {
    const TimeGrid &g = pb.grid;
    int n = g.n_steps();
    size_t B = pb.control_space.basis.size();
    AdaptedProcess u{g, {}};
    for (int k = 0; k < n; k++) {
        int blk = coarse_block(k, n, steps_coarse);
        std::vector<double> cf(v.begin() + blk * B, v.begin() + (blk + 1) * B);
        u.values.push_back(pb.control_space.make(cf));
    }
    return u;
}

// Golden-section coordinate descent over the coarse coefficients.
std::vector<double> continuous_refinement(const ControlProblem &pb, int steps_coarse, std::vector<double> v,
                                          double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    auto J = [&](const std::vector<double> &w) { return cost(pb, coarse_control(pb, steps_coarse, w)); };
    for (int pass = 0; pass < 30; pass++) {
        for (size_t i = 0; i < v.size(); i++) {
            double a = lo, b = hi;
            double x1 = b - r * (b - a), x2 = a + r * (b - a);
            auto at = [&](double t) {
                std::vector<double> w = v;
                w[i] = t;
                return J(w);
            };
            double f1 = at(x1), f2 = at(x2);
            for (int it = 0; it < 60; it++) {
                if (f1 < f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - r * (b - a);
                    f1 = at(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + r * (b - a);
                    f2 = at(x2);
                }
            }
            v[i] = 0.5 * (a + b);
        }
    }
    return v;
}

json mp_section(Ctx &c) {
    const ProblemSpec &s = c.spec;
    ControlProblem pb = build_problem(s);
    const TimeGrid &g = pb.grid;
    int n = g.n_steps();
    json j;
    j["problem_id"] = pb.id;
    j["grid"] = json{{"T", g.T()}, {"n_steps", n}};
    j["value_grid"] = s.value_grid;
    j["steps_coarse"] = s.steps_coarse;
    j["p_term_active"] = pb.p_term_active;
    BruteForceResult bf = brute_force_optimum(pb, s.steps_coarse, s.value_grid, c.threads);
    j["optimum"] = json{{"coarse_values", bf.coarse_values}, {"cost", bf.cost}, {"evaluated", bf.evaluated}};
    const AdaptedProcess &ubar = bf.control;
    StatePath xbar = euler_forward(pb.coeffs, pb.x0, ubar);
    AdjointPair adj = first_adjoint(pb, xbar, ubar);
    std::optional<SecondAdjointPath> P;
    std::string refusal;
    if (pb.p_term_active) {
        try {
            P = second_adjoint_deterministic(pb, xbar, ubar, adj);
        } catch (const StochasticCoefficientError &e) {
            refusal = e.what();
        }
    }
    if (P) {
        double term = op_distance(P->P.back(), -1.0 * pb.hxx(xbar.values.back()).op);
        j["second_adjoint"] = json{{"max_asymmetry", P->max_asymmetry}, {"terminal_defect", term}};
        c.le("second_adjoint_terminal", term, kExactTol);
    } else if (!refusal.empty()) {
        j["second_adjoint"] = json{{"refused", refusal}};
    }
    std::ostringstream csv;
    csv.precision(17);
    csv << "k,u,lhs\n";
    double mp_min = std::numeric_limits<double>::infinity();
    int arg_k = -1;
    double arg_u = 0.0;
    double at_ubar = 0.0;
    bool evaluated = !(pb.p_term_active && !P);
    if (evaluated) {
        for (int k = 0; k < n; k++) {
            at_ubar = std::max(at_ubar, std::abs(mp_lhs(pb, k, ubar.values[k], xbar, ubar, adj, P ? &*P : nullptr)));
            for (double v : s.candidates) {
                std::vector<double> cf(pb.control_space.basis.size(), 0.0);
                cf[0] = v;
                double lhs = mp_lhs(pb, k, pb.control_space.make(cf), xbar, ubar, adj, P ? &*P : nullptr);
                csv << k << "," << v << "," << lhs << "\n";
                if (lhs < mp_min) {
                    mp_min = lhs;
                    arg_k = k;
                    arg_u = v;
                }
            }
        }
    }
    c.out.csv["mp_lattice.csv"] = csv.str();
    double tol = std::max(kMpFloor, kMpDtConstant * g.dt());
    bool mp_pass = evaluated && mp_min >= -tol;
    j["mp_min"] = number_or_null(mp_min);
    j["mp_argmin"] = json{{"k", arg_k}, {"u", arg_u}};
    j["tolerance"] = tol;
    j["lhs_at_ubar_max_abs"] = at_ubar;
    j["asserted"] = s.assert_mp;
    j["pass"] = mp_pass;
    if (s.assert_mp) {
        c.check("mp_min", mp_pass, mp_min, -tol, "minimum of the necessary-condition left-hand side");
    }
    if (evaluated) {
        c.le("lhs_at_ubar", at_ubar, kExactTol);
    }

    ControlProblem sc = scaled(pb, kScalingFactor);
    BruteForceResult bs = brute_force_optimum(sc, s.steps_coarse, s.value_grid, c.threads);
    bool same = bs.coarse_values == bf.coarse_values;
    double cost_ratio_err = std::abs(bs.cost - kScalingFactor * bf.cost) / std::max(1.0, std::abs(bf.cost));
    j["argmin_invariance"] = json{{"factor", kScalingFactor}, {"same_minimizer", same}, {"cost_defect", cost_ratio_err}};
    c.check("argmin_invariance", same && cost_ratio_err <= 1e-9, cost_ratio_err, 1e-9);

    double lo = *std::min_element(s.value_grid.begin(), s.value_grid.end());
    double hi = *std::max_element(s.value_grid.begin(), s.value_grid.end());
    double cell = s.value_grid.size() > 1 ? (hi - lo) / (s.value_grid.size() - 1) : 1.0;
    std::vector<double> start(bf.coarse_values.size(), 0.5 * (lo + hi));
    std::vector<double> refined = continuous_refinement(pb, s.steps_coarse, start, lo - cell, hi + cell);
    double gap = 0.0;
    for (size_t i = 0; i < refined.size(); i++) {
        gap = std::max(gap, std::abs(refined[i] - bf.coarse_values[i]));
    }
    j["continuous_refinement"] = json{{"values", refined},
                                      {"cost", cost(pb, coarse_control(pb, s.steps_coarse, refined))},
                                      {"max_gap", gap},
                                      {"grid_cell", cell}};
    c.le("refinement_within_cell", gap, cell * (1.0 + 1e-9));
    return j;
}

using SectionFn = json (*)(Ctx &);

const std::vector<std::pair<std::string, std::vector<std::pair<std::string, SectionFn>>>> &pipelines() {
    static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, SectionFn>>>> p = {
        {"algebra-suite", {{"algebra", algebra_section}}},
        {"ito-suite", {{"ito", ito_section}}},
        {"forward", {{"forward", forward_section}}},
        {"bqsde", {{"bqsde", bqsde_section}}},
        {"ladder", {{"ladder", ladder_section}}},
        {"max-principle", {{"max_principle", mp_section}}},
        {"bg-constants", {{"bg_constants", bg_section}}},
        {"all",
         {{"algebra", algebra_section},
          {"ito", ito_section},
          {"bg_constants", bg_section},
          {"forward", forward_section},
          {"bqsde", bqsde_section},
          {"ladder", ladder_section},
          {"max_principle", mp_section}}},
    };
    return p;
}

}  // namespace

const std::vector<std::string> &subcommands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &[name, _] : pipelines()) {
            v.push_back(name);
        }
        return v;
    }();
    return names;
}

RunOutput run(const std::string &subcommand, const ProblemSpec &spec, uint64_t seed, int threads) {
    const std::vector<std::pair<std::string, SectionFn>> *sections = nullptr;
    for (const auto &[name, secs] : pipelines()) {
        if (name == subcommand) {
            sections = &secs;
        }
    }
    if (sections == nullptr) {
        std::string names;
        for (const auto &n : subcommands()) {
            names += (names.empty() ? "" : ", ") + n;
        }
        throw std::invalid_argument("unknown subcommand '" + subcommand + "'; available: " + names);
    }
    RunOutput out;
    json report;
    report["schema_version"] = kSchemaVersion;
    report["tool"] = "qfermion";
    report["subcommand"] = subcommand;
    report["seed"] = seed;
    report["spec"] = spec_to_json(spec);
    json secs = json::object();
    for (const auto &[name, fn] : *sections) {
        Ctx ctx{spec, seed, std::max(1, threads), out, name};
        auto t0 = std::chrono::steady_clock::now();
        try {
            secs[name] = fn(ctx);
        } catch (const std::exception &e) {
            secs[name] = json{{"error", e.what()}};
            ctx.check("completed", false, 0.0, 0.0, e.what());
        }
        out.timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    report["sections"] = secs;
    json asserts = json::array();
    for (const Assertion &a : out.assertions) {
        asserts.push_back(json{{"name", a.name},
                               {"pass", a.pass},
                               {"value", number_or_null(a.value)},
                               {"threshold", number_or_null(a.threshold)},
                               {"note", a.note}});
    }
    report["assertions"] = asserts;
    report["pass"] = out.pass;
    out.report = std::move(report);
    return out;
}

std::string dump_report(const json &report) { return report.dump(2) + "\n"; }

namespace {

void atomic_write(const std::filesystem::path &path, const std::string &data) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(static_cast<long>(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        f << data;
        f.flush();
        if (!f) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_outputs(const RunOutput &out, const std::string &dir, const std::string &subcommand) {
    std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    atomic_write(d / (subcommand + ".json"), dump_report(out.report));
    atomic_write(d / (subcommand + ".timings.json"), out.timings.dump(2) + "\n");
    for (const auto &[name, data] : out.csv) {
        atomic_write(d / name, data);
    }
}

}  // namespace qf
