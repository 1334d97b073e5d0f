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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qfermion/runner.hpp"

namespace qf {
namespace {

std::vector<SchemaIssue> issues_of(const std::string &text) {
    try {
        parse_problem(text);
    } catch (const SpecError &e) {
        return e.issues();
    }
    return {};
}

bool has_pointer(const std::vector<SchemaIssue> &issues, const std::string &pointer) {
    for (const auto &i : issues) {
        if (i.pointer == pointer) {
            return true;
        }
    }
    return false;
}

TEST(Parse, MinimalSpecFillsDefaults) {
    ProblemSpec s = parse_problem(R"({"problem_id": "lq_scalar", "T": 1, "n_steps": 8})");
    EXPECT_EQ(s.problem_id, "lq_scalar");
    EXPECT_EQ(s.n_steps, 8);
    EXPECT_EQ(s.p, 2.0);
    EXPECT_EQ(s.value_grid.size(), 7u);
    EXPECT_EQ(s.candidates, s.value_grid);
    EXPECT_GE(s.eps_list.size(), 2u);
    EXPECT_EQ(s.eps_list.front(), 0.25);
    EXPECT_TRUE(s.assert_mp);
    json j = spec_to_json(s);
    EXPECT_EQ(j["params"]["r"], 1.0);
    EXPECT_EQ(j["grid"]["n_steps"], 8);
}

TEST(Parse, DefaultEpsListHalvesFiveTimesOnFineGrids) {
    ProblemSpec s = parse_problem(R"({"problem_id": "lq_scalar", "n_steps": 128})");
    ASSERT_EQ(s.eps_list.size(), 5u);
    EXPECT_DOUBLE_EQ(s.eps_list.back(), 1.0 / 64);
    EXPECT_EQ(s.duality_levels, (std::vector<int>{64, 128, 256}));
}

TEST(Parse, ElementSizeMismatchNamesTheField) {
    auto issues = issues_of(R"({"problem_id": "lq_scalar", "n_steps": 8,
                                "x0": {"n": 4, "terms": [{"mask": 0, "re": 1}]}})");
    EXPECT_TRUE(has_pointer(issues, "/x0/n"));
}

TEST(Parse, UnknownCatalogIdListsAvailableIds) {
    auto issues = issues_of(R"({"problem_id": "nope"})");
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].pointer, "/problem_id");
    for (const auto &id : catalog_ids()) {
        EXPECT_NE(issues[0].message.find(id), std::string::npos);
    }
}

TEST(Parse, MalformedJsonIsReported) {
    auto issues = issues_of("{\"problem_id\": ");
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].message.find("malformed JSON"), std::string::npos);
}

TEST(Parse, CollectsSeveralIssuesAtOnce) {
    auto issues = issues_of(R"({"problem_id": "lq_scalar", "p": 1.5, "params": {"zzz": 1}, "bogus": 1,
                                "eps_list": [0.5, 0.0001]})");
    EXPECT_TRUE(has_pointer(issues, "/p"));
    EXPECT_TRUE(has_pointer(issues, "/params/zzz"));
    EXPECT_TRUE(has_pointer(issues, "/bogus"));
    EXPECT_TRUE(has_pointer(issues, "/eps_list/1"));
}

TEST(Parse, WideMasksAsDecimalStrings) {
    json j = json::parse(R"({"n": 100, "terms": [{"mask": "633825300114114700748351602688", "re": 2}]})");
    CliffordElement a = element_from_json(j, "/x");
    EXPECT_EQ(a.coeff(bit(99)), cplx(2.0));
    EXPECT_EQ(element_to_json(a)["terms"][0]["mask"], "633825300114114700748351602688");
    json bad = json::parse(R"({"n": 3, "terms": [{"mask": 8}]})");
    try {
        element_from_json(bad, "/x");
        FAIL();
    } catch (const SpecError &e) {
        EXPECT_EQ(e.issues()[0].pointer, "/x/terms/0/mask");
    }
}

TEST(Parse, LinearMapCompositionsAndInlineProblems) {
    int n = 3;
    json m = json::parse(R"({"compose": [{"left": {"n": 3, "terms": [{"mask": 1, "re": 1}]}},
                                         {"sum": [{"scalar": 2}, {"grading": true}]}]})");
    ElementOperator op = linear_map_from_json(m, n, "/m");
    CliffordElement x = generator(n, 1);
    // (2 + grading)(gamma_1) = gamma_1, then left multiplication by gamma_0.
    EXPECT_EQ(op(x), mul(generator(n, 0), generator(n, 1)));

    ProblemSpec s = parse_problem(R"({"problem_id": "inline", "n_steps": 4,
        "coefficients": {"D": {"x": {"scalar": -0.5}, "u": {"scalar": 1}}, "r": 1, "s": 1}})");
    ControlProblem pb = build_problem(s);
    EXPECT_EQ(pb.grid.n_steps(), 4);
    EXPECT_FALSE(pb.p_term_active);
    auto issues = issues_of(R"({"problem_id": "inline", "n_steps": 4,
        "coefficients": {"F": {"u": {"left": {"n": 5, "terms": []}}}}})");
    EXPECT_TRUE(has_pointer(issues, "/coefficients/F/u/left/n"));
}

TEST(Catalog, EntriesRoundTripThroughTheParser) {
    ASSERT_GE(catalog().size(), 4u);
    for (const auto &e : catalog()) {
        ProblemSpec s = parse_problem(json{{"problem_id", e.id}}.dump());
        std::string once = spec_to_json(s).dump();
        ProblemSpec again = parse_problem(once);
        EXPECT_EQ(spec_to_json(again).dump(), once) << e.id;
        EXPECT_FALSE(e.criteria.empty());
        build_problem(s);
    }
    EXPECT_TRUE(find_catalog_entry("control_in_noise")->p_term_active);
    EXPECT_TRUE(build_problem(parse_problem(R"({"problem_id": "control_in_noise"})")).p_term_active);
    EXPECT_FALSE(find_catalog_entry("lq_scalar")->p_term_active);
}

ProblemSpec small_suite() {
    return parse_problem(R"({"problem_id": "lq_scalar",
        "suite": {"samples": 10, "car_max_n": 6, "jw_samples": 20, "jw_max_n": 6, "holder_pairs": 20,
                  "holder_max_n": 4, "ito_n": 5, "martingales": 10}})");
}

TEST(Run, AlgebraSuitePasses) {
    RunOutput out = run("algebra-suite", small_suite(), 1);
    EXPECT_TRUE(out.pass);
    EXPECT_EQ(out.report["schema_version"], kSchemaVersion);
    EXPECT_LE(out.report["sections"]["algebra"]["car"]["residual"].get<double>(), 1e-12);
}

TEST(Run, ReportsAreByteIdenticalForEqualSeeds) {
    ProblemSpec s = small_suite();
    for (const char *sub : {"algebra-suite", "ito-suite", "bg-constants"}) {
        RunOutput a = run(sub, s, 42);
        RunOutput b = run(sub, s, 42, 4);
        EXPECT_EQ(dump_report(a.report), dump_report(b.report)) << sub;
        EXPECT_EQ(a.csv, b.csv);
    }
    EXPECT_NE(dump_report(run("ito-suite", s, 1).report), dump_report(run("ito-suite", s, 2).report));
}

TEST(Run, UnknownSubcommandThrows) { EXPECT_THROW(run("nope", small_suite(), 1), std::invalid_argument); }

TEST(Run, FailingAssertionsClearThePassFlag) {
    // A two-point value grid without the optimum makes the oracle inexact,
    // so the asserted necessary condition fails.
    ProblemSpec s = parse_problem(R"({"problem_id": "lq_scalar", "n_steps": 24, "value_grid": [0.5, 1.0],
                                      "candidates": [-0.5], "assert_mp": true})");
    RunOutput out = run("max-principle", s, 1);
    EXPECT_FALSE(out.pass);
    EXPECT_FALSE(out.report["pass"].get<bool>());
}

TEST(Run, WritesOutputsAtomically) {
    auto dir = std::filesystem::temp_directory_path() / "qfermion_runner_test";
    std::filesystem::remove_all(dir);
    RunOutput out = run("bg-constants", small_suite(), 3);
    write_outputs(out, dir.string(), "bg-constants");
    EXPECT_TRUE(std::filesystem::exists(dir / "bg-constants.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "bg-constants.timings.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "bg_constants.csv"));
    std::ifstream f(dir / "bg-constants.json");
    std::stringstream ss;
    ss << f.rdbuf();
    EXPECT_EQ(ss.str(), dump_report(out.report));
    for (const auto &e : std::filesystem::directory_iterator(dir)) {
        EXPECT_EQ(e.path().string().find(".tmp."), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace qf
