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

#ifndef QFERMION_RUNNER_HPP
#define QFERMION_RUNNER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qfermion/catalog.hpp"

namespace qf {

using json = nlohmann::ordered_json;

inline constexpr const char *kSchemaVersion = "1.0";

struct SchemaIssue {
    std::string pointer;
    std::string message;
};

/// Invalid problem file; carries every issue found with its JSON pointer.
class SpecError : public std::runtime_error {
   public:
    explicit SpecError(std::vector<SchemaIssue> issues);
    const std::vector<SchemaIssue> &issues() const { return issues_; }

   private:
    std::vector<SchemaIssue> issues_;
};

json element_to_json(const CliffordElement &a);
/// Accepts masks as JSON integers or decimal strings. Errors name `pointer`.
CliffordElement element_from_json(const json &j, const std::string &pointer);

/// Linear maps in problem files: {"scalar": c}, {"left": element},
/// {"right": element}, {"grading": true}, {"sum": [...]}, {"compose": [...]}.
/// A composition list applies its last entry first.
ElementOperator linear_map_from_json(const json &j, int n, const std::string &pointer);

struct SuiteSettings {
    int n = 6;
    int samples = 200;
    int car_max_n = 12;
    int jw_max_n = 10;
    int jw_samples = 500;
    int holder_pairs = 1000;
    int holder_max_n = 8;
    int ito_n = 8;
    int martingales = 200;
    std::vector<double> bg_p = {1.25, 1.5, 2.0};
};

struct BqsdeSettings {
    /// Scalar linear driver f = a y + c.
    double a = 1.0;
    double c = 0.0;
    std::vector<int> levels = {64, 128, 256};
    double window_g1 = 8.0;
    int window_n = 256;
    double picard_tol = 1e-10;
    int picard_max_iter = 200;
    double stepwise_C = 1.0;
};

struct ProblemSpec {
    std::string problem_id;
    bool is_inline = false;
    /// Raw inline coefficient description, validated at parse time.
    json coefficients;
    std::map<std::string, double> params;
    double T = 1.0;
    int n_steps = 8;
    double p = 2.0;
    double p_prime = 2.0;
    std::optional<CliffordElement> x0;
    /// Control coefficients on the basis, one per step.
    std::vector<double> ubar;
    std::vector<double> u;
    std::vector<double> eps_list;
    std::vector<double> offsets = {0.0};
    int min_eps_steps = 2;
    std::vector<double> value_grid;
    std::vector<double> candidates;
    int steps_coarse = 3;
    bool assert_mp = false;
    std::vector<int> duality_levels;
    SuiteSettings suite;
    BqsdeSettings bqsde;
};

ProblemSpec parse_problem(const std::string &text);
ProblemSpec parse_problem_file(const std::string &path);
/// Normalized spec with every default filled in.
json spec_to_json(const ProblemSpec &spec);

/// Problem on the configured grid, or on `n_steps` steps when given.
ControlProblem build_problem(const ProblemSpec &spec, std::optional<int> n_steps = std::nullopt);
AdaptedProcess spec_control(const ProblemSpec &spec, const std::vector<double> &coeffs, const TimeGrid &grid,
                            const ControlSpace &controls);

/// State-multiplicative noise doubles the state support every step, so grid
/// sweeps on such problems stop at kMaxDoublingSteps.
bool support_doubling(const ControlProblem &pb);
inline constexpr int kMaxDoublingSteps = 16;

/// Random element of C_k on n generators with standard complex Gaussian
/// amplitudes, each admissible monomial kept with probability `density`.
CliffordElement random_element(int n, int k, std::mt19937_64 &rng, double density = 1.0);
/// Random adapted integrand f_0..f_{n-1} with f_k in C_k.
AdaptedProcess random_adapted(const TimeGrid &g, std::mt19937_64 &rng, double density = 1.0);

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct RunOutput {
    json report;
    /// File name to CSV contents.
    std::map<std::string, std::string> csv;
    /// Wall-clock seconds per section; kept out of the report so reports stay byte-identical.
    json timings = json::object();
    std::vector<Assertion> assertions;
    bool pass = true;
};

const std::vector<std::string> &subcommands();

/// Runs one pipeline. Throws std::invalid_argument for unknown subcommands.
RunOutput run(const std::string &subcommand, const ProblemSpec &spec, uint64_t seed, int threads = 1);

/// Writes report.json, timings.json and the CSV tables into dir atomically.
void write_outputs(const RunOutput &out, const std::string &dir, const std::string &subcommand);

/// Byte-exact serialization used for report files.
std::string dump_report(const json &report);

}  // namespace qf

#endif
