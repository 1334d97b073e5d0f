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

// Command-line front end.
//
//   qfermion <subcommand> --spec FILE --out DIR [--seed N] [--threads N]
//
// Exit status: 0 when every enabled assertion passes, 1 when one fails,
// 2 for usage or problem-file errors.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qfermion/runner.hpp"

namespace {

constexpr const char *kOutEnv = "QFERMION_OUT_DIR";

int run_one(const std::string &sub, const std::string &spec_path, std::string out_dir, uint64_t seed, int threads) {
    if (out_dir.empty()) {
        const char *env = std::getenv(kOutEnv);
        out_dir = env ? env : "";
    }
    if (out_dir.empty()) {
        std::cerr << "error: no output directory; pass --out or set " << kOutEnv << "\n";
        return 2;
    }
    qf::ProblemSpec spec;
    try {
        spec = qf::parse_problem_file(spec_path);
    } catch (const qf::SpecError &e) {
        std::cerr << "error: invalid problem file " << spec_path << "\n";
        for (const auto &i : e.issues()) {
            std::cerr << "  " << (i.pointer.empty() ? "/" : i.pointer) << ": " << i.message << "\n";
        }
        return 2;
    }
    qf::RunOutput out;
    try {
        out = qf::run(sub, spec, seed, threads);
        qf::write_outputs(out, out_dir, sub);
    } catch (const std::exception &e) {
        std::cerr << "error: " << sub << ": " << e.what() << "\n";
        return 2;
    }
    int failed = 0;
    for (const auto &a : out.assertions) {
        if (!a.pass) {
            failed++;
            std::cerr << "FAIL " << a.name << " value=" << a.value << " threshold=" << a.threshold;
            if (!a.note.empty()) {
                std::cerr << " (" << a.note << ")";
            }
            std::cerr << "\n";
        }
    }
    std::cout << sub << ": " << (out.assertions.size() - failed) << "/" << out.assertions.size()
              << " assertions passed; report in " << out_dir << "\n";
    return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qfermion: discrete fermion stochastic calculus and control checks"};
    app.require_subcommand(1);
    std::string spec_path;
    std::string out_dir;
    uint64_t seed = 1;
    int threads = 1;
    for (const std::string &name : qf::subcommands()) {
        CLI::App *sub = app.add_subcommand(name, "run the " + name + " pipeline");
        sub->add_option("--spec", spec_path, "problem file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, std::string("output directory (default: $") + kOutEnv + ")");
        sub->add_option("--seed", seed, "seed for the random-element suites")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads for sweeps")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    }
    CLI11_PARSE(app, argc, argv);
    for (CLI::App *sub : app.get_subcommands()) {
        return run_one(sub->get_name(), spec_path, out_dir, seed, threads);
    }
    return 2;
}
