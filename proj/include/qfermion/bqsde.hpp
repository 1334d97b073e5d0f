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

#ifndef QFERMION_BQSDE_HPP
#define QFERMION_BQSDE_HPP

#include <functional>
#include <optional>
#include <vector>

#include "qfermion/ito.hpp"

namespace qf {

/// Driver f(k, y, Y) of dy = f dt + Y dW, Lipschitz with constants g1 in y and g2 in Y.
struct Driver {
    std::function<CliffordElement(int k, const CliffordElement &y, const CliffordElement &Y)> f;
    double g1 = 0.0;
    double g2 = 0.0;
};

/// y_0..y_n and Y_0..Y_{n-1}.
struct BackwardPath {
    TimeGrid grid;
    std::vector<CliffordElement> y;
    std::vector<CliffordElement> Y;
};

enum class StepMode { Explicit, Implicit };

struct StepwiseOptions {
    double inner_tol = 1e-12;
    int inner_max_iter = 100;
};

/// y_k = E[y_{k+1} | C_k] - f(k, ., Y_k) dt with Y_k = E[y_{k+1} dW_k | C_k] / dt.
BackwardPath solve_stepwise(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT,
                            StepMode mode = StepMode::Implicit, const StepwiseOptions &opts = {});

struct PicardOptions {
    int max_iter = 200;
    double tol = 1e-12;
    /// Starting iterate; zero when absent.
    std::optional<BackwardPath> initial;
    /// Overrides the measured contraction constant.
    std::optional<double> contraction_constant;
    /// Contraction factor bound per window.
    double window_factor = 0.25;
    /// Windowing starts once the whole-interval factor exceeds this.
    double activation_factor = 0.5;
};

struct PicardResult {
    BackwardPath path;
    /// Total sweeps over all windows, including one confirming sweep per window.
    int iterations = 0;
    /// Sweeps that moved the iterate: iterations minus windows.
    int productive_sweeps = 0;
    int windows = 1;
    double contraction_constant = 1.0;
    double whole_interval_factor = 0.0;
    /// Window boundaries in steps, backward order: [start, end).
    std::vector<std::pair<int, int>> window_bounds;
    std::vector<int> window_sweeps;
    std::vector<double> window_factors;
};

/// Global Picard iteration through the martingale representation, with
/// backward windowing when the whole-interval factor exceeds the bound.
PicardResult solve_picard(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT,
                          const PicardOptions &opts = {});

/// C such that one sweep contracts by at most sqrt(C ((sum g1 dt)^2 + sum g2^2 dt)).
double measure_contraction_constant(const Driver &driver, const TimeGrid &grid, const CliffordElement &yT);

/// max_k || y_k - y_{k+1} + f(k, y_k, Y_k) dt + Y_k dW_k ||_2.
double residual(const BackwardPath &path, const Driver &driver, const CliffordElement &yT);

/// sup_k ||y_k - z_k||_2.
double sup_distance(const BackwardPath &a, const BackwardPath &b);

struct AprioriBackwardReport {
    double p_prime = 2.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
    bool vacuous = false;
    bool finite = false;
};

/// (sup ||y_k||_p' + (sum dt ||Y_k||_p'^2)^(1/2)) / (||yT||_p' + sum ||f(k,0,0)||_p' dt).
AprioriBackwardReport apriori_backward_check(const BackwardPath &path, const Driver &driver,
                                             const CliffordElement &yT, double p_prime = 2.0);

}  // namespace qf

#endif
