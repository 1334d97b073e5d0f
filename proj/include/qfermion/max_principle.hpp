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

#ifndef QFERMION_MAX_PRINCIPLE_HPP
#define QFERMION_MAX_PRINCIPLE_HPP

#include <functional>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "qfermion/bqsde.hpp"
#include "qfermion/forward.hpp"

namespace qf {

using RunningFn = std::function<double(int k, const CliffordElement &x, const CliffordElement &u)>;
using RunningGradFn = std::function<CliffordElement(int k, const CliffordElement &x, const CliffordElement &u)>;
using RunningHessFn = std::function<HessianForm(int k, const CliffordElement &x, const CliffordElement &u)>;
using TerminalFn = std::function<double(const CliffordElement &x)>;
using TerminalGradFn = std::function<CliffordElement(const CliffordElement &x)>;
using TerminalHessFn = std::function<HessianForm(const CliffordElement &x)>;

/// Real-valued costs use the conventions
/// DL(x) v = Re <L_x, v> and D^2 L(x)(v, w) = Re <L_xx v, w>.
struct ControlProblem {
    std::string id;
    TimeGrid grid;
    Coefficients coeffs;
    RunningFn L;
    RunningGradFn Lx;
    RunningHessFn Lxx;
    TerminalFn h;
    TerminalGradFn hx;
    TerminalHessFn hxx;
    ControlSpace control_space;
    double p = 2.0;
    CliffordElement x0;
    /// True when F or G depend on the control.
    bool p_term_active = false;
};

double cost(const ControlProblem &problem, const AdaptedProcess &u);
double cost_of_path(const ControlProblem &problem, const StatePath &x, const AdaptedProcess &u);

/// Spike set in whole steps.
struct SpikeSet {
    int first = 0;
    int last = 0;
    bool contains(int k) const { return k >= first && k < last; }
    int steps() const { return last - first; }
};

SpikeSet make_spike_set(const TimeGrid &g, double eps, double offset);

/// First variation: dy = Dx y dt + (Fx y + dF chi) dW + dW (Gx y + dG chi), y(0) = 0.
StatePath solve_var_y(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                      const AdaptedProcess &u, double eps, double offset);

/// Second variation with the spike drift, the spike derivative terms and the
/// half second-derivative sources.
StatePath solve_var_z(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                      const AdaptedProcess &u, const StatePath &y, double eps, double offset);

enum class LadderStatus { Fitted, IdenticallyZero, Degenerate };

struct LadderSeries {
    std::string name;
    double target_slope = 0.0;
    std::vector<double> values;
    double slope = 0.0;
    LadderStatus status = LadderStatus::Degenerate;
};

struct LadderReport {
    double offset = 0.0;
    std::vector<double> eps_list;
    /// xi^2, y^2, z^2, eta^2, zeta^2 sup-norm squares.
    std::vector<LadderSeries> series;
    /// zeta ladder below the eta ladder at every eps.
    bool zeta_below_eta = true;
};

/// Squared values at or below this level are treated as exact zeros.
inline constexpr double kLadderZeroFloor = 1e-26;

/// Every eps must span at least min_steps grid steps.
LadderReport variation_ladder(const ControlProblem &problem, const AdaptedProcess &ubar, const AdaptedProcess &u,
                              const std::vector<double> &eps_list, double offset = 0.0, int min_steps = 4);

/// Least-squares slope of log(values) against log(eps).
double loglog_slope(const std::vector<double> &eps, const std::vector<double> &values);

struct AdjointPair {
    std::vector<CliffordElement> phi;
    std::vector<CliffordElement> Phi;
};

AdjointPair first_adjoint(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar);

/// <phi, D> + <Phi_e - Phi_o, F_e - F_o + G> - L.
cplx hamiltonian(const ControlProblem &problem, int k, const CliffordElement &x, const CliffordElement &u,
                 const CliffordElement &phi, const CliffordElement &Phi);

struct SecondAdjointPath {
    std::vector<ElementOperator> P;
    /// max_k distance between P_k and its adjoint before symmetrization.
    double max_asymmetry = 0.0;
};

/// Thrown when the second adjoint would need stochastic coefficient operators.
class StochasticCoefficientError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

SecondAdjointPath second_adjoint_deterministic(const ControlProblem &problem, const StatePath &xbar,
                                               const AdaptedProcess &ubar, const AdjointPair &adj);

/// Left-hand side of the necessary condition at step k for candidate u_cand.
/// P may be null only when dF and dG vanish or first_order_only is set.
double mp_lhs(const ControlProblem &problem, int k, const CliffordElement &u_cand, const StatePath &xbar,
              const AdaptedProcess &ubar, const AdjointPair &adj, const SecondAdjointPath *P,
              bool first_order_only = false);

struct DualityReport {
    cplx lhs_y = 0.0;
    cplx rhs_y = 0.0;
    double residual_y = 0.0;
    cplx lhs_yz = 0.0;
    cplx rhs_yz = 0.0;
    double residual_yz = 0.0;
};

DualityReport duality_check(const ControlProblem &problem, const StatePath &xbar, const AdaptedProcess &ubar,
                            const AdaptedProcess &u, double eps, double offset, const AdjointPair &adj);

/// Relative rounding floor below which a cost-expansion residual counts as zero.
inline constexpr double kCostRoundoff = 1e-13;

struct CostExpansionReport {
    double offset = 0.0;
    std::vector<double> eps_list;
    std::vector<double> residuals;
    double slope = 0.0;
    bool identically_zero = false;
};

CostExpansionReport cost_expansion_check(const ControlProblem &problem, const AdaptedProcess &ubar,
                                         const AdaptedProcess &u, const std::vector<double> &eps_list,
                                         double offset = 0.0);

struct BruteForceResult {
    AdaptedProcess control;
    double cost = 0.0;
    /// Coefficient per coarse block and basis element, block-major.
    std::vector<double> coarse_values;
    long long evaluated = 0;
};

inline constexpr long long kBruteForceBudget = 100000;

BruteForceResult brute_force_optimum(const ControlProblem &problem, int steps_coarse,
                                     const std::vector<double> &value_grid, int threads = 1);

/// Fine step k lies in coarse block k * steps_coarse / n_steps.
int coarse_block(int k, int n_steps, int steps_coarse);

}  // namespace qf

#endif
