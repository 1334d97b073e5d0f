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

#ifndef QFERMION_FORWARD_HPP
#define QFERMION_FORWARD_HPP

#include <functional>
#include <utility>
#include <vector>

#include "qfermion/element_operator.hpp"
#include "qfermion/ito.hpp"

namespace qf {

using ElementFn = std::function<CliffordElement(int k, const CliffordElement &x, const CliffordElement &u)>;
using OperatorFn = std::function<ElementOperator(int k, const CliffordElement &x, const CliffordElement &u)>;
using BilinearFn = std::function<BilinearMap(int k, const CliffordElement &x, const CliffordElement &u)>;

/// Coefficients of dx = D dt + F dW + dW G with first and second derivatives in x.
struct Coefficients {
    ElementFn D, F, G;
    OperatorFn Dx, Fx, Gx;
    BilinearFn Dxx, Fxx, Gxx;
    double lipschitz_bound = 0.0;
};

enum class Coefficient { D, F, G };

/// Control subspace and the coefficient grid used for enumeration.
struct ControlSpace {
    std::vector<CliffordElement> basis;
    std::vector<double> value_grid;

    /// sum_i coeffs[i] * basis[i].
    CliffordElement make(const std::vector<double> &coeffs) const;
};

/// x_0..x_n.
using StatePath = AdaptedProcess;

/// Control equal to c for every step.
AdaptedProcess constant_control(const TimeGrid &g, const CliffordElement &c);

/// Support cap on forward states. Noise terms proportional to x double the
/// support every step, so such problems only run on short grids.
inline constexpr size_t kMaxStateTerms = size_t{1} << 22;

StatePath euler_forward(const Coefficients &coeffs, const CliffordElement &x0, const AdaptedProcess &u);

struct AprioriForwardReport {
    double p = 2.0;
    double sup_norm_sq = 0.0;
    double ratio = 0.0;
    bool finite = false;
};

/// sup_k ||x_k||_p^2 / (1 + ||x_0||_p^2).
AprioriForwardReport apriori_check(const StatePath &path, const CliffordElement &x0, double p = 2.0);

/// Whole-step index range [first, last) covered by [offset, offset + eps).
std::pair<int, int> spike_steps(const TimeGrid &g, double eps, double offset);

/// ubar off the spike set and u on it.
AdaptedProcess spike(const AdaptedProcess &ubar, const AdaptedProcess &u, double eps, double offset);

/// Central difference of the chosen coefficient along dir with h = 1e-5 (1 + ||x||_2).
CliffordElement numeric_frechet(const Coefficients &coeffs, Coefficient which, int k, const CliffordElement &x,
                                const CliffordElement &u, const CliffordElement &dir);

/// Second central difference, compared against the supplied second derivative.
CliffordElement numeric_second_frechet(const Coefficients &coeffs, Coefficient which, int k,
                                       const CliffordElement &x, const CliffordElement &u,
                                       const CliffordElement &dir);

}  // namespace qf

#endif
