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

#ifndef QFERMION_ITO_HPP
#define QFERMION_ITO_HPP

#include <utility>
#include <vector>

#include "qfermion/clifford.hpp"

namespace qf {

/// Uniform grid on [0, T]; step k owns generator k.
class TimeGrid {
   public:
    TimeGrid() = default;
    TimeGrid(double horizon, int n_steps);

    double T() const { return T_; }
    int n_steps() const { return n_; }
    double dt() const { return T_ / n_; }
    double t(int k) const { return k * dt(); }

    bool operator==(const TimeGrid &o) const { return T_ == o.T_ && n_ == o.n_; }

   private:
    double T_ = 1.0;
    int n_ = 1;
};

/// Values indexed by step. Integrands hold n values, state paths n + 1.
struct AdaptedProcess {
    TimeGrid grid;
    std::vector<CliffordElement> values;

    size_t size() const { return values.size(); }
    const CliffordElement &operator[](size_t k) const { return values[k]; }
};

/// M_0..M_n with M_k in C_k.
using MartingaleSeq = AdaptedProcess;

/// Throws std::invalid_argument naming the first step with values[k] outside C_k.
void require_adapted(const AdaptedProcess &f, const char *what);
bool is_adapted(const AdaptedProcess &f);

CliffordElement dW(const TimeGrid &g, int k);
CliffordElement brownian(const TimeGrid &g, int k);

/// Partial sums of f_k dW_k.
MartingaleSeq right_integral(const AdaptedProcess &f);
/// Partial sums of dW_k f_k.
MartingaleSeq left_integral(const AdaptedProcess &f);

/// max_k || E[M_{k+1} | C_k] - M_k ||_2.
double check_martingale(const AdaptedProcess &m);

/// Y_k = (M_{k+1} - M_k) dW_k / dt and the reconstruction residual.
std::pair<AdaptedProcess, double> mrep_extract(const MartingaleSeq &m);

/// Representation of increments without the martingale or scalar-start checks.
AdaptedProcess increment_representation(const MartingaleSeq &m);

struct BgRatios {
    double p = 2.0;
    /// (sum dt ||f_k||_p^2)^(1/2) / ||sum f_k dW_k||_p and its reciprocal.
    double right_lower = 0.0;
    double right_upper = 0.0;
    double left_lower = 0.0;
    double left_upper = 0.0;
    bool right_defined = false;
    bool left_defined = false;
};

BgRatios bg_ratios(const AdaptedProcess &f, double p);

/// Sum of commutator norms of dW_k with the even part and anticommutator norms
/// with the odd part of f_k, maximized over k.
double commutation_check(const AdaptedProcess &f);

}  // namespace qf

#endif
