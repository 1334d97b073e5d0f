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

#ifndef QFERMION_CATALOG_HPP
#define QFERMION_CATALOG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfermion/max_principle.hpp"

namespace qf {

/// Coefficients of the linear-quadratic family
///   D = AD x + BD u,  F = AF x + BF u,  G = AG x + BG u,
///   L = q ||x||_2^2 + r ||u||_2^2,  h = s ||x||_2^2.
struct LinearQuadraticData {
    ElementOperator AD, BD, AF, BF, AG, BG;
    double q = 0.0;
    double r = 0.0;
    double s = 0.0;
};

ControlProblem make_linear_quadratic(const std::string &id, const TimeGrid &grid, const LinearQuadraticData &data,
                                     const CliffordElement &x0, const ControlSpace &controls, double p = 2.0);

struct CatalogEntry {
    std::string id;
    std::string description;
    /// Parameter names with defaults.
    std::map<std::string, double> defaults;
    double default_T = 1.0;
    int default_n_steps = 8;
    std::vector<double> default_value_grid;
    bool p_term_active = false;
    /// Acceptance items the entry is used for.
    std::vector<int> criteria;
    /// The enumeration oracle contains the exact optimum at the defaults, so
    /// the maximum-principle check is asserted rather than only reported.
    bool oracle_exact = false;
};

const std::vector<CatalogEntry> &catalog();
const CatalogEntry *find_catalog_entry(const std::string &id);
std::vector<std::string> catalog_ids();

/// Builds a catalog problem; unknown parameter names throw.
ControlProblem build_catalog_problem(const std::string &id, const TimeGrid &grid,
                                     const std::map<std::string, double> &params = {},
                                     const std::optional<CliffordElement> &x0 = std::nullopt, double p = 2.0,
                                     const std::optional<std::vector<double>> &value_grid = std::nullopt);

}  // namespace qf

#endif
