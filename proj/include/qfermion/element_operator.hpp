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

#ifndef QFERMION_ELEMENT_OPERATOR_HPP
#define QFERMION_ELEMENT_OPERATOR_HPP

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "qfermion/clifford.hpp"

namespace qf {

/// Largest generator count for which operators are materialized densely.
inline constexpr int kMaxDenseOperatorGenerators = 12;

/// Linear map on Cl_n, either a dense 2^n x 2^n matrix over the monomial
/// basis (column index = mask) or a structured composite.
///
/// Structured constructors fold combinations of alpha*Id + beta*Grading into
/// a single node, so polynomials in the grading stay O(1) in size.
class ElementOperator {
   public:
    enum class Kind { GradeAffine, Dense, LeftMul, RightMul, Scale, Sum, Compose };

    ElementOperator() = default;

    static ElementOperator identity(int n);
    static ElementOperator zero(int n);
    static ElementOperator grading(int n);
    static ElementOperator scalar(int n, cplx c);
    /// alpha*Id + beta*Grading.
    static ElementOperator grade_affine(int n, cplx alpha, cplx beta);
    static ElementOperator left_mul(const CliffordElement &a);
    static ElementOperator right_mul(const CliffordElement &a);
    static ElementOperator dense(int n, Eigen::MatrixXcd m);

    int n() const;
    Kind kind() const;
    CliffordElement apply(const CliffordElement &x) const;
    CliffordElement operator()(const CliffordElement &x) const { return apply(x); }

    /// Coefficients (alpha, beta) when the operator is alpha*Id + beta*Grading.
    std::optional<std::pair<cplx, cplx>> as_grade_affine() const;
    Eigen::MatrixXcd materialize() const;

    friend ElementOperator operator+(const ElementOperator &a, const ElementOperator &b);
    friend ElementOperator operator-(const ElementOperator &a, const ElementOperator &b);
    friend ElementOperator operator*(cplx c, const ElementOperator &a);
    /// Composition a o b: b is applied first.
    friend ElementOperator compose(const ElementOperator &a, const ElementOperator &b);
    friend ElementOperator op_adjoint(const ElementOperator &t);
    friend ElementOperator grading_conjugate(const ElementOperator &t);

   private:
    struct Node;
    explicit ElementOperator(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

ElementOperator operator+(const ElementOperator &a, const ElementOperator &b);
ElementOperator operator-(const ElementOperator &a, const ElementOperator &b);
ElementOperator operator*(cplx c, const ElementOperator &a);
ElementOperator compose(const ElementOperator &a, const ElementOperator &b);
/// Adjoint with respect to the pairing; the conjugate transpose in the
/// monomial basis.
ElementOperator op_adjoint(const ElementOperator &t);
/// Grading o t o Grading.
ElementOperator grading_conjugate(const ElementOperator &t);
/// (T_e, T_o) with T_e = (T + Y T Y)/2 and T_o = (T - Y T Y)/2, Y the grading.
std::pair<ElementOperator, ElementOperator> op_grade_parts(const ElementOperator &t);

/// Max-entry distance between the dense forms of two operators.
double op_distance(const ElementOperator &a, const ElementOperator &b);

/// Bilinear map (v, w) -> element.
struct BilinearMap {
    int n = 0;
    std::function<CliffordElement(const CliffordElement &, const CliffordElement &)> rule;
    /// Set when the map is identically zero; lets callers skip evaluation.
    bool known_zero = false;

    static BilinearMap zero(int n);
    CliffordElement operator()(const CliffordElement &v, const CliffordElement &w) const;
};

/// Real bilinear form (v, w) -> Re <M v, w> given by a linear operator M.
struct HessianForm {
    ElementOperator op;

    static HessianForm zero(int n);
    static HessianForm scaled_identity(int n, double c);
    double operator()(const CliffordElement &v, const CliffordElement &w) const;
};

/// Coefficient-vector view used by dense operators.
Eigen::VectorXcd to_vector(const CliffordElement &a);
CliffordElement from_vector(int n, const Eigen::VectorXcd &v);

}  // namespace qf

#endif
