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

#include "qfermion/element_operator.hpp"

#include <stdexcept>
#include <string>

namespace qf {

struct ElementOperator::Node {
    Kind kind = Kind::GradeAffine;
    int n = 0;
    cplx alpha = 0.0;
    cplx beta = 0.0;
    CliffordElement element;
    Eigen::MatrixXcd matrix;
    std::vector<ElementOperator> children;
};

namespace {

void check_dense_n(int n) {
    if (n > kMaxDenseOperatorGenerators) {
        throw std::domain_error("dense operator needs n <= " + std::to_string(kMaxDenseOperatorGenerators) +
                                ", got " + std::to_string(n));
    }
}

Eigen::VectorXd grading_signs(int n) {
    check_dense_n(n);
    Eigen::VectorXd s(int64_t(1) << n);
    for (int64_t m = 0; m < s.size(); m++) {
        s[m] = (__builtin_popcountll(static_cast<uint64_t>(m)) & 1) ? -1.0 : 1.0;
    }
    return s;
}

}  // namespace

Eigen::VectorXcd to_vector(const CliffordElement &a) {
    check_dense_n(a.n());
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(int64_t(1) << a.n());
    for (const Term &t : a.terms()) {
        v[static_cast<int64_t>(t.mask.low64())] = t.amp;
    }
    return v;
}

CliffordElement from_vector(int n, const Eigen::VectorXcd &v) {
    std::vector<Term> terms;
    for (int64_t m = 0; m < v.size(); m++) {
        if (v[m] != cplx(0.0, 0.0)) {
            terms.push_back({Mask(static_cast<uint64_t>(m)), v[m]});
        }
    }
    return CliffordElement::from_terms(n, std::move(terms));
}

ElementOperator ElementOperator::grade_affine(int n, cplx alpha, cplx beta) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::GradeAffine;
    node->n = n;
    node->alpha = alpha;
    node->beta = beta;
    return ElementOperator(node);
}

ElementOperator ElementOperator::identity(int n) { return grade_affine(n, 1.0, 0.0); }
ElementOperator ElementOperator::zero(int n) { return grade_affine(n, 0.0, 0.0); }
ElementOperator ElementOperator::grading(int n) { return grade_affine(n, 0.0, 1.0); }
ElementOperator ElementOperator::scalar(int n, cplx c) { return grade_affine(n, c, 0.0); }

ElementOperator ElementOperator::left_mul(const CliffordElement &a) {
    if (a.is_scalar()) {
        return scalar(a.n(), vacuum(a));
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::LeftMul;
    node->n = a.n();
    node->element = a;
    return ElementOperator(node);
}

ElementOperator ElementOperator::right_mul(const CliffordElement &a) {
    if (a.is_scalar()) {
        return scalar(a.n(), vacuum(a));
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::RightMul;
    node->n = a.n();
    node->element = a;
    return ElementOperator(node);
}

ElementOperator ElementOperator::dense(int n, Eigen::MatrixXcd m) {
    check_dense_n(n);
    int64_t d = int64_t(1) << n;
    if (m.rows() != d || m.cols() != d) {
        throw std::invalid_argument("dense operator must be 2^n x 2^n");
    }
    auto node = std::make_shared<Node>();
    node->kind = Kind::Dense;
    node->n = n;
    node->matrix = std::move(m);
    return ElementOperator(node);
}

int ElementOperator::n() const { return node_ ? node_->n : 0; }

ElementOperator::Kind ElementOperator::kind() const {
    if (!node_) {
        throw std::logic_error("empty ElementOperator");
    }
    return node_->kind;
}

CliffordElement ElementOperator::apply(const CliffordElement &x) const {
    if (!node_) {
        throw std::logic_error("empty ElementOperator");
    }
    if (x.n() != node_->n) {
        throw std::invalid_argument("operator/element generator count mismatch");
    }
    const Node &nd = *node_;
    switch (nd.kind) {
        case Kind::GradeAffine: {
            if (nd.beta == cplx(0.0, 0.0)) {
                return nd.alpha * x;
            }
            return linear_ops(x, qf::grading(x), nd.alpha, nd.beta);
        }
        case Kind::Dense:
            return from_vector(nd.n, nd.matrix * to_vector(x));
        case Kind::LeftMul:
            return mul(nd.element, x);
        case Kind::RightMul:
            return mul(x, nd.element);
        case Kind::Scale:
            return nd.alpha * nd.children[0].apply(x);
        case Kind::Sum: {
            CliffordElement acc = CliffordElement::zero(nd.n);
            for (const auto &c : nd.children) {
                acc += c.apply(x);
            }
            return acc;
        }
        case Kind::Compose:
            return nd.children[0].apply(nd.children[1].apply(x));
    }
    throw std::logic_error("unreachable");
}

std::optional<std::pair<cplx, cplx>> ElementOperator::as_grade_affine() const {
    if (!node_) {
        return std::nullopt;
    }
    const Node &nd = *node_;
    switch (nd.kind) {
        case Kind::GradeAffine:
            return std::make_pair(nd.alpha, nd.beta);
        case Kind::Scale: {
            auto c = nd.children[0].as_grade_affine();
            if (!c) {
                return std::nullopt;
            }
            return std::make_pair(nd.alpha * c->first, nd.alpha * c->second);
        }
        case Kind::Sum: {
            std::pair<cplx, cplx> acc{0.0, 0.0};
            for (const auto &ch : nd.children) {
                auto c = ch.as_grade_affine();
                if (!c) {
                    return std::nullopt;
                }
                acc.first += c->first;
                acc.second += c->second;
            }
            return acc;
        }
        case Kind::Compose: {
            auto a = nd.children[0].as_grade_affine();
            auto b = nd.children[1].as_grade_affine();
            if (!a || !b) {
                return std::nullopt;
            }
            return std::make_pair(a->first * b->first + a->second * b->second,
                                  a->first * b->second + a->second * b->first);
        }
        default:
            return std::nullopt;
    }
}

Eigen::MatrixXcd ElementOperator::materialize() const {
    int nn = n();
    check_dense_n(nn);
    int64_t d = int64_t(1) << nn;
    if (node_->kind == Kind::Dense) {
        return node_->matrix;
    }
    if (auto ga = as_grade_affine()) {
        Eigen::VectorXd s = grading_signs(nn);
        Eigen::VectorXcd diag = ga->first * Eigen::VectorXcd::Ones(d) + ga->second * s.cast<cplx>();
        return diag.asDiagonal();
    }
    Eigen::MatrixXcd m(d, d);
    for (int64_t col = 0; col < d; col++) {
        m.col(col) = to_vector(apply(CliffordElement::monomial(nn, Mask(static_cast<uint64_t>(col)))));
    }
    return m;
}

ElementOperator operator+(const ElementOperator &a, const ElementOperator &b) {
    if (a.n() != b.n()) {
        throw std::invalid_argument("operator sum with mismatched generator counts");
    }
    auto ga = a.as_grade_affine();
    auto gb = b.as_grade_affine();
    if (ga && gb) {
        return ElementOperator::grade_affine(a.n(), ga->first + gb->first, ga->second + gb->second);
    }
    if (ga && ga->first == cplx(0.0, 0.0) && ga->second == cplx(0.0, 0.0)) {
        return b;
    }
    if (gb && gb->first == cplx(0.0, 0.0) && gb->second == cplx(0.0, 0.0)) {
        return a;
    }
    if (a.kind() == ElementOperator::Kind::Dense && b.kind() == ElementOperator::Kind::Dense) {
        return ElementOperator::dense(a.n(), a.node_->matrix + b.node_->matrix);
    }
    auto node = std::make_shared<ElementOperator::Node>();
    node->kind = ElementOperator::Kind::Sum;
    node->n = a.n();
    for (const ElementOperator *x : {&a, &b}) {
        if (x->kind() == ElementOperator::Kind::Sum) {
            for (const auto &c : x->node_->children) {
                node->children.push_back(c);
            }
        } else {
            node->children.push_back(*x);
        }
    }
    return ElementOperator(node);
}

ElementOperator operator-(const ElementOperator &a, const ElementOperator &b) { return a + (cplx(-1.0) * b); }

ElementOperator operator*(cplx c, const ElementOperator &a) {
    if (c == cplx(1.0, 0.0)) {
        return a;
    }
    if (c == cplx(0.0, 0.0)) {
        return ElementOperator::zero(a.n());
    }
    if (auto g = a.as_grade_affine()) {
        return ElementOperator::grade_affine(a.n(), c * g->first, c * g->second);
    }
    switch (a.kind()) {
        case ElementOperator::Kind::Dense:
            return ElementOperator::dense(a.n(), c * a.node_->matrix);
        case ElementOperator::Kind::LeftMul:
            return ElementOperator::left_mul(c * a.node_->element);
        case ElementOperator::Kind::RightMul:
            return ElementOperator::right_mul(c * a.node_->element);
        case ElementOperator::Kind::Scale:
            return (c * a.node_->alpha) * a.node_->children[0];
        default:
            break;
    }
    auto node = std::make_shared<ElementOperator::Node>();
    node->kind = ElementOperator::Kind::Scale;
    node->n = a.n();
    node->alpha = c;
    node->children.push_back(a);
    return ElementOperator(node);
}

ElementOperator compose(const ElementOperator &a, const ElementOperator &b) {
    if (a.n() != b.n()) {
        throw std::invalid_argument("operator composition with mismatched generator counts");
    }
    auto ga = a.as_grade_affine();
    auto gb = b.as_grade_affine();
    if (ga && gb) {
        return ElementOperator::grade_affine(a.n(), ga->first * gb->first + ga->second * gb->second,
                                             ga->first * gb->second + ga->second * gb->first);
    }
    if (ga && ga->second == cplx(0.0, 0.0)) {
        return ga->first * b;
    }
    if (gb && gb->second == cplx(0.0, 0.0)) {
        return gb->first * a;
    }
    bool dense_a = a.kind() == ElementOperator::Kind::Dense;
    bool dense_b = b.kind() == ElementOperator::Kind::Dense;
    if ((dense_a && (dense_b || gb)) || (dense_b && ga)) {
        return ElementOperator::dense(a.n(), a.materialize() * b.materialize());
    }
    if (a.kind() == ElementOperator::Kind::LeftMul && b.kind() == ElementOperator::Kind::LeftMul) {
        return ElementOperator::left_mul(mul(a.node_->element, b.node_->element));
    }
    if (a.kind() == ElementOperator::Kind::RightMul && b.kind() == ElementOperator::Kind::RightMul) {
        return ElementOperator::right_mul(mul(b.node_->element, a.node_->element));
    }
    auto node = std::make_shared<ElementOperator::Node>();
    node->kind = ElementOperator::Kind::Compose;
    node->n = a.n();
    node->children = {a, b};
    return ElementOperator(node);
}

ElementOperator op_adjoint(const ElementOperator &t) {
    const auto &nd = *t.node_;
    switch (nd.kind) {
        case ElementOperator::Kind::GradeAffine:
            return ElementOperator::grade_affine(nd.n, std::conj(nd.alpha), std::conj(nd.beta));
        case ElementOperator::Kind::Dense:
            return ElementOperator::dense(nd.n, nd.matrix.adjoint());
        case ElementOperator::Kind::LeftMul:
            // m((a x)^* y) = m(x^* a^* y).
            return ElementOperator::left_mul(adjoint(nd.element));
        case ElementOperator::Kind::RightMul:
            // m((x a)^* y) = m(a^* x^* y) = m(x^* y a^*) by traciality.
            return ElementOperator::right_mul(adjoint(nd.element));
        case ElementOperator::Kind::Scale:
            return std::conj(nd.alpha) * op_adjoint(nd.children[0]);
        case ElementOperator::Kind::Sum: {
            ElementOperator acc = ElementOperator::zero(nd.n);
            for (const auto &c : nd.children) {
                acc = acc + op_adjoint(c);
            }
            return acc;
        }
        case ElementOperator::Kind::Compose:
            return compose(op_adjoint(nd.children[1]), op_adjoint(nd.children[0]));
    }
    throw std::logic_error("unreachable");
}

ElementOperator grading_conjugate(const ElementOperator &t) {
    const auto &nd = *t.node_;
    switch (nd.kind) {
        case ElementOperator::Kind::GradeAffine:
            return t;
        case ElementOperator::Kind::Dense: {
            Eigen::VectorXd s = grading_signs(nd.n);
            return ElementOperator::dense(nd.n, s.asDiagonal() * nd.matrix * s.asDiagonal());
        }
        case ElementOperator::Kind::LeftMul:
            return ElementOperator::left_mul(grading(nd.element));
        case ElementOperator::Kind::RightMul:
            return ElementOperator::right_mul(grading(nd.element));
        case ElementOperator::Kind::Scale:
            return nd.alpha * grading_conjugate(nd.children[0]);
        case ElementOperator::Kind::Sum: {
            ElementOperator acc = ElementOperator::zero(nd.n);
            for (const auto &c : nd.children) {
                acc = acc + grading_conjugate(c);
            }
            return acc;
        }
        case ElementOperator::Kind::Compose:
            return compose(grading_conjugate(nd.children[0]), grading_conjugate(nd.children[1]));
    }
    throw std::logic_error("unreachable");
}

std::pair<ElementOperator, ElementOperator> op_grade_parts(const ElementOperator &t) {
    if (t.as_grade_affine()) {
        return {t, ElementOperator::zero(t.n())};
    }
    if (t.kind() == ElementOperator::Kind::LeftMul) {
        CliffordElement a = t.apply(identity(t.n()));
        return {ElementOperator::left_mul(even_part(a)), ElementOperator::left_mul(odd_part(a))};
    }
    if (t.kind() == ElementOperator::Kind::RightMul) {
        CliffordElement a = t.apply(identity(t.n()));
        return {ElementOperator::right_mul(even_part(a)), ElementOperator::right_mul(odd_part(a))};
    }
    ElementOperator c = grading_conjugate(t);
    return {cplx(0.5) * (t + c), cplx(0.5) * (t - c)};
}

double op_distance(const ElementOperator &a, const ElementOperator &b) {
    auto ga = a.as_grade_affine();
    auto gb = b.as_grade_affine();
    if (ga && gb) {
        // alpha I + beta Y is diagonal in the monomial basis with entries
        // alpha + beta (even) and alpha - beta (odd); n = 0 has no odd part.
        cplx da = ga->first - gb->first;
        cplx db = ga->second - gb->second;
        return a.n() == 0 ? std::abs(da + db) : std::max(std::abs(da + db), std::abs(da - db));
    }
    Eigen::MatrixXcd d = a.materialize() - b.materialize();
    return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

BilinearMap BilinearMap::zero(int n) {
    BilinearMap b;
    b.n = n;
    b.known_zero = true;
    b.rule = [n](const CliffordElement &, const CliffordElement &) { return CliffordElement::zero(n); };
    return b;
}

CliffordElement BilinearMap::operator()(const CliffordElement &v, const CliffordElement &w) const {
    if (known_zero || !rule) {
        return CliffordElement::zero(n);
    }
    return rule(v, w);
}

HessianForm HessianForm::zero(int n) { return HessianForm{ElementOperator::zero(n)}; }

HessianForm HessianForm::scaled_identity(int n, double c) { return HessianForm{ElementOperator::scalar(n, c)}; }

double HessianForm::operator()(const CliffordElement &v, const CliffordElement &w) const {
    return std::real(pairing(op.apply(v), w));
}

}  // namespace qf
