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

#include "qfermion/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qf {

int popcount(Mask m) {
    int c = 0;
    for (int i = 0; i < Mask::kWords; i++) {
        c += __builtin_popcountll(m.word(i));
    }
    return c;
}

int bit_width(const Mask &m) {
    for (int i = Mask::kWords - 1; i >= 0; i--) {
        if (m.word(i) != 0) {
            return 64 * i + 64 - __builtin_clzll(m.word(i));
        }
    }
    return 0;
}

Mask low_bits(int k) {
    if (k <= 0) {
        return 0;
    }
    if (k >= kMaxGenerators) {
        return ~Mask(0);
    }
    return ~(~Mask(0) << k);
}

namespace {

// Little-endian 32-bit limbs keep the decimal conversion in 64-bit arithmetic.
constexpr int kLimbs = 2 * Mask::kWords;

void to_limbs(const Mask &m, uint32_t *limbs) {
    for (int i = 0; i < Mask::kWords; i++) {
        limbs[2 * i] = static_cast<uint32_t>(m.word(i));
        limbs[2 * i + 1] = static_cast<uint32_t>(m.word(i) >> 32);
    }
}

Mask from_limbs(const uint32_t *limbs) {
    Mask m;
    for (int i = kLimbs - 1; i >= 0; i--) {
        m = (m << 32) | Mask(limbs[i]);
    }
    return m;
}

}  // namespace

std::string mask_to_string(Mask m) {
    if (m == 0) {
        return "0";
    }
    uint32_t limbs[kLimbs];
    to_limbs(m, limbs);
    std::string out;
    for (;;) {
        bool any = false;
        uint64_t rem = 0;
        for (int i = kLimbs - 1; i >= 0; i--) {
            uint64_t cur = (rem << 32) | limbs[i];
            limbs[i] = static_cast<uint32_t>(cur / 10);
            rem = cur % 10;
            any = any || limbs[i] != 0;
        }
        out.push_back(static_cast<char>('0' + rem));
        if (!any) {
            break;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Mask mask_from_string(const std::string &s) {
    if (s.empty()) {
        throw std::invalid_argument("empty mask string");
    }
    uint32_t limbs[kLimbs] = {};
    for (char c : s) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("mask string is not a decimal integer: " + s);
        }
        uint64_t carry = static_cast<uint64_t>(c - '0');
        for (int i = 0; i < kLimbs; i++) {
            uint64_t cur = static_cast<uint64_t>(limbs[i]) * 10 + carry;
            limbs[i] = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry != 0) {
            throw std::invalid_argument("mask string overflows " + std::to_string(kMaxGenerators) + " bits: " + s);
        }
    }
    return from_limbs(limbs);
}

namespace {

void check_n(int n) {
    if (n < 0 || n > kMaxGenerators) {
        throw std::invalid_argument("generator count out of range: " + std::to_string(n));
    }
}

void check_same_n(const CliffordElement &a, const CliffordElement &b) {
    if (a.n() != b.n()) {
        throw std::invalid_argument("mismatched generator counts: " + std::to_string(a.n()) + " vs " +
                                    std::to_string(b.n()));
    }
}

// Bit t of the result is the parity of the bits of s strictly above t.
Mask suffix_parity(Mask s) {
    Mask z = s >> 1;
    z ^= z >> 1;
    z ^= z >> 2;
    z ^= z >> 4;
    z ^= z >> 8;
    z ^= z >> 16;
    z ^= z >> 32;
    z ^= z >> 64;
    z ^= z >> 128;
    return z;
}

std::vector<Term> merge_sorted(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(), [](const Term &x, const Term &y) { return x.mask < y.mask; });
    std::vector<Term> out;
    out.reserve(terms.size());
    for (const Term &t : terms) {
        if (!out.empty() && out.back().mask == t.mask) {
            out.back().amp += t.amp;
        } else {
            out.push_back(t);
        }
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term &t) { return t.amp == cplx(0.0, 0.0); }),
              out.end());
    return out;
}

// Dense accumulation is used when the full basis is small.
constexpr int kDenseAccumulateLimit = 16;

}  // namespace

CliffordElement::CliffordElement(int n) : n_(n) { check_n(n); }

CliffordElement CliffordElement::zero(int n) { return CliffordElement(n); }

CliffordElement CliffordElement::scalar(int n, cplx value) { return monomial(n, 0, value); }

CliffordElement CliffordElement::monomial(int n, Mask mask, cplx amp) {
    CliffordElement e(n);
    if ((mask & ~low_bits(n)) != 0) {
        throw std::invalid_argument("monomial mask uses a generator outside 0.." + std::to_string(n - 1));
    }
    if (amp != cplx(0.0, 0.0)) {
        e.terms_.push_back({mask, amp});
    }
    return e;
}

CliffordElement CliffordElement::from_terms(int n, std::vector<Term> terms) {
    CliffordElement e(n);
    Mask allowed = low_bits(n);
    for (const Term &t : terms) {
        if ((t.mask & ~allowed) != 0) {
            throw std::invalid_argument("term mask uses a generator outside 0.." + std::to_string(n - 1));
        }
    }
    e.terms_ = merge_sorted(std::move(terms));
    return e;
}

bool CliffordElement::is_scalar() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mask == 0); }

cplx CliffordElement::coeff(Mask mask) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), mask,
                               [](const Term &t, Mask m) { return t.mask < m; });
    if (it != terms_.end() && it->mask == mask) {
        return it->amp;
    }
    return 0.0;
}

Mask CliffordElement::support() const {
    Mask m = 0;
    for (const Term &t : terms_) {
        m |= t.mask;
    }
    return m;
}

CliffordElement CliffordElement::pruned(double threshold) const {
    CliffordElement e(n_);
    for (const Term &t : terms_) {
        if (std::abs(t.amp) > threshold) {
            e.terms_.push_back(t);
        }
    }
    return e;
}

CliffordElement &CliffordElement::operator+=(const CliffordElement &o) {
    *this = linear_ops(*this, o, 1.0, 1.0);
    return *this;
}

CliffordElement &CliffordElement::operator-=(const CliffordElement &o) {
    *this = linear_ops(*this, o, 1.0, -1.0);
    return *this;
}

CliffordElement &CliffordElement::operator*=(cplx c) {
    if (c == cplx(0.0, 0.0)) {
        terms_.clear();
        return *this;
    }
    for (Term &t : terms_) {
        t.amp *= c;
    }
    terms_.erase(std::remove_if(terms_.begin(), terms_.end(), [](const Term &t) { return t.amp == cplx(0.0, 0.0); }),
                 terms_.end());
    return *this;
}

bool CliffordElement::operator==(const CliffordElement &o) const {
    if (n_ != o.n_ || terms_.size() != o.terms_.size()) {
        return false;
    }
    for (size_t i = 0; i < terms_.size(); i++) {
        if (terms_[i].mask != o.terms_[i].mask || terms_[i].amp != o.terms_[i].amp) {
            return false;
        }
    }
    return true;
}

CliffordElement operator+(const CliffordElement &a, const CliffordElement &b) { return linear_ops(a, b, 1.0, 1.0); }
CliffordElement operator-(const CliffordElement &a, const CliffordElement &b) { return linear_ops(a, b, 1.0, -1.0); }
CliffordElement operator-(const CliffordElement &a) {
    CliffordElement r = a;
    r *= -1.0;
    return r;
}
CliffordElement operator*(const CliffordElement &a, const CliffordElement &b) { return mul(a, b); }
CliffordElement operator*(cplx c, const CliffordElement &a) {
    CliffordElement r = a;
    r *= c;
    return r;
}
CliffordElement operator*(const CliffordElement &a, cplx c) { return c * a; }

int product_sign(Mask s, Mask t) { return (popcount(suffix_parity(s) & t) & 1) ? -1 : 1; }

int reversal_sign(Mask s) {
    int k = popcount(s);
    return ((k * (k - 1) / 2) & 1) ? -1 : 1;
}

CliffordElement generator(int n, int k) {
    if (k < 0 || k >= n) {
        throw std::out_of_range("generator index " + std::to_string(k) + " out of range for n=" + std::to_string(n));
    }
    return CliffordElement::monomial(n, bit(k));
}

CliffordElement identity(int n) { return CliffordElement::scalar(n, 1.0); }

CliffordElement linear_ops(const CliffordElement &a, const CliffordElement &b, cplx alpha, cplx beta) {
    check_same_n(a, b);
    std::vector<Term> out;
    out.reserve(a.size() + b.size());
    const auto &ta = a.terms();
    const auto &tb = b.terms();
    size_t i = 0;
    size_t j = 0;
    while (i < ta.size() || j < tb.size()) {
        Term t;
        if (j == tb.size() || (i < ta.size() && ta[i].mask < tb[j].mask)) {
            t = {ta[i].mask, alpha * ta[i].amp};
            i++;
        } else if (i == ta.size() || tb[j].mask < ta[i].mask) {
            t = {tb[j].mask, beta * tb[j].amp};
            j++;
        } else {
            t = {ta[i].mask, alpha * ta[i].amp + beta * tb[j].amp};
            i++;
            j++;
        }
        if (t.amp != cplx(0.0, 0.0)) {
            out.push_back(t);
        }
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

CliffordElement mul(const CliffordElement &a, const CliffordElement &b) {
    check_same_n(a, b);
    int n = a.n();
    if (a.is_zero() || b.is_zero()) {
        return CliffordElement::zero(n);
    }
    if (a.is_scalar()) {
        return a.terms()[0].amp * b;
    }
    if (b.is_scalar()) {
        return b.terms()[0].amp * a;
    }
    Mask used = a.support() | b.support();
    int top = bit_width(used);
    if (top <= kDenseAccumulateLimit) {
        std::vector<cplx> acc(size_t(1) << top, cplx(0.0, 0.0));
        std::vector<char> hit(acc.size(), 0);
        for (const Term &x : a.terms()) {
            Mask px = suffix_parity(x.mask);
            for (const Term &y : b.terms()) {
                size_t m = static_cast<size_t>((x.mask ^ y.mask).low64());
                cplx v = x.amp * y.amp;
                if (popcount(px & y.mask) & 1) {
                    acc[m] -= v;
                } else {
                    acc[m] += v;
                }
                hit[m] = 1;
            }
        }
        std::vector<Term> out;
        for (size_t m = 0; m < acc.size(); m++) {
            if (hit[m] && acc[m] != cplx(0.0, 0.0)) {
                out.push_back({Mask(m), acc[m]});
            }
        }
        return CliffordElement::from_terms(n, std::move(out));
    }
    std::vector<Term> out;
    out.reserve(a.size() * b.size());
    for (const Term &x : a.terms()) {
        Mask px = suffix_parity(x.mask);
        for (const Term &y : b.terms()) {
            cplx v = x.amp * y.amp;
            out.push_back({x.mask ^ y.mask, (popcount(px & y.mask) & 1) ? -v : v});
        }
    }
    return CliffordElement::from_terms(n, std::move(out));
}

CliffordElement adjoint(const CliffordElement &a) {
    std::vector<Term> out = a.terms();
    for (Term &t : out) {
        t.amp = std::conj(t.amp) * static_cast<double>(reversal_sign(t.mask));
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

CliffordElement grading(const CliffordElement &a) {
    std::vector<Term> out = a.terms();
    for (Term &t : out) {
        if (popcount(t.mask) & 1) {
            t.amp = -t.amp;
        }
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

CliffordElement even_part(const CliffordElement &a) {
    std::vector<Term> out;
    for (const Term &t : a.terms()) {
        if (!(popcount(t.mask) & 1)) {
            out.push_back(t);
        }
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

CliffordElement odd_part(const CliffordElement &a) {
    std::vector<Term> out;
    for (const Term &t : a.terms()) {
        if (popcount(t.mask) & 1) {
            out.push_back(t);
        }
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

cplx vacuum(const CliffordElement &a) { return a.coeff(0); }

cplx pairing(const CliffordElement &a, const CliffordElement &b) {
    check_same_n(a, b);
    // Monomials are orthonormal: m(gamma_S^* gamma_T) = delta_{ST}.
    cplx s = 0.0;
    const auto &ta = a.terms();
    const auto &tb = b.terms();
    size_t i = 0;
    size_t j = 0;
    while (i < ta.size() && j < tb.size()) {
        if (ta[i].mask < tb[j].mask) {
            i++;
        } else if (tb[j].mask < ta[i].mask) {
            j++;
        } else {
            s += std::conj(ta[i].amp) * tb[j].amp;
            i++;
            j++;
        }
    }
    return s;
}

CliffordElement cond_expect(const CliffordElement &a, int k) {
    if (k < 0 || k > a.n()) {
        throw std::out_of_range("filtration index " + std::to_string(k) + " out of range for n=" +
                                std::to_string(a.n()));
    }
    Mask forbidden = ~low_bits(k);
    std::vector<Term> out;
    for (const Term &t : a.terms()) {
        if ((t.mask & forbidden) == 0) {
            out.push_back(t);
        }
    }
    return CliffordElement::from_terms(a.n(), std::move(out));
}

bool in_filtration(const CliffordElement &a, int k) { return (a.support() & ~low_bits(k)) == 0; }

double norm2(const CliffordElement &a) {
    double s = 0.0;
    for (const Term &t : a.terms()) {
        s += std::norm(t.amp);
    }
    return std::sqrt(s);
}

double max_abs_coeff(const CliffordElement &a) {
    double m = 0.0;
    for (const Term &t : a.terms()) {
        m = std::max(m, std::abs(t.amp));
    }
    return m;
}

double max_abs_diff(const CliffordElement &a, const CliffordElement &b) { return max_abs_coeff(a - b); }

namespace {

// Signed Pauli string phase * X^x Z^z on q qubits; qubit j is bit q-1-j.
struct Pauli {
    uint64_t x = 0;
    uint64_t z = 0;
    int phase = 0;  // power of i
};

Pauli pauli_mul(const Pauli &a, const Pauli &b) {
    // Z^{z1} X^{x2} = (-1)^{|z1 & x2|} X^{x2} Z^{z1}.
    Pauli r;
    r.x = a.x ^ b.x;
    r.z = a.z ^ b.z;
    r.phase = (a.phase + b.phase + 2 * (__builtin_popcountll(a.z & b.x) & 1)) & 3;
    return r;
}

Pauli majorana(int q, int k) {
    int j = k / 2;
    uint64_t qb = uint64_t(1) << (q - 1 - j);
    Pauli p;
    for (int i = 0; i < j; i++) {
        p.z |= uint64_t(1) << (q - 1 - i);
    }
    p.x = qb;
    if (k % 2 == 1) {
        // Y = i X Z.
        p.z |= qb;
        p.phase = 1;
    }
    return p;
}

Pauli monomial_pauli(int n, Mask mask) {
    int q = (n + 1) / 2;
    Pauli p;
    for (int k = 0; k < n; k++) {
        if (mask.test(k)) {
            p = pauli_mul(p, majorana(q, k));
        }
    }
    return p;
}

const cplx kIPow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

void add_pauli(Eigen::MatrixXcd &m, const Pauli &p, cplx amp) {
    int64_t d = m.rows();
    cplx base = amp * kIPow[p.phase];
    for (int64_t col = 0; col < d; col++) {
        uint64_t b = static_cast<uint64_t>(col);
        cplx v = (__builtin_popcountll(p.z & b) & 1) ? -base : base;
        m(static_cast<int64_t>(b ^ p.x), col) += v;
    }
}

void check_jw_size(int n) {
    if (n > 2 * 12) {
        throw std::domain_error("Jordan-Wigner representation limited to 24 generators, got " + std::to_string(n));
    }
}

}  // namespace

MatrixRep jw_rep(const CliffordElement &a) {
    check_jw_size(a.n());
    MatrixRep r;
    r.n = a.n();
    r.dim = 1 << ((a.n() + 1) / 2);
    r.mat = Eigen::MatrixXcd::Zero(r.dim, r.dim);
    for (const Term &t : a.terms()) {
        add_pauli(r.mat, monomial_pauli(a.n(), t.mask), t.amp);
    }
    return r;
}

MatrixRep jw_rep_monomial(int n, Mask mask) { return jw_rep(CliffordElement::monomial(n, mask)); }

double conjugate_exponent(double p) {
    if (std::isinf(p)) {
        return 1.0;
    }
    if (p == 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    return p / (p - 1.0);
}

double lp_norm(const CliffordElement &a, double p) {
    if (!(p >= 1.0)) {
        throw std::invalid_argument("lp_norm requires p >= 1");
    }
    if (a.is_zero()) {
        return 0.0;
    }
    if (a.is_scalar()) {
        return std::abs(a.terms()[0].amp);
    }
    if (p == 2.0) {
        return norm2(a);
    }
    // The tracial distribution of |a| only depends on the subalgebra the
    // element lives in, so relabel the active generators contiguously.
    Mask sup = a.support();
    int m = popcount(sup);
    if (m > kMaxSpectralGenerators) {
        throw std::domain_error("lp_norm for p != 2 needs at most " + std::to_string(kMaxSpectralGenerators) +
                                " active generators, got " + std::to_string(m));
    }
    std::vector<int> relabel(kMaxGenerators, -1);
    int next = 0;
    for (int k = 0; k < kMaxGenerators; k++) {
        if (sup.test(k)) {
            relabel[k] = next++;
        }
    }
    std::vector<Term> compact;
    compact.reserve(a.size());
    for (const Term &t : a.terms()) {
        Mask c = 0;
        for (int k = 0; k < kMaxGenerators; k++) {
            if (t.mask.test(k)) {
                c |= bit(relabel[k]);
            }
        }
        compact.push_back({c, t.amp});
    }
    MatrixRep r = jw_rep(CliffordElement::from_terms(m, std::move(compact)));
    Eigen::VectorXd s;
    if (r.dim <= 64) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.mat);
        s = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(r.mat);
        s = svd.singularValues();
    }
    if (std::isinf(p)) {
        return s.maxCoeff();
    }
    double acc = 0.0;
    for (int i = 0; i < s.size(); i++) {
        acc += std::pow(s[i], p);
    }
    return std::pow(acc / r.dim, 1.0 / p);
}

}  // namespace qf
