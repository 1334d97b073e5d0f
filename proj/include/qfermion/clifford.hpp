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

#ifndef QFERMION_CLIFFORD_HPP
#define QFERMION_CLIFFORD_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qf {

using cplx = std::complex<double>;

inline constexpr int kMaxGenerators = 256;

/// Subset of generators. Bit k set means gamma_k is a factor; factors are
/// multiplied in ascending index order. Ordering is numeric.
class Mask {
   public:
    static constexpr int kWords = kMaxGenerators / 64;

    constexpr Mask() = default;
    constexpr Mask(uint64_t low) : w_{low} {}

    constexpr uint64_t word(int i) const { return w_[i]; }
    constexpr uint64_t low64() const { return w_[0]; }
    /// True when no bit at or above 64 is set.
    constexpr bool fits64() const {
        for (int i = 1; i < kWords; i++) {
            if (w_[i] != 0) {
                return false;
            }
        }
        return true;
    }
    constexpr bool test(int k) const { return k >= 0 && k < kMaxGenerators && ((w_[k >> 6] >> (k & 63)) & 1); }
    constexpr explicit operator bool() const { return !(*this == Mask()); }

    constexpr Mask operator~() const {
        Mask r;
        for (int i = 0; i < kWords; i++) {
            r.w_[i] = ~w_[i];
        }
        return r;
    }
    constexpr Mask &operator&=(const Mask &o) {
        for (int i = 0; i < kWords; i++) {
            w_[i] &= o.w_[i];
        }
        return *this;
    }
    constexpr Mask &operator|=(const Mask &o) {
        for (int i = 0; i < kWords; i++) {
            w_[i] |= o.w_[i];
        }
        return *this;
    }
    constexpr Mask &operator^=(const Mask &o) {
        for (int i = 0; i < kWords; i++) {
            w_[i] ^= o.w_[i];
        }
        return *this;
    }
    constexpr Mask operator<<(int k) const {
        Mask r;
        if (k >= kMaxGenerators) {
            return r;
        }
        int ws = k >> 6;
        int bs = k & 63;
        for (int i = kWords - 1; i >= ws; i--) {
            uint64_t v = w_[i - ws] << bs;
            if (bs != 0 && i - ws - 1 >= 0) {
                v |= w_[i - ws - 1] >> (64 - bs);
            }
            r.w_[i] = v;
        }
        return r;
    }
    constexpr Mask operator>>(int k) const {
        Mask r;
        if (k >= kMaxGenerators) {
            return r;
        }
        int ws = k >> 6;
        int bs = k & 63;
        for (int i = 0; i + ws < kWords; i++) {
            uint64_t v = w_[i + ws] >> bs;
            if (bs != 0 && i + ws + 1 < kWords) {
                v |= w_[i + ws + 1] << (64 - bs);
            }
            r.w_[i] = v;
        }
        return r;
    }
    constexpr Mask &operator<<=(int k) { return *this = *this << k; }
    constexpr Mask &operator>>=(int k) { return *this = *this >> k; }

    friend constexpr Mask operator&(Mask a, const Mask &b) { return a &= b; }
    friend constexpr Mask operator|(Mask a, const Mask &b) { return a |= b; }
    friend constexpr Mask operator^(Mask a, const Mask &b) { return a ^= b; }
    friend constexpr bool operator==(const Mask &a, const Mask &b) {
        for (int i = 0; i < kWords; i++) {
            if (a.w_[i] != b.w_[i]) {
                return false;
            }
        }
        return true;
    }
    friend constexpr bool operator<(const Mask &a, const Mask &b) {
        for (int i = kWords - 1; i >= 0; i--) {
            if (a.w_[i] != b.w_[i]) {
                return a.w_[i] < b.w_[i];
            }
        }
        return false;
    }
    friend constexpr bool operator>(const Mask &a, const Mask &b) { return b < a; }
    friend constexpr bool operator<=(const Mask &a, const Mask &b) { return !(b < a); }
    friend constexpr bool operator>=(const Mask &a, const Mask &b) { return !(a < b); }

   private:
    uint64_t w_[kWords] = {};
};

/// Largest number of active generators for which spectral norms are computed.
inline constexpr int kMaxSpectralGenerators = 20;

inline Mask bit(int k) { return Mask(1) << k; }
/// Highest set bit plus one; 0 for the empty mask.
int bit_width(const Mask &m);
int popcount(Mask m);
/// Mask with bits 0..k-1 set.
Mask low_bits(int k);
std::string mask_to_string(Mask m);
Mask mask_from_string(const std::string &s);

struct Term {
    Mask mask;
    cplx amp;
};

/// Element of the complex Clifford algebra on n generators.
///
/// Terms are kept sorted by mask with exact zeros removed, so two equal
/// elements have identical term lists.
class CliffordElement {
   public:
    CliffordElement() = default;
    explicit CliffordElement(int n);

    static CliffordElement zero(int n);
    static CliffordElement scalar(int n, cplx value);
    static CliffordElement monomial(int n, Mask mask, cplx amp = 1.0);
    /// Sorts, merges duplicate masks and drops exact zeros.
    static CliffordElement from_terms(int n, std::vector<Term> terms);

    int n() const { return n_; }
    const std::vector<Term> &terms() const { return terms_; }
    size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    /// True iff the only monomial present is the identity.
    bool is_scalar() const;
    cplx coeff(Mask mask) const;
    /// Union of the masks of all terms.
    Mask support() const;
    /// Drops terms with |amp| <= threshold.
    CliffordElement pruned(double threshold) const;

    CliffordElement &operator+=(const CliffordElement &o);
    CliffordElement &operator-=(const CliffordElement &o);
    CliffordElement &operator*=(cplx c);

    bool operator==(const CliffordElement &o) const;

   private:
    int n_ = 0;
    std::vector<Term> terms_;
};

CliffordElement operator+(const CliffordElement &a, const CliffordElement &b);
CliffordElement operator-(const CliffordElement &a, const CliffordElement &b);
CliffordElement operator-(const CliffordElement &a);
CliffordElement operator*(const CliffordElement &a, const CliffordElement &b);
CliffordElement operator*(cplx c, const CliffordElement &a);
CliffordElement operator*(const CliffordElement &a, cplx c);

/// Sign of gamma_S gamma_T relative to gamma_{S xor T}.
int product_sign(Mask s, Mask t);
/// Sign picked up by gamma_S under product reversal.
int reversal_sign(Mask s);

CliffordElement generator(int n, int k);
CliffordElement identity(int n);
CliffordElement linear_ops(const CliffordElement &a, const CliffordElement &b, cplx alpha, cplx beta);
CliffordElement mul(const CliffordElement &a, const CliffordElement &b);
CliffordElement adjoint(const CliffordElement &a);
CliffordElement grading(const CliffordElement &a);
CliffordElement even_part(const CliffordElement &a);
CliffordElement odd_part(const CliffordElement &a);
cplx vacuum(const CliffordElement &a);
/// m(a^* b).
cplx pairing(const CliffordElement &a, const CliffordElement &b);
/// Projection onto the subalgebra generated by gamma_0..gamma_{k-1}.
CliffordElement cond_expect(const CliffordElement &a, int k);
/// True iff every term uses only generators with index < k.
bool in_filtration(const CliffordElement &a, int k);

/// sqrt(m(a^* a)); equals the L^2 norm.
double norm2(const CliffordElement &a);
double max_abs_coeff(const CliffordElement &a);
/// Largest coefficient magnitude of a - b.
double max_abs_diff(const CliffordElement &a, const CliffordElement &b);

struct MatrixRep {
    int n = 0;
    int dim = 0;
    Eigen::MatrixXcd mat;
};

/// Jordan-Wigner image in dimension 2^ceil(n/2).
MatrixRep jw_rep(const CliffordElement &a);
/// Image of a single monomial.
MatrixRep jw_rep_monomial(int n, Mask mask);

/// Noncommutative L^p norm under the vacuum. p may be +infinity.
double lp_norm(const CliffordElement &a, double p);
/// Conjugate exponent, 1 <-> infinity.
double conjugate_exponent(double p);

}  // namespace qf

#endif
