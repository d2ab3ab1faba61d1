// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Sparse homogeneous polynomials over Z and over Z/mZ, with schoolbook
/// multiplication, the Frobenius splitting u and the Fedder test.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/modarith.hpp"
#include "qfs/monomials.hpp"

namespace qfs {

/// Coefficients in Z (arbitrary precision).
struct IntegerRing {
    using value_type = BigInt;
    using accumulator = BigInt;

    [[nodiscard]] value_type normalize(value_type x) const { return x; }
    [[nodiscard]] static bool is_zero(const value_type& x) noexcept { return x.is_zero(); }
    [[nodiscard]] value_type add(const value_type& a, const value_type& b) const { return a + b; }
    [[nodiscard]] value_type mul(const value_type& a, const value_type& b) const { return a * b; }
    [[nodiscard]] value_type pow(const value_type& a, std::uint64_t k) const {
        return boost::multiprecision::pow(a, static_cast<unsigned>(k));
    }

    friend bool operator==(const IntegerRing&, const IntegerRing&) = default;
};

/// Coefficients in Z/mZ, 2 <= m < 2^32, stored as representatives in [0, m).
struct ResidueRing {
    using value_type = std::uint64_t;
    using accumulator = std::uint64_t;

    std::uint64_t modulus = 2;

    [[nodiscard]] value_type normalize(value_type x) const noexcept { return x % modulus; }
    [[nodiscard]] static bool is_zero(value_type x) noexcept { return x == 0; }
    [[nodiscard]] value_type add(value_type a, value_type b) const noexcept { return (a + b) % modulus; }
    [[nodiscard]] value_type mul(value_type a, value_type b) const noexcept { return a * b % modulus; }
    [[nodiscard]] value_type pow(value_type a, std::uint64_t k) const noexcept {
        value_type r = 1 % modulus;
        while (k != 0) {
            if (k & 1) r = mul(r, a);
            a = mul(a, a);
            k >>= 1;
        }
        return r;
    }

    friend bool operator==(const ResidueRing&, const ResidueRing&) = default;
};

template <class Coeff>
struct Term {
    Coeff coeff;
    ExponentTuple exps;

    friend bool operator==(const Term&, const Term&) = default;
};

/// Homogeneous polynomial stored as lex-sorted terms with nonzero coefficients.
///
/// The zero polynomial has no terms; its degree is whatever the caller
/// declared.
template <class Ring>
class SparsePoly {
public:
    using ring_type = Ring;
    using coeff_type = typename Ring::value_type;
    using term_type = Term<coeff_type>;

    SparsePoly(Ring ring, Layout layout, std::uint64_t degree) : ring_(ring), layout_(layout), degree_(degree) {}

    /// Normalizes: reduces coefficients, merges equal tuples, drops zeros and
    /// sorts. Throws DomainError if a term has the wrong total degree.
    SparsePoly(Ring ring, Layout layout, std::uint64_t degree, std::vector<term_type> terms)
        : ring_(ring), layout_(layout), degree_(degree), terms_(std::move(terms)) {
        normalize();
    }

    [[nodiscard]] const Ring& ring() const noexcept { return ring_; }
    [[nodiscard]] const Layout& layout() const noexcept { return layout_; }
    [[nodiscard]] unsigned nvars() const noexcept { return layout_.nvars(); }
    [[nodiscard]] std::uint64_t degree() const noexcept { return degree_; }
    [[nodiscard]] std::span<const term_type> terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    [[nodiscard]] coeff_type coefficient(ExponentTuple t) const {
        const auto it = std::lower_bound(terms_.begin(), terms_.end(), t,
                                         [](const term_type& a, ExponentTuple b) { return a.exps < b; });
        if (it != terms_.end() && it->exps == t) return it->coeff;
        return coeff_type{0};
    }

    /// Largest single exponent over all terms.
    [[nodiscard]] std::uint32_t max_exponent() const noexcept {
        std::uint32_t m = 0;
        for (const auto& t : terms_) m = std::max(m, layout_.max_field(t.exps));
        return m;
    }

    /// Wraps terms already sorted, merged, nonzero and homogeneous.
    static SparsePoly from_sorted(Ring ring, Layout layout, std::uint64_t degree, std::vector<term_type> terms) {
        SparsePoly out(ring, layout, degree);
        out.terms_ = std::move(terms);
        return out;
    }

    friend bool operator==(const SparsePoly& a, const SparsePoly& b) {
        return a.ring_ == b.ring_ && a.layout_ == b.layout_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
    }

private:
    void normalize() {
        for (auto& t : terms_) {
            t.coeff = ring_.normalize(std::move(t.coeff));
            if (layout_.sum(t.exps) != degree_) {
                throw DomainError("term of degree " + std::to_string(layout_.sum(t.exps)) +
                                  " in a polynomial declared homogeneous of degree " + std::to_string(degree_));
            }
        }
        std::sort(terms_.begin(), terms_.end(), [](const term_type& a, const term_type& b) { return a.exps < b.exps; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < terms_.size();) {
            term_type acc = std::move(terms_[i]);
            std::size_t j = i + 1;
            for (; j < terms_.size() && terms_[j].exps == acc.exps; ++j) acc.coeff = ring_.add(acc.coeff, terms_[j].coeff);
            if (!Ring::is_zero(acc.coeff)) terms_[out++] = std::move(acc);
            i = j;
        }
        terms_.resize(out);
    }

    Ring ring_;
    Layout layout_;
    std::uint64_t degree_;
    std::vector<term_type> terms_;
};

using IntPoly = SparsePoly<IntegerRing>;
using ModPoly = SparsePoly<ResidueRing>;
/// A ModPoly whose modulus is prime.
using FpPoly = ModPoly;

[[nodiscard]] inline ResidueRing prime_field(std::uint64_t p) {
    if (!is_prime(p) || p >= (std::uint64_t{1} << 31)) throw DomainError("characteristic must be a prime below 2^31");
    return ResidueRing{p};
}

/// Same polynomial repacked into another layout with the same variable count.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> relayout(const SparsePoly<Ring>& f, const Layout& layout) {
    if (layout.nvars() != f.nvars()) throw DomainError("relayout cannot change the variable count");
    if (layout == f.layout()) return f;
    std::vector<typename SparsePoly<Ring>::term_type> terms;
    terms.reserve(f.size());
    for (const auto& t : f.terms()) {
        const auto e = f.layout().unpack(t.exps);
        terms.push_back({t.coeff, layout.pack(std::span(e.data(), f.nvars()))});
    }
    return SparsePoly<Ring>::from_sorted(f.ring(), layout, f.degree(), std::move(terms));
}

/// Representatives in {0, ..., p-1}, viewed in Z.
[[nodiscard]] inline IntPoly lift_to_integers(const ModPoly& f) {
    std::vector<IntPoly::term_type> terms;
    terms.reserve(f.size());
    for (const auto& t : f.terms()) terms.push_back({BigInt(t.coeff), t.exps});
    return IntPoly::from_sorted(IntegerRing{}, f.layout(), f.degree(), std::move(terms));
}

/// Coefficients reduced into Z/mZ.
[[nodiscard]] inline ModPoly reduce_coefficients(const IntPoly& f, std::uint64_t m) {
    std::vector<ModPoly::term_type> terms;
    terms.reserve(f.size());
    for (const auto& t : f.terms()) {
        BigInt r = t.coeff % m;
        if (r < 0) r += m;
        terms.push_back({static_cast<std::uint64_t>(r), t.exps});
    }
    return ModPoly(ResidueRing{m}, f.layout(), f.degree(), std::move(terms));
}

/// Same residues viewed modulo a different modulus (for example p -> p^2).
[[nodiscard]] inline ModPoly change_modulus(const ModPoly& f, std::uint64_t m) {
    std::vector<ModPoly::term_type> terms(f.terms().begin(), f.terms().end());
    return ModPoly(ResidueRing{m}, f.layout(), f.degree(), std::move(terms));
}

namespace detail {

inline constexpr std::size_t dense_accumulator_limit = std::size_t{1} << 22;

/// Position of a homogeneous tuple in a box of side `stride` after dropping
/// the last variable; the first variable is least significant.
inline std::uint64_t box_position(ExponentTuple t, const Layout& layout, std::uint64_t stride) noexcept {
    std::uint64_t pos = 0;
    for (unsigned i = layout.nvars() - 1; i-- > 0;) pos = pos * stride + layout.field(t, i);
    return pos;
}

inline std::uint64_t checked_box_size(unsigned nvars, std::uint64_t stride) {
    std::uint64_t size = 1;
    for (unsigned i = 0; i + 1 < nvars; ++i) {
        if (size > std::numeric_limits<std::uint64_t>::max() / stride) return std::numeric_limits<std::uint64_t>::max();
        size *= stride;
    }
    return size;
}

template <class Ring>
struct Accumulation {
    Ring ring;
    bool lazy = false;  // residue sums reduced only at the end

    void fma(typename Ring::accumulator& acc, const typename Ring::value_type& a,
             const typename Ring::value_type& b) const {
        if constexpr (std::is_same_v<Ring, ResidueRing>) {
            acc = lazy ? acc + a * b : (acc + a * b) % ring.modulus;
        } else {
            acc += a * b;
        }
    }

    [[nodiscard]] typename Ring::value_type finish(typename Ring::accumulator acc) const {
        return ring.normalize(std::move(acc));
    }
};

}  // namespace detail

/// Exact product by expanding every pair of terms.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> schoolbook_mul(const SparsePoly<Ring>& a, const SparsePoly<Ring>& b) {
    using Poly = SparsePoly<Ring>;
    if (!(a.ring() == b.ring())) throw DomainError("multiplying polynomials over different rings");
    if (!(a.layout() == b.layout())) throw DomainError("multiplying polynomials with different layouts");
    const Layout& layout = a.layout();
    const std::uint64_t degree = a.degree() + b.degree();
    if (a.is_zero() || b.is_zero()) return Poly(a.ring(), layout, degree);
    if (std::uint64_t{a.max_exponent()} + b.max_exponent() > layout.field_max()) {
        throw DomainError("product exponents overflow the field width");
    }

    detail::Accumulation<Ring> acc{a.ring()};
    if constexpr (std::is_same_v<Ring, ResidueRing>) {
        const std::uint64_t sq = (a.ring().modulus - 1) * (a.ring().modulus - 1);
        const std::uint64_t ops = sq == 0 ? std::numeric_limits<std::uint64_t>::max()
                                          : std::numeric_limits<std::uint64_t>::max() / sq - 1;
        acc.lazy = std::min(a.size(), b.size()) <= ops;
    }

    std::vector<typename Poly::term_type> terms;
    const std::uint64_t stride = degree + 1;
    const std::uint64_t box = detail::checked_box_size(layout.nvars(), stride);
    const std::size_t limit =
        std::is_same_v<Ring, ResidueRing> ? detail::dense_accumulator_limit : detail::dense_accumulator_limit / 8;
    if (box <= limit) {
        std::vector<typename Ring::accumulator> dense(box);
        std::vector<std::uint64_t> pa(a.size()), pb(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) pa[i] = detail::box_position(a.terms()[i].exps, layout, stride);
        for (std::size_t j = 0; j < b.size(); ++j) pb[j] = detail::box_position(b.terms()[j].exps, layout, stride);
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& ca = a.terms()[i].coeff;
            for (std::size_t j = 0; j < b.size(); ++j) acc.fma(dense[pa[i] + pb[j]], ca, b.terms()[j].coeff);
        }
        std::vector<std::uint32_t> e(layout.nvars());
        for (std::uint64_t pos = 0; pos < box; ++pos) {
            auto c = acc.finish(std::move(dense[pos]));
            if (Ring::is_zero(c)) continue;
            std::uint64_t rest = pos, used = 0;
            for (unsigned i = 0; i + 1 < layout.nvars(); ++i) {
                e[i] = static_cast<std::uint32_t>(rest % stride);
                used += e[i];
                rest /= stride;
            }
            e[layout.nvars() - 1] = static_cast<std::uint32_t>(degree - used);
            terms.push_back({std::move(c), layout.pack(e)});
        }
    } else {
        std::unordered_map<std::uint64_t, typename Ring::accumulator> sums;
        sums.reserve(std::min<std::size_t>(a.size() * b.size(), std::size_t{1} << 24));
        for (const auto& ta : a.terms()) {
            for (const auto& tb : b.terms()) acc.fma(sums[Layout::add(ta.exps, tb.exps).packed], ta.coeff, tb.coeff);
        }
        terms.reserve(sums.size());
        for (auto& [packed, s] : sums) {
            auto c = acc.finish(std::move(s));
            if (!Ring::is_zero(c)) terms.push_back({std::move(c), ExponentTuple{packed}});
        }
    }
    std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return x.exps < y.exps; });
    return Poly::from_sorted(a.ring(), layout, degree, std::move(terms));
}

/// The constant polynomial c as a degree-0 form.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> constant(const Ring& ring, const Layout& layout, typename Ring::value_type c) {
    std::vector<typename SparsePoly<Ring>::term_type> terms;
    terms.push_back({std::move(c), ExponentTuple{0}});
    return SparsePoly<Ring>(ring, layout, 0, std::move(terms));
}

/// f^k by square-and-multiply with schoolbook products.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> schoolbook_pow(const SparsePoly<Ring>& f, std::uint64_t k) {
    SparsePoly<Ring> result = constant(f.ring(), f.layout(), typename Ring::value_type{1});
    if (k == 0) return result;
    SparsePoly<Ring> base = f;
    bool first = true;
    while (true) {
        if (k & 1) {
            result = first ? base : schoolbook_mul(result, base);
            first = false;
        }
        k >>= 1;
        if (k == 0) break;
        base = schoolbook_mul(base, base);
    }
    return result;
}

/// f^k over F_p.
[[nodiscard]] inline FpPoly power_mod_p(const FpPoly& f, std::uint64_t k) { return schoolbook_pow(f, k); }

/// Projection onto the x_1^{p-1}...x_n^{p-1} summand followed by the p-th
/// root of exponents: terms with every exponent = p-1 mod p survive and map to
/// (e - (p-1)) / p. A polynomial of degree D goes to degree (D - n(p-1))/p; if
/// that is not a nonnegative integer nothing survives and the declared degree
/// of the zero result is 0.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> split_u(const SparsePoly<Ring>& f, std::uint32_t p) {
    const Layout& layout = f.layout();
    const std::uint64_t shift = std::uint64_t{layout.nvars()} * (p - 1);
    if (f.degree() < shift || (f.degree() - shift) % p != 0) return SparsePoly<Ring>(f.ring(), layout, 0);
    const std::uint64_t degree = (f.degree() - shift) / p;
    const ExponentTuple target = layout.uniform(p - 1);
    std::vector<typename SparsePoly<Ring>::term_type> terms;
    for (const auto& t : f.terms()) {
        if (layout.reduce_mod(t.exps, p) == target) terms.push_back({t.coeff, layout.divide(t.exps, p)});
    }
    // floor division preserves lex order on the survivors
    return SparsePoly<Ring>::from_sorted(f.ring(), layout, degree, std::move(terms));
}

/// Fedder's test for g = f^{p-1} of degree n(p-1): g lies outside
/// (x_1^p, ..., x_n^p) iff the coefficient of x_1^{p-1}...x_n^{p-1} is nonzero.
[[nodiscard]] inline bool fedder_survives(const FpPoly& g, unsigned n, std::uint32_t p) {
    if (g.nvars() != n) throw DomainError("variable count mismatch in Fedder test");
    if (g.degree() != std::uint64_t{n} * (p - 1)) {
        throw DomainError("Fedder test expects degree n(p-1) = " + std::to_string(std::uint64_t{n} * (p - 1)));
    }
    return g.coefficient(g.layout().uniform(p - 1)) != 0;
}

/// Coordinates of a form in a monomial basis.
struct DenseVector {
    std::shared_ptr<const MonomialBasis> basis;
    std::vector<std::uint64_t> values;

    friend bool operator==(const DenseVector& a, const DenseVector& b) {
        return a.basis == b.basis && a.values == b.values;
    }
};

[[nodiscard]] inline DenseVector to_dense(const FpPoly& f, std::shared_ptr<const MonomialBasis> basis) {
    if (f.degree() != basis->degree()) throw DomainError("polynomial degree does not match basis degree");
    if (f.nvars() != basis->nvars()) throw DomainError("polynomial variable count does not match basis");
    DenseVector v{basis, std::vector<std::uint64_t>(basis->size(), 0)};
    const bool same = f.layout() == basis->layout();
    for (const auto& t : f.terms()) {
        ExponentTuple e = t.exps;
        if (!same) {
            const auto u = f.layout().unpack(t.exps);
            e = basis->layout().pack(std::span(u.data(), f.nvars()));
        }
        const std::size_t i = basis->index_of(e);
        if (i == MonomialBasis::npos) throw ArithmeticInvariantError("homogeneous term missing from basis");
        v.values[i] = t.coeff;
    }
    return v;
}

[[nodiscard]] inline FpPoly from_dense(const DenseVector& v, std::uint64_t p) {
    if (v.values.size() != v.basis->size()) throw DomainError("dense vector length does not match basis");
    std::vector<FpPoly::term_type> terms;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        const std::uint64_t c = v.values[i] % p;
        if (c != 0) terms.push_back({c, (*v.basis)[i]});
    }
    return FpPoly::from_sorted(ResidueRing{p}, v.basis->layout(), v.basis->degree(), std::move(terms));
}

}  // namespace qfs
