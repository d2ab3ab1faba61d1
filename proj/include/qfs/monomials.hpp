// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Bitpacked exponent tuples, weak integer compositions and lex-ordered
/// monomial bases.
///
/// A tuple (e_1, ..., e_n) is packed into one 64-bit word with e_1 in the most
/// significant field. Unsigned comparison of the packed words is then lex
/// comparison of the tuples, and componentwise addition/subtraction without
/// field carry or borrow is plain word addition/subtraction. Componentwise
/// mod and div still need one operation per field.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/modarith.hpp"

namespace qfs {

inline constexpr unsigned max_vars = 8;

/// Packed exponent word. Meaningful only together with a Layout.
struct ExponentTuple {
    std::uint64_t packed = 0;

    friend constexpr auto operator<=>(ExponentTuple, ExponentTuple) = default;
};

using Exponents = std::array<std::uint32_t, max_vars>;

/// Field geometry shared by every tuple of one computation.
class Layout {
public:
    Layout(unsigned nvars, unsigned width) : nvars_(nvars), width_(width) {
        if (nvars == 0 || nvars > max_vars) throw DomainError("variable count must be in [1, 8]");
        if (width == 0 || width * nvars > 64 || width > 32) throw DomainError("field width does not fit a 64-bit word");
        mask_ = width == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
    }

    /// Narrowest layout whose fields hold max_exponent.
    static Layout for_max_exponent(unsigned nvars, std::uint64_t max_exponent) {
        const auto width = std::max(1u, static_cast<unsigned>(std::bit_width(max_exponent)));
        if (width * nvars > 64) throw DomainError("exponent " + std::to_string(max_exponent) + " overflows a packed word");
        return Layout(nvars, width);
    }

    [[nodiscard]] unsigned nvars() const noexcept { return nvars_; }
    [[nodiscard]] unsigned width() const noexcept { return width_; }
    [[nodiscard]] std::uint64_t field_max() const noexcept { return mask_; }

    [[nodiscard]] unsigned shift(unsigned i) const noexcept { return width_ * (nvars_ - 1 - i); }

    [[nodiscard]] std::uint32_t field(ExponentTuple t, unsigned i) const noexcept {
        return static_cast<std::uint32_t>((t.packed >> shift(i)) & mask_);
    }

    [[nodiscard]] ExponentTuple pack(std::span<const std::uint32_t> exps) const {
        if (exps.size() != nvars_) throw DomainError("exponent count does not match variable count");
        std::uint64_t w = 0;
        for (unsigned i = 0; i < nvars_; ++i) {
            if (exps[i] > mask_) throw DomainError("exponent " + std::to_string(exps[i]) + " overflows field width");
            w = (w << width_) | exps[i];
        }
        return {w};
    }

    [[nodiscard]] Exponents unpack(ExponentTuple t) const noexcept {
        Exponents e{};
        for (unsigned i = 0; i < nvars_; ++i) e[i] = field(t, i);
        return e;
    }

    [[nodiscard]] std::vector<std::uint32_t> unpack_vector(ExponentTuple t) const {
        const auto e = unpack(t);
        return {e.begin(), e.begin() + nvars_};
    }

    /// (v, v, ..., v).
    [[nodiscard]] ExponentTuple uniform(std::uint32_t v) const {
        if (v > mask_) throw DomainError("exponent overflows field width");
        std::uint64_t w = 0;
        for (unsigned i = 0; i < nvars_; ++i) w = (w << width_) | v;
        return {w};
    }

    [[nodiscard]] std::uint64_t sum(ExponentTuple t) const noexcept {
        std::uint64_t s = 0;
        for (unsigned i = 0; i < nvars_; ++i) s += field(t, i);
        return s;
    }

    [[nodiscard]] std::uint32_t max_field(ExponentTuple t) const noexcept {
        std::uint32_t m = 0;
        for (unsigned i = 0; i < nvars_; ++i) m = std::max(m, field(t, i));
        return m;
    }

    /// Word addition; caller guarantees no field overflows.
    [[nodiscard]] static ExponentTuple add(ExponentTuple a, ExponentTuple b) noexcept { return {a.packed + b.packed}; }
    /// Word subtraction; caller guarantees b <= a componentwise.
    [[nodiscard]] static ExponentTuple sub(ExponentTuple a, ExponentTuple b) noexcept { return {a.packed - b.packed}; }

    [[nodiscard]] bool divides(ExponentTuple b, ExponentTuple a) const noexcept {
        for (unsigned i = 0; i < nvars_; ++i) {
            if (field(b, i) > field(a, i)) return false;
        }
        return true;
    }

    [[nodiscard]] ExponentTuple checked_add(ExponentTuple a, ExponentTuple b) const {
        for (unsigned i = 0; i < nvars_; ++i) {
            if (std::uint64_t{field(a, i)} + field(b, i) > mask_) throw DomainError("exponent overflows field width");
        }
        return add(a, b);
    }

    /// Every field multiplied by k.
    [[nodiscard]] ExponentTuple scale(ExponentTuple t, std::uint64_t k) const {
        std::uint64_t w = 0;
        for (unsigned i = 0; i < nvars_; ++i) {
            const std::uint64_t e = std::uint64_t{field(t, i)} * k;
            if (e > mask_) throw DomainError("exponent overflows field width");
            w = (w << width_) | e;
        }
        return {w};
    }

    /// Every field reduced mod p.
    [[nodiscard]] ExponentTuple reduce_mod(ExponentTuple t, std::uint32_t p) const noexcept {
        std::uint64_t w = 0;
        for (unsigned i = 0; i < nvars_; ++i) w = (w << width_) | (field(t, i) % p);
        return {w};
    }

    /// Every field divided by p (floor).
    [[nodiscard]] ExponentTuple divide(ExponentTuple t, std::uint32_t p) const noexcept {
        std::uint64_t w = 0;
        for (unsigned i = 0; i < nvars_; ++i) w = (w << width_) | (field(t, i) / p);
        return {w};
    }

    friend bool operator==(const Layout&, const Layout&) = default;

private:
    unsigned nvars_;
    unsigned width_;
    std::uint64_t mask_;
};

[[nodiscard]] inline ExponentTuple reduce_mod_p(ExponentTuple t, std::uint32_t p, const Layout& layout) noexcept {
    return layout.reduce_mod(t, p);
}

/// The unique Y in {0..p-1}^n with X + Y = (p-1, ..., p-1).
[[nodiscard]] inline ExponentTuple match_complement(ExponentTuple x, std::uint32_t p, const Layout& layout) {
    for (unsigned i = 0; i < layout.nvars(); ++i) {
        if (layout.field(x, i) >= p) throw DomainError("match_complement needs every exponent below p");
    }
    return Layout::sub(layout.uniform(p - 1), x);
}

[[nodiscard]] inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    u128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) throw DomainError("binomial overflows 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

[[nodiscard]] inline BigInt binomial_big(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace detail {

template <class Fn>
void wics_descend(unsigned pos, std::uint64_t remaining, std::uint64_t prefix, const Layout& layout, Fn& fn) {
    const unsigned n = layout.nvars();
    if (pos + 1 == n) {
        fn(ExponentTuple{(prefix << layout.width()) | remaining});
        return;
    }
    for (std::uint64_t e = remaining + 1; e-- > 0;) {
        wics_descend(pos + 1, remaining - e, (prefix << layout.width()) | e, layout, fn);
    }
}

}  // namespace detail

/// Visits wics(k, n) in lex-descending order.
template <class Fn>
void for_each_wics_descending(std::uint64_t k, const Layout& layout, Fn&& fn) {
    if (k > layout.field_max()) throw DomainError("composition total " + std::to_string(k) + " overflows field width");
    detail::wics_descend(0, k, 0, layout, fn);
}

/// All weak compositions of k into layout.nvars() parts, lex-ascending.
[[nodiscard]] inline std::vector<ExponentTuple> wics(std::uint64_t k, const Layout& layout) {
    std::vector<ExponentTuple> out;
    out.reserve(binomial(k + layout.nvars() - 1, layout.nvars() - 1));
    for_each_wics_descending(k, layout, [&](ExponentTuple t) { out.push_back(t); });
    std::reverse(out.begin(), out.end());
    return out;
}

/// Open-addressing map from packed tuples to positions.
class TupleIndex {
public:
    static constexpr std::uint32_t absent = std::numeric_limits<std::uint32_t>::max();

    TupleIndex() = default;

    explicit TupleIndex(std::span<const ExponentTuple> tuples) {
        std::size_t cap = 16;
        while (cap < 2 * tuples.size()) cap <<= 1;
        bits_ = static_cast<unsigned>(std::countr_zero(cap));
        keys_.assign(cap, 0);
        values_.assign(cap, absent);
        for (std::size_t i = 0; i < tuples.size(); ++i) insert(tuples[i], static_cast<std::uint32_t>(i));
    }

    [[nodiscard]] std::uint32_t find(ExponentTuple t) const noexcept {
        if (values_.empty()) return absent;
        const std::size_t mask = values_.size() - 1;
        for (std::size_t s = slot(t);; s = (s + 1) & mask) {
            if (values_[s] == absent) return absent;
            if (keys_[s] == t.packed) return values_[s];
        }
    }

private:
    [[nodiscard]] std::size_t slot(ExponentTuple t) const noexcept {
        return static_cast<std::size_t>((t.packed * 0x9E3779B97F4A7C15ull) >> (64 - bits_));
    }

    void insert(ExponentTuple t, std::uint32_t v) {
        const std::size_t mask = values_.size() - 1;
        for (std::size_t s = slot(t);; s = (s + 1) & mask) {
            if (values_[s] == absent) {
                keys_[s] = t.packed;
                values_[s] = v;
                return;
            }
            if (keys_[s] == t.packed) throw DomainError("duplicate tuple in index");
        }
    }

    unsigned bits_ = 0;
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> values_;
};

/// Lex-ascending basis of homogeneous degree-d monomials in n variables.
class MonomialBasis {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    MonomialBasis(std::uint64_t degree, const Layout& layout)
        : degree_(degree), layout_(layout), tuples_(wics(degree, layout)), index_(tuples_) {}

    [[nodiscard]] std::uint64_t degree() const noexcept { return degree_; }
    [[nodiscard]] unsigned nvars() const noexcept { return layout_.nvars(); }
    [[nodiscard]] const Layout& layout() const noexcept { return layout_; }
    [[nodiscard]] std::size_t size() const noexcept { return tuples_.size(); }
    [[nodiscard]] std::span<const ExponentTuple> tuples() const noexcept { return tuples_; }
    [[nodiscard]] ExponentTuple operator[](std::size_t i) const noexcept { return tuples_[i]; }

    /// Position of t, or npos.
    [[nodiscard]] std::size_t index_of(ExponentTuple t) const noexcept {
        const auto v = index_.find(t);
        return v == TupleIndex::absent ? npos : v;
    }

    /// Same answer as index_of via binary search over the sorted words.
    [[nodiscard]] std::size_t index_of_sorted(ExponentTuple t) const noexcept {
        const auto it = std::lower_bound(tuples_.begin(), tuples_.end(), t);
        return it != tuples_.end() && *it == t ? static_cast<std::size_t>(it - tuples_.begin()) : npos;
    }

private:
    std::uint64_t degree_;
    Layout layout_;
    std::vector<ExponentTuple> tuples_;
    TupleIndex index_;
};

[[nodiscard]] inline std::shared_ptr<const MonomialBasis> basis(std::uint64_t degree, const Layout& layout) {
    return std::make_shared<const MonomialBasis>(degree, layout);
}

}  // namespace qfs
