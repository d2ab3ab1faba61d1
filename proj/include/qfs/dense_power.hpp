// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Powers of a sparse form modulo a small r by repeated multiplication into a
/// dense array over the monomial basis of each intermediate degree.
///
/// Layout of degree-D coefficients: x_n is implied by homogeneity, x_{n-1}
/// runs contiguously, and the remaining prefix (a_1..a_{n-2}) selects a row
/// of length D - |prefix| + 1. Rows are stored in lex order of prefixes, so
/// the array has exactly C(D+n-1, n-1) cells.

#include <cstdint>
#include <limits>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/monomials.hpp"
#include "qfs/poly.hpp"

namespace qfs {

/// Largest prefix table (entries) power_mod_dense is willing to build.
inline constexpr std::uint64_t dense_prefix_limit = std::uint64_t{1} << 24;
/// Largest coefficient array (cells) power_mod_dense is willing to build.
inline constexpr std::uint64_t dense_cell_limit = std::uint64_t{1} << 28;

namespace detail {

/// Row offsets for one degree. Prefix tuples are addressed in a box of side
/// (cap+1), where cap is the final degree, so one indexing works for every
/// intermediate degree.
struct DenseShape {
    unsigned nvars;
    std::uint64_t degree;
    std::uint64_t side;                 // cap + 1
    std::vector<std::uint64_t> offset;  // by box index of the prefix; only valid prefixes set
    std::vector<std::uint64_t> order;   // box indices of valid prefixes, lex order
    std::vector<std::uint32_t> sums;    // prefix sums, parallel to order
    std::uint64_t cells = 0;

    DenseShape(unsigned n, std::uint64_t d, std::uint64_t cap) : nvars(n), degree(d), side(cap + 1) {
        const unsigned k = n >= 2 ? n - 2 : 0;
        std::uint64_t box = 1;
        for (unsigned i = 0; i < k; ++i) box *= side;
        offset.assign(box, 0);
        std::vector<std::uint32_t> a(k, 0);
        walk(a, 0, 0, 0);
    }

    [[nodiscard]] std::uint64_t row_length(std::uint32_t sum) const noexcept { return degree - sum + 1; }

private:
    void walk(std::vector<std::uint32_t>& a, unsigned pos, std::uint64_t sum, std::uint64_t index) {
        if (pos == a.size()) {
            offset[index] = cells;
            order.push_back(index);
            sums.push_back(static_cast<std::uint32_t>(sum));
            cells += degree - sum + 1;
            return;
        }
        for (std::uint64_t e = 0; sum + e <= degree; ++e) {
            a[pos] = static_cast<std::uint32_t>(e);
            walk(a, pos + 1, sum + e, index * side + e);
        }
    }
};

}  // namespace detail

/// Whether power_mod_dense can handle f^k mod r within its size limits.
[[nodiscard]] inline bool dense_power_feasible(unsigned nvars, std::uint64_t degree, std::uint64_t k, std::uint64_t r) {
    if (nvars < 2 || r < 2 || r >= (std::uint64_t{1} << 16)) return false;
    const std::uint64_t top = degree * k;
    std::uint64_t box = 1;
    for (unsigned i = 0; i + 2 < nvars; ++i) {
        if (box > dense_prefix_limit / (top + 1)) return false;
        box *= top + 1;
    }
    BigInt cells = binomial_big(top + nvars - 1, nvars - 1);
    return cells <= dense_cell_limit;
}

/// (lift f)^k mod r, where the lift takes the stored representatives.
/// Needs r < 2^16 so that accumulation fits 32-bit cells.
[[nodiscard]] inline ModPoly power_mod_dense(const ModPoly& f, std::uint64_t k, std::uint64_t r) {
    const Layout& layout = f.layout();
    const unsigned n = f.nvars();
    const std::uint64_t h = f.degree();
    if (r < 2 || r >= (std::uint64_t{1} << 16)) throw DomainError("dense powering needs 2 <= r < 2^16");
    if (n < 2) throw DomainError("dense powering needs at least two variables");
    if (h * k > layout.field_max()) throw DomainError("power exponents overflow the field width");
    if (!dense_power_feasible(n, h, k, r)) throw DomainError("dense powering table too large");
    const ResidueRing ring{r};
    if (k == 0) return constant(ring, layout, std::uint64_t{1});
    if (f.is_zero()) return ModPoly(ring, layout, h * k);

    const std::uint64_t cap = h * k;
    const unsigned pre = n - 2;
    struct Factor {
        std::uint32_t coeff;
        std::uint64_t prefix_index;  // box index of the prefix shift
        std::uint32_t prefix_sum;
        std::uint32_t contiguous;    // exponent of x_{n-1}
    };
    std::vector<Factor> factors;
    for (const auto& t : f.terms()) {
        const auto e = layout.unpack(t.exps);
        Factor fac{static_cast<std::uint32_t>(t.coeff % r), 0, 0, e[n - 2]};
        for (unsigned i = 0; i < pre; ++i) {
            fac.prefix_index = fac.prefix_index * (cap + 1) + e[i];
            fac.prefix_sum += e[i];
        }
        if (fac.coeff != 0) factors.push_back(fac);
    }

    const std::uint32_t rr = static_cast<std::uint32_t>(r);
    const std::uint64_t limit = std::numeric_limits<std::uint32_t>::max();

    // start from f itself
    detail::DenseShape shape(n, h, cap);
    std::vector<std::uint32_t> cur(shape.cells, 0);
    for (const auto& fac : factors) {
        cur[shape.offset[fac.prefix_index] + fac.contiguous] = fac.coeff;
    }

    for (std::uint64_t step = 1; step < k; ++step) {
        detail::DenseShape next(n, shape.degree + h, cap);
        std::vector<std::uint32_t> out(next.cells, 0);
        std::uint64_t bound = 0;  // max possible cell value in out
        for (const auto& fac : factors) {
            const std::uint64_t add = std::uint64_t{fac.coeff} * (r - 1);
            if (bound + add > limit) {
                for (auto& x : out) x %= rr;
                bound = r - 1;
            }
            bound += add;
            const std::uint32_t c = fac.coeff;
            for (std::size_t row = 0; row < shape.order.size(); ++row) {
                const std::uint64_t src = shape.offset[shape.order[row]];
                const std::uint64_t len = shape.row_length(shape.sums[row]);
                const std::uint64_t dst = next.offset[shape.order[row] + fac.prefix_index] + fac.contiguous;
                const std::uint32_t* in = cur.data() + src;
                std::uint32_t* o = out.data() + dst;
                for (std::uint64_t j = 0; j < len; ++j) o[j] += c * in[j];
            }
        }
        for (auto& x : out) x %= rr;
        cur = std::move(out);
        shape = std::move(next);
    }

    // read back in lex order: prefix rows are lex-ordered and x_{n-1} ascends within a row
    std::vector<ModPoly::term_type> terms;
    std::vector<std::uint32_t> e(n, 0);
    std::vector<std::uint32_t> prefix(pre, 0);
    for (std::size_t row = 0; row < shape.order.size(); ++row) {
        std::uint64_t idx = shape.order[row];
        for (unsigned i = pre; i-- > 0;) {
            prefix[i] = static_cast<std::uint32_t>(idx % (cap + 1));
            idx /= cap + 1;
        }
        const std::uint64_t base = shape.offset[shape.order[row]];
        const std::uint64_t len = shape.row_length(shape.sums[row]);
        for (unsigned i = 0; i < pre; ++i) e[i] = prefix[i];
        for (std::uint64_t j = 0; j < len; ++j) {
            const std::uint32_t c = cur[base + j];
            if (c == 0) continue;
            e[n - 2] = static_cast<std::uint32_t>(j);
            e[n - 1] = static_cast<std::uint32_t>(shape.degree - shape.sums[row] - j);
            terms.push_back({c, layout.pack(e)});
        }
    }
    return ModPoly::from_sorted(ring, layout, shape.degree, std::move(terms));
}

}  // namespace qfs
