// SPDX-License-Identifier: Apache-2.0
#pragma once

/// The multiply-then-split operator g -> u(Delta * g) from S_d to S_{d'},
/// built three ways: pairwise scan (TRIV), sorted sweep (MERGE) and direct
/// generation of matching monomials (WICS).

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/modmatrix.hpp"
#include "qfs/monomials.hpp"
#include "qfs/parallel.hpp"
#include "qfs/poly.hpp"

namespace qfs {

enum class MtsAlgorithm { triv, merge, wics };

[[nodiscard]] inline std::string_view to_string(MtsAlgorithm a) noexcept {
    switch (a) {
        case MtsAlgorithm::triv: return "triv";
        case MtsAlgorithm::merge: return "merge";
        case MtsAlgorithm::wics: return "wics";
    }
    return "?";
}

/// d' = (d + D - n(p-1)) / p, or nothing when that is not a nonnegative
/// integer (then no product survives u and the map is zero).
[[nodiscard]] inline std::optional<std::uint64_t> target_degree(std::uint64_t d, std::uint64_t big_d, unsigned n,
                                                                std::uint64_t p) {
    const std::uint64_t shift = std::uint64_t{n} * (p - 1);
    if (d + big_d < shift) return std::nullopt;
    const std::uint64_t num = d + big_d - shift;
    if (num % p != 0) return std::nullopt;
    return num / p;
}

/// Monomials of degree d whose product with delta survives u, lex-ascending:
/// m(delta mod p) + p * w for w in wics((d - |m(delta mod p)|) / p).
[[nodiscard]] inline std::vector<ExponentTuple> generate_matching(ExponentTuple delta, std::uint32_t p, std::uint64_t d,
                                                                  const Layout& layout) {
    const ExponentTuple base = match_complement(reduce_mod_p(delta, p, layout), p, layout);
    const std::uint64_t s = layout.sum(base);
    if (s > d || (d - s) % p != 0) return {};
    std::vector<ExponentTuple> out;
    for (const auto w : wics((d - s) / p, layout)) out.push_back(Layout::add(base, layout.scale(w, p)));
    return out;
}

/// Matrix of g -> u(Delta * g) in the lex bases of S_d (columns) and S_{d'} (rows).
struct MtsMatrix {
    ModMatrix matrix;
    std::shared_ptr<const MonomialBasis> source;
    std::shared_ptr<const MonomialBasis> target;

    [[nodiscard]] std::size_t rows() const noexcept { return matrix.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return matrix.cols(); }
    [[nodiscard]] std::uint64_t modulus() const noexcept { return matrix.modulus(); }

    friend bool operator==(const MtsMatrix& a, const MtsMatrix& b) { return a.matrix == b.matrix; }
};

struct MtsOptions {
    unsigned jobs = 1;
    /// Reuse a prebuilt source basis (must have degree d and Delta's layout).
    std::shared_ptr<const MonomialBasis> source_basis;
};

namespace detail {

struct MtsSetup {
    std::uint32_t p;
    std::uint64_t d;
    std::shared_ptr<const MonomialBasis> source;
    std::shared_ptr<const MonomialBasis> target;
};

inline std::optional<MtsSetup> mts_setup(const FpPoly& delta, std::uint64_t d, std::uint64_t p, const MtsOptions& opt) {
    if (delta.ring().modulus != p) throw DomainError("Delta is not over F_p for the requested p");
    const Layout& layout = delta.layout();
    if (delta.degree() + d > layout.field_max()) throw DomainError("exponent field too narrow for Delta * g");
    const auto dp = target_degree(d, delta.degree(), delta.nvars(), p);
    if (!dp) return std::nullopt;
    auto source = opt.source_basis;
    if (source && (source->degree() != d || !(source->layout() == layout))) {
        throw DomainError("supplied source basis does not match degree or layout");
    }
    if (!source) source = basis(d, layout);
    auto target = *dp == d ? source : basis(*dp, layout);
    return MtsSetup{static_cast<std::uint32_t>(p), d, std::move(source), std::move(target)};
}

inline void place(MtsMatrix& out, ExponentTuple delta, ExponentTuple m, std::size_t col, std::uint64_t coeff,
                  std::uint32_t p) {
    const Layout& layout = out.source->layout();
    const ExponentTuple image = Layout::add(layout.divide(delta, p), layout.divide(m, p));
    const std::size_t row = out.target->index_of(image);
    if (row == MonomialBasis::npos) throw ArithmeticInvariantError("split image missing from target basis");
    out.matrix.accumulate(row, col, coeff);
}

}  // namespace detail

/// TRIV: test every (delta term, basis monomial) pair.
[[nodiscard]] inline std::optional<MtsMatrix> mts_triv(const FpPoly& delta, std::uint64_t d, std::uint64_t p,
                                                       const MtsOptions& opt = {}) {
    const auto setup = detail::mts_setup(delta, d, p, opt);
    if (!setup) return std::nullopt;
    MtsMatrix out{ModMatrix(setup->target->size(), setup->source->size(), p), setup->source, setup->target};
    const Layout& layout = delta.layout();
    const ExponentTuple full = layout.uniform(setup->p - 1);
    // columns are disjoint across workers
    parallel_for(out.cols(), opt.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t col = begin; col < end; ++col) {
            const ExponentTuple m = (*out.source)[col];
            for (const auto& t : delta.terms()) {
                const ExponentTuple s = Layout::add(t.exps, m);
                if (layout.reduce_mod(s, setup->p) != full) continue;
                detail::place(out, t.exps, m, col, t.coeff, setup->p);
            }
        }
    });
    return out;
}

/// MERGE: sort residues of Delta and of B_d, then sweep Delta's residues
/// upward against B_d's downward, since matching reverses lex order.
[[nodiscard]] inline std::optional<MtsMatrix> mts_merge(const FpPoly& delta, std::uint64_t d, std::uint64_t p,
                                                        const MtsOptions& opt = {}) {
    const auto setup = detail::mts_setup(delta, d, p, opt);
    if (!setup) return std::nullopt;
    MtsMatrix out{ModMatrix(setup->target->size(), setup->source->size(), p), setup->source, setup->target};
    const Layout& layout = delta.layout();
    const std::uint32_t q = setup->p;
    const ExponentTuple full = layout.uniform(q - 1);

    const auto terms = delta.terms();
    std::vector<ExponentTuple> left(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) left[i] = layout.reduce_mod(terms[i].exps, q);
    std::vector<std::size_t> lperm(left.size());
    std::iota(lperm.begin(), lperm.end(), 0);
    std::stable_sort(lperm.begin(), lperm.end(), [&](auto a, auto b) { return left[a] < left[b]; });

    const auto& src = *out.source;
    std::vector<ExponentTuple> right(src.size());
    for (std::size_t j = 0; j < src.size(); ++j) right[j] = layout.reduce_mod(src[j], q);
    std::vector<std::size_t> rperm(right.size());
    std::iota(rperm.begin(), rperm.end(), 0);
    // descending
    std::stable_sort(rperm.begin(), rperm.end(), [&](auto a, auto b) { return right[b] < right[a]; });

    std::size_t i = 0, j = 0;
    while (i < lperm.size() && j < rperm.size()) {
        const ExponentTuple l = left[lperm[i]];
        const ExponentTuple want = Layout::sub(full, l);
        const ExponentTuple r = right[rperm[j]];
        if (want < r) {
            ++j;
        } else if (r < want) {
            ++i;
        } else {
            std::size_t i_end = i, j_end = j;
            while (i_end < lperm.size() && left[lperm[i_end]] == l) ++i_end;
            while (j_end < rperm.size() && right[rperm[j_end]] == r) ++j_end;
            for (std::size_t a = i; a < i_end; ++a) {
                const auto& t = terms[lperm[a]];
                for (std::size_t b = j; b < j_end; ++b) detail::place(out, t.exps, src[rperm[b]], rperm[b], t.coeff, q);
            }
            i = i_end;
            j = j_end;
        }
    }
    return out;
}

/// WICS: generate the matching monomials of each Delta term directly.
[[nodiscard]] inline std::optional<MtsMatrix> mts_wics(const FpPoly& delta, std::uint64_t d, std::uint64_t p,
                                                       const MtsOptions& opt = {}) {
    const auto setup = detail::mts_setup(delta, d, p, opt);
    if (!setup) return std::nullopt;
    MtsMatrix out{ModMatrix(setup->target->size(), setup->source->size(), p), setup->source, setup->target};
    const Layout& layout = delta.layout();
    const auto terms = delta.terms();
    // distinct delta terms never share an entry: row and column determine delta
    parallel_for(terms.size(), opt.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto& t = terms[k];
            for (const auto m : generate_matching(t.exps, setup->p, d, layout)) {
                const std::size_t col = out.source->index_of(m);
                if (col == MonomialBasis::npos) throw ArithmeticInvariantError("matching monomial missing from basis");
                detail::place(out, t.exps, m, col, t.coeff, setup->p);
            }
        }
    });
    return out;
}

[[nodiscard]] inline std::optional<MtsMatrix> build_mts(MtsAlgorithm alg, const FpPoly& delta, std::uint64_t d,
                                                        std::uint64_t p, const MtsOptions& opt = {}) {
    switch (alg) {
        case MtsAlgorithm::triv: return mts_triv(delta, d, p, opt);
        case MtsAlgorithm::merge: return mts_merge(delta, d, p, opt);
        case MtsAlgorithm::wics: return mts_wics(delta, d, p, opt);
    }
    throw DomainError("unknown matrix algorithm");
}

/// M * v on coordinate vectors.
[[nodiscard]] inline DenseVector matvec(const MtsMatrix& m, const DenseVector& v, const OverflowBudget& budget,
                                        std::uint64_t cadence = 0, unsigned jobs = 1) {
    if (v.basis->size() != m.cols() || v.basis->degree() != m.source->degree()) {
        throw DomainError("vector basis does not match matrix source basis");
    }
    return {m.target, matvec(m.matrix, v.values, budget, cadence, jobs)};
}

}  // namespace qfs
