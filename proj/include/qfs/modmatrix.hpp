// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Dense matrices over Z/pZ with delayed reduction.

#include <cassert>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/parallel.hpp"

namespace qfs {

/// How many products of entries in [0, N-1] can be summed into an
/// accumulator capped at element_cap before a reduction is forced:
/// o = floor(cap / (N-1)^2) - 1. The spare (N-1)^2 absorbs the residue
/// carried over from the previous reduction.
struct OverflowBudget {
    std::uint64_t element_cap;
    std::uint64_t entry_bound;
    std::uint64_t ops;
};

[[nodiscard]] inline OverflowBudget overflow_budget(std::uint64_t element_cap, std::uint64_t entry_bound) {
    if (entry_bound < 2) throw DomainError("entry bound must be at least 2");
    const unsigned __int128 sq = static_cast<unsigned __int128>(entry_bound - 1) * (entry_bound - 1);
    if (element_cap <= sq) throw DomainError("accumulator cap does not exceed (N-1)^2");
    const auto q = static_cast<std::uint64_t>(element_cap / sq);
    if (q < 2) throw DomainError("accumulator cap leaves no room for delayed reduction");
    return {element_cap, entry_bound, q - 1};
}

/// The budget for native 64-bit accumulators.
[[nodiscard]] inline OverflowBudget word_budget(std::uint64_t p) {
    return overflow_budget(std::numeric_limits<std::uint64_t>::max(), p);
}

/// Row-major matrix of residues mod p < 2^16.
class ModMatrix {
public:
    using entry_type = std::uint16_t;

    ModMatrix() = default;
    ModMatrix(std::size_t rows, std::size_t cols, std::uint64_t p) : rows_(rows), cols_(cols), p_(p) {
        if (p < 2 || p > std::numeric_limits<entry_type>::max()) throw DomainError("matrix modulus must lie in [2, 2^16)");
        data_.assign(rows * cols, 0);
    }

    static ModMatrix identity(std::size_t n, std::uint64_t p) {
        ModMatrix m(n, n, p);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::uint64_t modulus() const noexcept { return p_; }

    [[nodiscard]] std::uint64_t at(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, std::uint64_t v) noexcept {
        data_[i * cols_ + j] = static_cast<entry_type>(v % p_);
    }
    void accumulate(std::size_t i, std::size_t j, std::uint64_t v) noexcept {
        auto& e = data_[i * cols_ + j];
        e = static_cast<entry_type>((e + v % p_) % p_);
    }

    [[nodiscard]] std::span<const entry_type> row(std::size_t i) const noexcept {
        return std::span(data_).subspan(i * cols_, cols_);
    }
    [[nodiscard]] std::span<entry_type> row(std::size_t i) noexcept { return std::span(data_).subspan(i * cols_, cols_); }
    [[nodiscard]] std::span<const entry_type> data() const noexcept { return data_; }
    [[nodiscard]] std::span<entry_type> data() noexcept { return data_; }

    [[nodiscard]] bool is_zero() const noexcept {
        for (auto e : data_) {
            if (e != 0) return false;
        }
        return true;
    }

    friend bool operator==(const ModMatrix&, const ModMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::uint64_t p_ = 2;
    std::vector<entry_type> data_;
};

namespace detail {

inline std::uint64_t checked_cadence(const OverflowBudget& budget, std::uint64_t p, std::uint64_t cadence) {
    if (budget.entry_bound < p) throw DomainError("overflow budget was computed for a smaller modulus");
    if (cadence == 0) cadence = budget.ops;
    if (cadence > budget.ops) throw DomainError("reduction cadence exceeds the overflow budget");
    return cadence;
}

}  // namespace detail

/// M * v mod p. Entries of v must lie in [0, p). The running sum is reduced
/// every `cadence` products (0 = as late as the budget allows).
[[nodiscard]] inline std::vector<std::uint64_t> matvec(const ModMatrix& m, std::span<const std::uint64_t> v,
                                                       const OverflowBudget& budget, std::uint64_t cadence = 0,
                                                       unsigned jobs = 1) {
    if (v.size() != m.cols()) throw DomainError("matvec: vector length does not match column count");
    const std::uint64_t p = m.modulus();
    cadence = detail::checked_cadence(budget, p, cadence);
    std::vector<std::uint64_t> out(m.rows());
    parallel_for(m.rows(), jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = m.row(i);
            std::uint64_t acc = 0;
            for (std::size_t j0 = 0; j0 < row.size(); j0 += cadence) {
                const std::size_t j1 = std::min<std::size_t>(row.size(), j0 + cadence);
                for (std::size_t j = j0; j < j1; ++j) acc += row[j] * v[j];
                assert(acc <= budget.element_cap);
                acc %= p;
            }
            out[i] = acc;
        }
    });
    return out;
}

/// The same product with every term reduced on the spot.
[[nodiscard]] inline std::vector<std::uint64_t> matvec_reference(const ModMatrix& m, std::span<const std::uint64_t> v) {
    if (v.size() != m.cols()) throw DomainError("matvec: vector length does not match column count");
    const std::uint64_t p = m.modulus();
    std::vector<std::uint64_t> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::uint64_t acc = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc = (acc + m.at(i, j) * v[j] % p) % p;
        out[i] = acc;
    }
    return out;
}

/// A * B mod p with row-wise delayed reduction.
[[nodiscard]] inline ModMatrix matmul(const ModMatrix& a, const ModMatrix& b, const OverflowBudget& budget,
                                      std::uint64_t cadence = 0, unsigned jobs = 1) {
    if (a.cols() != b.rows()) throw DomainError("matmul: inner dimensions differ");
    if (a.modulus() != b.modulus()) throw DomainError("matmul: moduli differ");
    const std::uint64_t p = a.modulus();
    cadence = detail::checked_cadence(budget, p, cadence);
    ModMatrix c(a.rows(), b.cols(), p);
    parallel_for(a.rows(), jobs, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> acc(b.cols());
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(acc.begin(), acc.end(), 0);
            std::uint64_t pending = 0;
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const std::uint64_t x = a.at(i, j);
                if (x == 0) continue;
                const auto brow = b.row(j);
                for (std::size_t k = 0; k < brow.size(); ++k) acc[k] += x * brow[k];
                if (++pending == cadence) {
                    for (auto& s : acc) s %= p;
                    pending = 0;
                }
            }
            auto crow = c.row(i);
            for (std::size_t k = 0; k < crow.size(); ++k) crow[k] = static_cast<ModMatrix::entry_type>(acc[k] % p);
        }
    });
    return c;
}

}  // namespace qfs
