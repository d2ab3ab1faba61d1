// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Word-sized modular arithmetic: Barrett reduction, modular powers,
/// deterministic primality and Chinese-remainder reconstruction.

#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qfs/errors.hpp"

namespace qfs {

using BigInt = boost::multiprecision::cpp_int;
using u128 = unsigned __int128;

/// An odd modulus 3 <= m < 2^62 with a precomputed Barrett constant.
///
/// With b = bit_width(m) and mu = floor(2^(2b) / m), the quotient estimate
/// ((x >> (b-1)) * mu) >> (b+1) is at most two below floor(x / m) for every
/// x < m^2, so two conditional subtractions finish the reduction.
class Modulus {
public:
    static constexpr std::uint64_t max_value = std::uint64_t{1} << 62;

    explicit Modulus(std::uint64_t value) : value_(value) {
        if (value < 3 || value % 2 == 0 || value >= max_value) {
            throw DomainError("modulus must be odd and lie in [3, 2^62)");
        }
        bits_ = static_cast<unsigned>(std::bit_width(value));
        barrett_ = static_cast<std::uint64_t>((u128{1} << (2 * bits_)) / value);
    }

    [[nodiscard]] std::uint64_t value() const noexcept { return value_; }
    [[nodiscard]] std::uint64_t barrett_constant() const noexcept { return barrett_; }

    /// x mod m for x < m^2.
    [[nodiscard]] std::uint64_t reduce(u128 x) const noexcept {
        const u128 q = (static_cast<u128>(static_cast<std::uint64_t>(x >> (bits_ - 1))) * barrett_) >>
                       (bits_ + 1);
        auto r = static_cast<std::uint64_t>(x - q * value_);
        if (r >= value_) r -= value_;
        if (r >= value_) r -= value_;
        return r;
    }

    [[nodiscard]] std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
        return reduce(static_cast<u128>(a) * b);
    }
    [[nodiscard]] std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept {
        const std::uint64_t s = a + b;
        return s >= value_ ? s - value_ : s;
    }
    [[nodiscard]] std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept {
        return a >= b ? a - b : a + value_ - b;
    }

    friend bool operator==(const Modulus& a, const Modulus& b) noexcept { return a.value_ == b.value_; }

private:
    std::uint64_t value_;
    std::uint64_t barrett_;
    unsigned bits_;
};

[[nodiscard]] inline std::uint64_t reduce(u128 x, const Modulus& m) noexcept { return m.reduce(x); }

[[nodiscard]] inline std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, const Modulus& m) noexcept {
    std::uint64_t result = 1;
    while (exp != 0) {
        if (exp & 1) result = m.mul(result, base);
        base = m.mul(base, base);
        exp >>= 1;
    }
    return result;
}

/// Inverse of a unit modulo a prime modulus.
[[nodiscard]] inline std::uint64_t mod_inverse_prime(std::uint64_t a, const Modulus& m) {
    if (a % m.value() == 0) throw DomainError("zero has no inverse");
    return mod_pow(a % m.value(), m.value() - 2, m);
}

namespace detail {

inline std::uint64_t mulmod_any(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

inline std::uint64_t powmod_any(std::uint64_t b, std::uint64_t e, std::uint64_t m) noexcept {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e != 0) {
        if (e & 1) r = mulmod_any(r, b, m);
        b = mulmod_any(b, b, m);
        e >>= 1;
    }
    return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin for 64-bit integers.
[[nodiscard]] inline bool is_prime(std::uint64_t n) noexcept {
    if (n < 2) return false;
    constexpr std::uint64_t small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (auto q : small) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (auto a : small) {
        std::uint64_t x = detail::powmod_any(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = detail::mulmod_any(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// Pairwise-coprime residue channels with mixed-radix (Garner) constants.
///
/// A value x < product_bound() is represented by digits a_i < q_i with
/// x = a_0 + a_1 q_0 + a_2 q_0 q_1 + ...; digit i needs only word arithmetic
/// modulo q_i, so big integers appear only in the final sum.
class CrtBasis {
public:
    explicit CrtBasis(std::vector<Modulus> primes) : primes_(std::move(primes)) {
        if (primes_.empty()) throw DomainError("CRT basis needs at least one modulus");
        const std::size_t c = primes_.size();
        prefix_mod_.assign(c * c, 0);
        inv_prefix_.assign(c, 1);
        product_ = 1;
        radix_.reserve(c);
        for (std::size_t i = 0; i < c; ++i) {
            const Modulus& qi = primes_[i];
            std::uint64_t prefix = 1 % qi.value();
            for (std::size_t j = 0; j < i; ++j) {
                const std::uint64_t qj = primes_[j].value() % qi.value();
                if (qj == 0 || std::gcd(primes_[j].value(), qi.value()) != 1) {
                    throw DomainError("CRT moduli must be pairwise coprime");
                }
                prefix_mod_[i * c + j] = qj;
                prefix = qi.mul(prefix, qj);
            }
            inv_prefix_[i] = i == 0 ? 1 : inverse_coprime(prefix, qi.value());
            radix_.push_back(product_);
            product_ *= qi.value();
        }
    }

    [[nodiscard]] std::span<const Modulus> primes() const noexcept { return primes_; }
    [[nodiscard]] std::size_t size() const noexcept { return primes_.size(); }
    [[nodiscard]] const BigInt& product_bound() const noexcept { return product_; }

    /// Garner digits of the value with the given residues.
    void mixed_radix(std::span<const std::uint64_t> residues, std::span<std::uint64_t> digits) const {
        const std::size_t c = primes_.size();
        for (std::size_t i = 0; i < c; ++i) {
            const Modulus& qi = primes_[i];
            // value of the partial reconstruction mod q_i, by Horner over the digits
            std::uint64_t partial = 0;
            for (std::size_t j = i; j-- > 0;) {
                partial = qi.add(qi.mul(partial, prefix_mod_[i * c + j]), digits[j] % qi.value());
            }
            digits[i] = qi.mul(qi.sub(residues[i] % qi.value(), partial), inv_prefix_[i]);
        }
    }

    /// Per-channel radix products reduced modulo r, for combine_mod.
    [[nodiscard]] std::vector<std::uint64_t> radix_mod(std::uint64_t r) const {
        std::vector<std::uint64_t> out;
        out.reserve(radix_.size());
        for (const auto& w : radix_) out.push_back(static_cast<std::uint64_t>(w % r));
        return out;
    }

    [[nodiscard]] const std::vector<BigInt>& radix() const noexcept { return radix_; }

private:
    static std::uint64_t inverse_coprime(std::uint64_t a, std::uint64_t m) {
        // extended Euclid on signed 128-bit values
        __int128 t = 0, new_t = 1, r = m, new_r = a;
        while (new_r != 0) {
            const __int128 q = r / new_r;
            t -= q * new_t;
            std::swap(t, new_t);
            r -= q * new_r;
            std::swap(r, new_r);
        }
        if (r != 1) throw DomainError("CRT moduli must be pairwise coprime");
        if (t < 0) t += m;
        return static_cast<std::uint64_t>(t);
    }

    std::vector<Modulus> primes_;
    std::vector<std::uint64_t> prefix_mod_;  // [i*c + j] = q_j mod q_i
    std::vector<std::uint64_t> inv_prefix_;  // (q_0 ... q_{i-1})^{-1} mod q_i
    std::vector<BigInt> radix_;              // q_0 ... q_{i-1}
    BigInt product_;
};

/// Residue vector of a nonnegative integer.
[[nodiscard]] inline std::vector<std::uint64_t> crt_decompose(const BigInt& x, const CrtBasis& basis) {
    std::vector<std::uint64_t> out;
    out.reserve(basis.size());
    for (const auto& q : basis.primes()) out.push_back(static_cast<std::uint64_t>(x % q.value()));
    return out;
}

/// The unique x in [0, product_bound) with x = residues[i] mod primes[i].
[[nodiscard]] inline BigInt crt_combine(std::span<const std::uint64_t> residues, const CrtBasis& basis) {
    if (residues.size() != basis.size()) throw DomainError("residue count does not match CRT basis");
    std::vector<std::uint64_t> digits(basis.size());
    basis.mixed_radix(residues, digits);
    BigInt x = 0;
    for (std::size_t i = basis.size(); i-- > 0;) x += basis.radix()[i] * digits[i];
    return x;
}

/// crt_combine(residues) mod r without forming the big integer; radix_mod
/// must come from basis.radix_mod(r).
[[nodiscard]] inline std::uint64_t crt_combine_mod(std::span<const std::uint64_t> residues, const CrtBasis& basis,
                                                   std::span<const std::uint64_t> radix_mod, std::uint64_t r,
                                                   std::span<std::uint64_t> scratch) {
    basis.mixed_radix(residues, scratch);
    u128 acc = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        acc += static_cast<u128>(scratch[i] % r) * radix_mod[i];
    }
    return static_cast<std::uint64_t>(acc % r);
}

}  // namespace qfs
