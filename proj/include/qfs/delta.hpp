// SPDX-License-Identifier: Apache-2.0
#pragma once

/// The Witt-vector carry Delta_1(f) = ((lift f)^p - sum of lifted t^p) / p mod p.

#include <cstdint>
#include <string>
#include <vector>

#include "qfs/dense_power.hpp"
#include "qfs/errors.hpp"
#include "qfs/ntt.hpp"
#include "qfs/poly.hpp"

namespace qfs {

enum class PowerMethod { automatic, schoolbook, multimodular, dense };

/// Output-basis size above which the automatic method switches to the NTT.
inline constexpr std::uint64_t multimodular_threshold = 20000;

namespace detail {

/// (lift f)^p mod p^2 by the requested method.
inline ModPoly lifted_power_mod_square(const FpPoly& f, std::uint64_t p, PowerMethod method) {
    const std::uint64_t p2 = p * p;
    if (method == PowerMethod::automatic) {
        const std::uint64_t out = binomial(f.degree() * p + f.nvars() - 1, f.nvars() - 1);
        method = out > multimodular_threshold ? PowerMethod::multimodular : PowerMethod::schoolbook;
    }
    if (method == PowerMethod::schoolbook) return schoolbook_pow(change_modulus(f, p2), p);
    if (method == PowerMethod::dense) return power_mod_dense(change_modulus(f, p2), p, p2);
    return poly_power_multimodular_mod(f, p, p2, p);
}

/// (power - sum over terms t of f of lift(t)^p) / p, reduced mod p, where
/// power is (lift f)^p mod p^2.
inline FpPoly finish_delta(const ModPoly& power, const FpPoly& f, std::uint64_t p) {
    const Layout& layout = f.layout();
    const std::uint64_t p2 = p * p;
    const std::uint64_t degree = f.degree() * p;
    const ResidueRing big{p2};
    std::vector<ModPoly::term_type> all(power.terms().begin(), power.terms().end());
    all.reserve(all.size() + f.size());
    for (const auto& t : f.terms()) all.push_back({p2 - big.pow(t.coeff, p), layout.scale(t.exps, p)});
    const ModPoly numerator(big, layout, degree, std::move(all));
    std::vector<FpPoly::term_type> terms;
    terms.reserve(numerator.size());
    for (const auto& t : numerator.terms()) {
        if (t.coeff % p != 0) throw ArithmeticInvariantError("delta1: numerator not divisible by p");
        terms.push_back({t.coeff / p, t.exps});
    }
    return FpPoly::from_sorted(ResidueRing{p}, layout, degree, std::move(terms));
}

inline void check_delta_input(const FpPoly& f, std::uint64_t k) {
    const std::uint64_t p = f.ring().modulus;
    if (p >= (std::uint64_t{1} << 8)) throw DomainError("delta1 needs p below 256");
    if (std::uint64_t{f.max_exponent()} * k * p > f.layout().field_max()) {
        throw DomainError("exponent field too narrow for delta1 output of degree " + std::to_string(f.degree() * k * p));
    }
}

}  // namespace detail

/// Delta_1 of f over F_p, using the lift with coefficients in {0, ..., p-1}.
/// The result has degree p * deg(f). Works modulo p^2 throughout: the exact
/// quotient by p reduced mod p only depends on the numerator mod p^2.
[[nodiscard]] inline FpPoly delta1(const FpPoly& f, PowerMethod method = PowerMethod::automatic) {
    const std::uint64_t p = f.ring().modulus;
    detail::check_delta_input(f, 1);
    if (f.is_zero()) return FpPoly(ResidueRing{p}, f.layout(), f.degree() * p);
    return detail::finish_delta(detail::lifted_power_mod_square(f, p, method), f, p);
}

/// Delta_1(f^k) without powering the lift of f^k: since a = b mod p implies
/// a^p = b^p mod p^2, (lift of f^k)^p = (lift f)^(kp) mod p^2, and the sparse
/// f is far cheaper to multiply by than f^k. Explicit methods other than
/// dense compute f^k mod p first and defer to delta1.
[[nodiscard]] inline FpPoly delta1_of_power(const FpPoly& f, std::uint64_t k,
                                            PowerMethod method = PowerMethod::automatic) {
    const std::uint64_t p = f.ring().modulus;
    detail::check_delta_input(f, k);
    const FpPoly g = power_mod_p(f, k);
    if (method == PowerMethod::automatic && dense_power_feasible(f.nvars(), f.degree(), k * p, p * p)) {
        method = PowerMethod::dense;
    }
    if (method != PowerMethod::dense) return delta1(g, method);
    if (g.is_zero()) return FpPoly(ResidueRing{p}, f.layout(), g.degree() * p);
    return detail::finish_delta(power_mod_dense(change_modulus(f, p * p), k * p, p * p), g, p);
}

/// Reference Delta_1 over Z with exact big-integer division.
[[nodiscard]] inline FpPoly delta1_exact(const FpPoly& f) {
    const std::uint64_t p = f.ring().modulus;
    const IntPoly lifted = lift_to_integers(f);
    const IntPoly power = schoolbook_pow(lifted, p);
    std::vector<IntPoly::term_type> all(power.terms().begin(), power.terms().end());
    for (const auto& t : lifted.terms()) {
        all.push_back({-boost::multiprecision::pow(t.coeff, static_cast<unsigned>(p)), f.layout().scale(t.exps, p)});
    }
    const IntPoly numerator(IntegerRing{}, f.layout(), f.degree() * p, std::move(all));
    std::vector<FpPoly::term_type> terms;
    for (const auto& t : numerator.terms()) {
        BigInt q, r;
        boost::multiprecision::divide_qr(t.coeff, BigInt(p), q, r);
        if (!r.is_zero()) throw ArithmeticInvariantError("delta1: numerator not divisible by p");
        q %= p;
        if (q < 0) q += p;
        if (!q.is_zero()) terms.push_back({static_cast<std::uint64_t>(q), t.exps});
    }
    return FpPoly::from_sorted(ResidueRing{p}, f.layout(), f.degree() * p, std::move(terms));
}

}  // namespace qfs
