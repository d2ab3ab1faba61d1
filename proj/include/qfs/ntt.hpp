// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Exact powering of homogeneous integer polynomials: Kronecker substitution
/// to one variable, a number-theoretic transform per residue prime, pointwise
/// powers, and Chinese-remainder reconstruction.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/modarith.hpp"
#include "qfs/monomials.hpp"
#include "qfs/poly.hpp"

namespace qfs {

/// Upper bound on every coefficient of a power.
struct PowerBound {
    BigInt value;
};

/// ((m-1) * C(h+n-1, n-1))^k: the coefficient bound for the k-th power of a
/// homogeneous degree-h form in n variables with coefficients in [0, m).
[[nodiscard]] inline PowerBound coefficient_bound(std::uint64_t m, std::uint64_t h, unsigned n, std::uint64_t k) {
    if (m < 2) throw DomainError("coefficient cap must be at least 2");
    if (n == 0) throw DomainError("need at least one variable");
    const BigInt base = BigInt(m - 1) * binomial_big(h + n - 1, n - 1);
    return {boost::multiprecision::pow(base, static_cast<unsigned>(k))};
}

/// Residue primes and roots of unity for transforms of one length.
struct NttPlan {
    std::size_t length = 1;
    std::vector<Modulus> primes;
    std::vector<std::uint64_t> roots;       // primitive length-th roots
    std::vector<std::uint64_t> inv_roots;
    std::vector<std::uint64_t> inv_length;  // length^{-1} per prime
    std::shared_ptr<const CrtBasis> crt;
};

namespace detail {

/// Smallest r >= 0 with r^c >= x.
inline BigInt ceil_root(const BigInt& x, unsigned c) {
    if (x <= 1) return x;
    if (c == 1) return x;
    const auto bits = static_cast<unsigned>(boost::multiprecision::msb(x)) + 1;
    BigInt lo = 0, hi = BigInt(1) << (bits / c + 1);
    while (lo < hi) {
        const BigInt mid = (lo + hi) / 2;
        if (boost::multiprecision::pow(mid, c) >= x) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

/// Primitive root of order L modulo prime q (L a power of two dividing q-1).
inline std::optional<std::uint64_t> primitive_root_of_order(const Modulus& q, std::uint64_t length) {
    if (length == 1) return 1;
    const std::uint64_t cofactor = (q.value() - 1) / length;
    for (std::uint64_t g = 2; g < q.value() && g < 1000; ++g) {
        const std::uint64_t r = mod_pow(g, cofactor, q);
        if (mod_pow(r, length / 2, q) == q.value() - 1) return r;
    }
    return std::nullopt;
}

/// Next prime q = 1 mod L with q >= from and q < 2^62, if any.
inline std::optional<std::uint64_t> next_ntt_prime(std::uint64_t from, std::uint64_t length) {
    const std::uint64_t step = std::max<std::uint64_t>(length, 2);
    std::uint64_t q = from <= 1 ? 1 : ((from - 2) / step + 1) * step + 1;
    if (q < from) q += step;
    for (; q < Modulus::max_value; q += step) {
        if (q >= 3 && is_prime(q)) return q;
    }
    return std::nullopt;
}

}  // namespace detail

/// Chooses primes q = 1 mod L below 2^62 whose product exceeds bound.
///
/// The count c is the fewest primes that can work (found by taking the largest
/// admissible primes first); the selected primes are then the least
/// admissible primes above the c-th root of the bound, falling back to the
/// largest ones when the ascending scan runs out of room.
[[nodiscard]] inline NttPlan select_ntt_primes(std::size_t length, const PowerBound& bound) {
    if (length == 0 || !std::has_single_bit(length)) throw DomainError("transform length must be a power of two");
    if (length >= (std::size_t{1} << 61)) throw DomainError("transform length too large");
    const std::uint64_t step = std::max<std::uint64_t>(length, 2);

    // fewest primes: take admissible primes from the top down
    std::vector<std::uint64_t> top;
    BigInt product = 1;
    {
        std::uint64_t q = ((Modulus::max_value - 2) / step) * step + 1;
        while (product <= bound.value) {
            while (q > step && !is_prime(q)) q -= step;
            if (q <= step || q < 3) throw DomainError("not enough NTT primes below 2^62 for this bound");
            top.push_back(q);
            product *= q;
            q -= step;
        }
    }
    const auto count = static_cast<unsigned>(top.size());

    std::vector<std::uint64_t> chosen;
    const BigInt root = detail::ceil_root(bound.value + 1, count);
    if (root < Modulus::max_value) {
        auto from = static_cast<std::uint64_t>(root);
        BigInt prod = 1;
        while (chosen.size() < count) {
            const auto q = detail::next_ntt_prime(std::max<std::uint64_t>(from, 3), length);
            if (!q) break;
            chosen.push_back(*q);
            prod *= *q;
            from = *q + 1;
        }
        if (chosen.size() != count || prod <= bound.value) chosen.clear();
    }
    if (chosen.empty()) chosen = top;

    NttPlan plan;
    plan.length = length;
    for (auto q : chosen) {
        const Modulus m(q);
        const auto w = detail::primitive_root_of_order(m, length);
        if (!w) throw ArithmeticInvariantError("no primitive root of the transform order");
        plan.primes.push_back(m);
        plan.roots.push_back(*w);
        plan.inv_roots.push_back(mod_inverse_prime(*w, m));
        plan.inv_length.push_back(mod_inverse_prime(length % q, m));
    }
    plan.crt = std::make_shared<const CrtBasis>(plan.primes);
    return plan;
}

namespace detail {

inline void bit_reverse(std::span<std::uint64_t> a) noexcept {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
}

inline constexpr std::size_t twiddle_chunk = std::size_t{1} << 16;

/// w * x mod q given wq = floor(w * 2^64 / q) (Shoup); needs w < q < 2^63.
inline std::uint64_t mul_shoup(std::uint64_t x, std::uint64_t w, std::uint64_t wq, std::uint64_t q) noexcept {
    const auto hi = static_cast<std::uint64_t>((static_cast<u128>(x) * wq) >> 64);
    std::uint64_t r = x * w - hi * q;
    return r >= q ? r - q : r;
}

inline std::uint64_t shoup_constant(std::uint64_t w, std::uint64_t q) noexcept {
    return static_cast<std::uint64_t>((static_cast<u128>(w) << 64) / q);
}

/// Fills tw/twq with wlen^(start+t), t < cnt, and their Shoup constants.
inline void fill_twiddles(std::uint64_t wlen, std::size_t start, std::size_t cnt, const Modulus& m,
                          std::vector<std::uint64_t>& tw, std::vector<std::uint64_t>& twq) {
    std::uint64_t w = mod_pow(wlen, start, m);
    for (std::size_t t = 0; t < cnt; ++t) {
        tw[t] = w;
        twq[t] = shoup_constant(w, m.value());
        w = m.mul(w, wlen);
    }
}

/// Decimation in frequency: natural order in, bit-reversed order out.
inline void transform_dif(std::span<std::uint64_t> a, const Modulus& m, std::uint64_t root) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    const std::uint64_t q = m.value();
    std::vector<std::uint64_t> tw(std::min(n / 2, twiddle_chunk)), twq(tw.size());
    for (std::size_t len = n; len >= 2; len >>= 1) {
        const std::size_t half = len / 2;
        const std::uint64_t wlen = mod_pow(root, n / len, m);
        for (std::size_t start = 0; start < half; start += tw.size()) {
            const std::size_t cnt = std::min(tw.size(), half - start);
            fill_twiddles(wlen, start, cnt, m, tw, twq);
            for (std::size_t block = 0; block < n; block += len) {
                std::uint64_t* lo = a.data() + block + start;
                std::uint64_t* hi = lo + half;
                for (std::size_t t = 0; t < cnt; ++t) {
                    const std::uint64_t u = lo[t], v = hi[t];
                    lo[t] = u + v >= q ? u + v - q : u + v;
                    hi[t] = mul_shoup(u + q - v, tw[t], twq[t], q);
                }
            }
        }
    }
}

/// Decimation in time: bit-reversed order in, natural order out.
inline void transform_dit(std::span<std::uint64_t> a, const Modulus& m, std::uint64_t root) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    const std::uint64_t q = m.value();
    std::vector<std::uint64_t> tw(std::min(n / 2, twiddle_chunk)), twq(tw.size());
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::uint64_t wlen = mod_pow(root, n / len, m);
        for (std::size_t start = 0; start < half; start += tw.size()) {
            const std::size_t cnt = std::min(tw.size(), half - start);
            fill_twiddles(wlen, start, cnt, m, tw, twq);
            for (std::size_t block = 0; block < n; block += len) {
                std::uint64_t* lo = a.data() + block + start;
                std::uint64_t* hi = lo + half;
                for (std::size_t t = 0; t < cnt; ++t) {
                    const std::uint64_t u = lo[t];
                    const std::uint64_t v = mul_shoup(hi[t], tw[t], twq[t], q);
                    lo[t] = u + v >= q ? u + v - q : u + v;
                    hi[t] = u >= v ? u - v : u + q - v;
                }
            }
        }
    }
}

}  // namespace detail

/// Forward transform on channel `prime_index`, in place and in natural
/// order: out[j] = sum_i a[i] w^(ij).
inline void ntt_forward(std::span<std::uint64_t> values, const NttPlan& plan, std::size_t prime_index) {
    if (values.size() != plan.length) throw DomainError("transform input length does not match plan");
    detail::transform_dif(values, plan.primes.at(prime_index), plan.roots[prime_index]);
    detail::bit_reverse(values);
}

inline void ntt_inverse(std::span<std::uint64_t> values, const NttPlan& plan, std::size_t prime_index) {
    if (values.size() != plan.length) throw DomainError("transform input length does not match plan");
    const Modulus& m = plan.primes.at(prime_index);
    detail::bit_reverse(values);
    detail::transform_dit(values, m, plan.inv_roots[prime_index]);
    const std::uint64_t s = plan.inv_length[prime_index];
    for (auto& x : values) x = m.mul(x, s);
}

/// Forward transform of every channel; values[i] belongs to prime i.
inline void ntt_forward(std::vector<std::vector<std::uint64_t>>& values, const NttPlan& plan) {
    if (values.size() != plan.primes.size()) throw DomainError("one input per prime expected");
    for (std::size_t i = 0; i < values.size(); ++i) ntt_forward(values[i], plan, i);
}

inline void ntt_inverse(std::vector<std::vector<std::uint64_t>>& values, const NttPlan& plan) {
    if (values.size() != plan.primes.size()) throw DomainError("one input per prime expected");
    for (std::size_t i = 0; i < values.size(); ++i) ntt_inverse(values[i], plan, i);
}

/// Kronecker position of a homogeneous tuple once x_n -> 1:
/// sum_{i<n-1} e_i * stride^i.
[[nodiscard]] inline std::uint64_t kronecker_position(ExponentTuple t, const Layout& layout, std::uint64_t stride) noexcept {
    return detail::box_position(t, layout, stride);
}

/// Dense coefficient sequence of f(z, z^M, ..., z^{M^{n-2}}, 1).
template <class Ring>
[[nodiscard]] std::vector<typename Ring::value_type> kronecker_substitute(const SparsePoly<Ring>& f, std::uint64_t stride) {
    const Layout& layout = f.layout();
    if (stride < 1) throw DomainError("Kronecker stride must be positive");
    for (const auto& t : f.terms()) {
        for (unsigned i = 0; i + 1 < layout.nvars(); ++i) {
            if (layout.field(t.exps, i) >= stride) throw DomainError("Kronecker stride too small for exponent");
        }
    }
    if (f.is_zero()) return {};
    std::uint64_t length = 0;
    for (const auto& t : f.terms()) length = std::max(length, kronecker_position(t.exps, layout, stride) + 1);
    std::vector<typename Ring::value_type> out(length, typename Ring::value_type{0});
    for (const auto& t : f.terms()) out[kronecker_position(t.exps, layout, stride)] = t.coeff;
    return out;
}

/// Inverse of kronecker_substitute for forms of the given total degree; the
/// last exponent is restored from homogeneity.
template <class Ring>
[[nodiscard]] SparsePoly<Ring> kronecker_invert(std::span<const typename Ring::value_type> coeffs, std::uint64_t stride,
                                               const Layout& layout, std::uint64_t total_degree, const Ring& ring = {}) {
    std::vector<typename SparsePoly<Ring>::term_type> terms;
    std::vector<std::uint32_t> e(layout.nvars());
    for (std::uint64_t pos = 0; pos < coeffs.size(); ++pos) {
        if (Ring::is_zero(coeffs[pos])) continue;
        std::uint64_t rest = pos, used = 0;
        for (unsigned i = 0; i + 1 < layout.nvars(); ++i) {
            e[i] = static_cast<std::uint32_t>(rest % stride);
            used += e[i];
            rest /= stride;
        }
        if (rest != 0 || used > total_degree) throw DomainError("Kronecker position does not decode to a term of the degree");
        e[layout.nvars() - 1] = static_cast<std::uint32_t>(total_degree - used);
        terms.push_back({coeffs[pos], layout.pack(e)});
    }
    return SparsePoly<Ring>(ring, layout, total_degree, std::move(terms));
}

/// Shape of a powering problem: k-th power of a degree-h form in n variables
/// with coefficients below cap.
struct PowerShape {
    unsigned nvars;
    std::uint64_t degree;
    std::uint64_t exponent;
    std::uint64_t coefficient_cap;

    friend auto operator<=>(const PowerShape&, const PowerShape&) = default;
};

/// Everything needed to power any polynomial of one shape.
struct PowerPlan {
    PowerShape shape;
    std::uint64_t stride;        // k*h + 1
    std::uint64_t dense_length;  // largest output position + 1
    PowerBound bound;
    NttPlan ntt;
};

[[nodiscard]] inline std::uint64_t minimal_stride(const PowerShape& s) { return s.exponent * s.degree + 1; }

[[nodiscard]] inline std::uint64_t power_dense_length(const PowerShape& s) {
    const std::uint64_t out_degree = s.exponent * s.degree;
    const std::uint64_t stride = minimal_stride(s);
    std::uint64_t top = out_degree;
    for (unsigned i = 0; i + 2 < s.nvars; ++i) {
        if (top > (std::uint64_t{1} << 61) / stride) throw DomainError("Kronecker image too large for a transform");
        top *= stride;
    }
    return (s.nvars <= 1 ? 0 : top) + 1;
}

[[nodiscard]] inline std::shared_ptr<const PowerPlan> make_power_plan(const PowerShape& shape,
                                                                      std::optional<PowerBound> bound = std::nullopt) {
    auto plan = std::make_shared<PowerPlan>();
    plan->shape = shape;
    plan->stride = minimal_stride(shape);
    plan->dense_length = power_dense_length(shape);
    plan->bound = bound ? *bound : coefficient_bound(shape.coefficient_cap, shape.degree, shape.nvars, shape.exponent);
    plan->ntt = select_ntt_primes(std::bit_ceil(plan->dense_length), plan->bound);
    return plan;
}

/// Thread-safe cache of plans keyed by shape.
class PlanCache {
public:
    [[nodiscard]] std::shared_ptr<const PowerPlan> get(const PowerShape& shape) {
        std::lock_guard lock(mutex_);
        auto& slot = plans_[shape];
        if (!slot) slot = make_power_plan(shape);
        return slot;
    }

    [[nodiscard]] std::size_t size() const {
        std::lock_guard lock(mutex_);
        return plans_.size();
    }

    void clear() {
        std::lock_guard lock(mutex_);
        plans_.clear();
    }

    static PlanCache& global() {
        static PlanCache cache;
        return cache;
    }

private:
    mutable std::mutex mutex_;
    std::map<PowerShape, std::shared_ptr<const PowerPlan>> plans_;
};

namespace detail {

/// Runs every residue channel of f^k and hands the residues of each output
/// monomial (lex-descending over the degree k*h basis) to sink(index, span).
/// Residues are stored as [monomial][channel].
template <class CoeffFn>
std::vector<std::uint64_t> power_residues(std::span<const ExponentTuple> exps, CoeffFn coeff_mod, const Layout& layout,
                                          const PowerPlan& plan, std::size_t& out_count) {
    const std::uint64_t out_degree = plan.shape.exponent * plan.shape.degree;
    const std::size_t channels = plan.ntt.primes.size();
    out_count = binomial(out_degree + layout.nvars() - 1, layout.nvars() - 1);
    std::vector<std::uint64_t> residues(out_count * channels);
    std::vector<std::uint64_t> buffer;
    for (std::size_t c = 0; c < channels; ++c) {
        const Modulus& q = plan.ntt.primes[c];
        buffer.assign(plan.ntt.length, 0);
        for (std::size_t i = 0; i < exps.size(); ++i) {
            buffer[kronecker_position(exps[i], layout, plan.stride)] = coeff_mod(i, q.value());
        }
        // pointwise powers are order-agnostic, so both bit reversals are skipped
        detail::transform_dif(buffer, q, plan.ntt.roots[c]);
        const std::uint64_t scale = plan.ntt.inv_length[c];
        for (auto& x : buffer) x = q.mul(mod_pow(x, plan.shape.exponent, q), scale);
        detail::transform_dit(buffer, q, plan.ntt.inv_roots[c]);
        std::size_t idx = 0;
        for_each_wics_descending(out_degree, layout, [&](ExponentTuple t) {
            residues[idx++ * channels + c] = buffer[kronecker_position(t, layout, plan.stride)];
        });
    }
    buffer.clear();
    buffer.shrink_to_fit();
    return residues;
}

inline PowerShape shape_of(const IntPoly& f, std::uint64_t k, std::optional<std::uint64_t> cap) {
    std::uint64_t m = 2;
    for (const auto& t : f.terms()) {
        if (t.coeff < 0) throw DomainError("multimodular powering needs nonnegative coefficients");
        if (t.coeff >= BigInt(std::uint64_t{1} << 62)) throw DomainError("coefficient too large for residue channels");
        m = std::max(m, static_cast<std::uint64_t>(t.coeff) + 1);
    }
    if (cap) {
        if (*cap < m) throw DomainError("coefficient exceeds the declared cap");
        m = *cap;
    }
    return {f.nvars(), f.degree(), k, m};
}

inline void check_output_layout(const IntPoly& f, std::uint64_t k) {
    if (std::uint64_t{f.degree()} * k > f.layout().field_max()) throw DomainError("power exponents overflow the field width");
}

}  // namespace detail

/// Exact f^k over Z. Coefficients must lie in [0, cap); cap defaults to the
/// largest coefficient plus one.
[[nodiscard]] inline IntPoly poly_power_multimodular(const IntPoly& f, std::uint64_t k,
                                                     std::optional<std::uint64_t> cap = std::nullopt,
                                                     PlanCache& cache = PlanCache::global()) {
    detail::check_output_layout(f, k);
    const Layout& layout = f.layout();
    const std::uint64_t out_degree = f.degree() * k;
    if (f.is_zero()) {
        if (k == 0) return constant(IntegerRing{}, layout, BigInt(1));
        return IntPoly(IntegerRing{}, layout, out_degree);
    }
    const auto plan = cache.get(detail::shape_of(f, k, cap));
    std::vector<ExponentTuple> exps;
    std::vector<std::uint64_t> coeffs;
    for (const auto& t : f.terms()) {
        exps.push_back(t.exps);
        coeffs.push_back(static_cast<std::uint64_t>(t.coeff));
    }
    std::size_t count = 0;
    const auto residues = detail::power_residues(
        exps, [&](std::size_t i, std::uint64_t q) { return coeffs[i] % q; }, layout, *plan, count);
    const std::size_t channels = plan->ntt.primes.size();
    std::vector<IntPoly::term_type> terms;
    std::size_t idx = 0;
    for_each_wics_descending(out_degree, layout, [&](ExponentTuple t) {
        BigInt c = crt_combine(std::span(residues).subspan(idx++ * channels, channels), *plan->ntt.crt);
        if (!c.is_zero()) terms.push_back({std::move(c), t});
    });
    std::reverse(terms.begin(), terms.end());
    return IntPoly::from_sorted(IntegerRing{}, layout, out_degree, std::move(terms));
}

/// f^k over Z reduced mod r, without materializing the big coefficients.
/// Input coefficients are the given residues read as integers in [0, cap).
[[nodiscard]] inline ModPoly poly_power_multimodular_mod(const ModPoly& f, std::uint64_t k, std::uint64_t r,
                                                         std::optional<std::uint64_t> cap = std::nullopt,
                                                         PlanCache& cache = PlanCache::global()) {
    const Layout& layout = f.layout();
    if (std::uint64_t{f.degree()} * k > layout.field_max()) throw DomainError("power exponents overflow the field width");
    const std::uint64_t out_degree = f.degree() * k;
    if (f.is_zero()) {
        if (k == 0) return constant(ResidueRing{r}, layout, std::uint64_t{1});
        return ModPoly(ResidueRing{r}, layout, out_degree);
    }
    std::uint64_t m = 2;
    for (const auto& t : f.terms()) m = std::max(m, t.coeff + 1);
    if (cap) {
        if (*cap < m) throw DomainError("coefficient exceeds the declared cap");
        m = *cap;
    }
    const auto plan = cache.get({f.nvars(), f.degree(), k, m});
    std::vector<ExponentTuple> exps;
    for (const auto& t : f.terms()) exps.push_back(t.exps);
    std::size_t count = 0;
    const auto residues = detail::power_residues(
        exps, [&](std::size_t i, std::uint64_t q) { return f.terms()[i].coeff % q; }, layout, *plan, count);
    const std::size_t channels = plan->ntt.primes.size();
    const auto radix = plan->ntt.crt->radix_mod(r);
    std::vector<std::uint64_t> scratch(channels);
    std::vector<ModPoly::term_type> terms;
    std::size_t idx = 0;
    for_each_wics_descending(out_degree, layout, [&](ExponentTuple t) {
        const std::uint64_t c = crt_combine_mod(std::span(residues).subspan(idx++ * channels, channels), *plan->ntt.crt,
                                                radix, r, scratch);
        if (c != 0) terms.push_back({c, t});
    });
    std::reverse(terms.begin(), terms.end());
    return ModPoly::from_sorted(ResidueRing{r}, layout, out_degree, std::move(terms));
}

/// The exact maximum coefficient of ((cap-1) * sum of all degree-h monomials)^k,
/// which is the sharpest bound for the shape.
[[nodiscard]] inline PowerBound refined_bound(const PowerShape& shape) {
    const Layout layout = Layout::for_max_exponent(shape.nvars, std::max<std::uint64_t>(shape.degree * shape.exponent, 1));
    std::vector<IntPoly::term_type> terms;
    for (auto t : wics(shape.degree, layout)) terms.push_back({BigInt(shape.coefficient_cap - 1), t});
    const IntPoly maximal(IntegerRing{}, layout, shape.degree, std::move(terms));
    PlanCache scratch;
    const IntPoly g = poly_power_multimodular(maximal, shape.exponent, shape.coefficient_cap, scratch);
    BigInt best = 0;
    for (const auto& t : g.terms()) best = std::max(best, t.coeff);
    return {best};
}

}  // namespace qfs
