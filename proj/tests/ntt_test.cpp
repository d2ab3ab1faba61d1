// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "qfs/ntt.hpp"
#include "qfs/poly_io.hpp"
#include "support.hpp"

using namespace qfs;
using qfs::testing::random_form;
using qfs::testing::random_int_form;

namespace {

void check_roots(const NttPlan& plan) {
    for (std::size_t i = 0; i < plan.primes.size(); ++i) {
        const Modulus& q = plan.primes[i];
        EXPECT_TRUE(is_prime(q.value()));
        EXPECT_EQ((q.value() - 1) % plan.length, 0u);
        EXPECT_EQ(mod_pow(plan.roots[i], plan.length, q), 1u);
        if (plan.length > 1) {
            EXPECT_EQ(mod_pow(plan.roots[i], plan.length / 2, q), q.value() - 1);
        }
        EXPECT_EQ(q.mul(plan.roots[i], plan.inv_roots[i]), 1u);
        EXPECT_EQ(q.mul(plan.length % q.value(), plan.inv_length[i]), 1u);
    }
}

BigInt max_coefficient(const IntPoly& f) {
    BigInt m = 0;
    for (const auto& t : f.terms()) m = std::max(m, t.coeff);
    return m;
}

}  // namespace

TEST(SelectPrimes, SmallBoundPicks17) {
    const auto plan = select_ntt_primes(8, {BigInt(16)});
    ASSERT_EQ(plan.primes.size(), 1u);
    EXPECT_EQ(plan.primes[0].value(), 17u);
    check_roots(plan);
    // 2 is one admissible root: 2^8 = 1 and 2^4 = -1 mod 17
    EXPECT_EQ(mod_pow(2, 8, Modulus(17)), 1u);
    EXPECT_EQ(mod_pow(2, 4, Modulus(17)), 16u);
}

TEST(SelectPrimes, LeastPrimeAboveBound) {
    const auto plan = select_ntt_primes(8, {BigInt(144)});
    ASSERT_EQ(plan.primes.size(), 1u);
    EXPECT_EQ(plan.primes[0].value(), 193u);
}

TEST(SelectPrimes, ProductExceedsK3Bounds) {
    for (std::uint64_t p : {3ull, 5ull, 7ull, 11ull, 13ull}) {
        const auto bound = coefficient_bound(p, 4 * p, 4, p);
        const auto plan = select_ntt_primes(std::size_t{1} << 20, bound);
        BigInt prod = 1;
        for (const auto& q : plan.primes) prod *= q.value();
        EXPECT_GT(prod, bound.value) << p;
        EXPECT_EQ(plan.crt->product_bound(), prod);
        check_roots(plan);
    }
}

TEST(SelectPrimes, RejectsBadLength) {
    EXPECT_THROW((void)select_ntt_primes(12, {BigInt(10)}), DomainError);
    EXPECT_THROW((void)select_ntt_primes(0, {BigInt(10)}), DomainError);
}

TEST(Transform, ZerosAndDelta) {
    const auto plan = select_ntt_primes(16, {BigInt(1) << 100});
    for (std::size_t c = 0; c < plan.primes.size(); ++c) {
        std::vector<std::uint64_t> z(16, 0);
        ntt_forward(z, plan, c);
        for (auto x : z) EXPECT_EQ(x, 0u);
        std::vector<std::uint64_t> d(16, 0);
        d[0] = 1;
        ntt_forward(d, plan, c);
        for (auto x : d) EXPECT_EQ(x, 1u);
    }
}

TEST(Transform, MatchesDirectEvaluation) {
    const auto plan = select_ntt_primes(8, {BigInt(1000000)});
    const Modulus& q = plan.primes[0];
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::uint64_t> a(8);
        for (auto& x : a) x = rng() % q.value();
        std::vector<std::uint64_t> want(8, 0);
        for (std::size_t j = 0; j < 8; ++j) {
            const std::uint64_t wj = mod_pow(plan.roots[0], j, q);
            std::uint64_t acc = 0, pw = 1;
            for (std::size_t i = 0; i < 8; ++i) {
                acc = q.add(acc, q.mul(a[i], pw));
                pw = q.mul(pw, wj);
            }
            want[j] = acc;
        }
        auto got = a;
        ntt_forward(got, plan, 0);
        EXPECT_EQ(got, want);
        ntt_inverse(got, plan, 0);
        EXPECT_EQ(got, a);
    }
}

TEST(Transform, CyclicConvolution) {
    const std::size_t len = 1 << 10;
    const auto plan = select_ntt_primes(len, {BigInt(1) << 120});
    std::mt19937_64 rng(32);
    std::vector<std::uint64_t> a(len, 0), b(len, 0);
    for (std::size_t i = 0; i < len / 2; ++i) {
        a[i] = rng() % 1000;
        b[i] = rng() % 1000;
    }
    std::vector<std::uint64_t> want(len, 0);
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = 0; i + j < len; ++j) want[i + j] += a[i] * b[j];
    for (std::size_t c = 0; c < plan.primes.size(); ++c) {
        const Modulus& q = plan.primes[c];
        auto fa = a, fb = b;
        ntt_forward(fa, plan, c);
        ntt_forward(fb, plan, c);
        for (std::size_t i = 0; i < len; ++i) fa[i] = q.mul(fa[i], fb[i]);
        ntt_inverse(fa, plan, c);
        for (std::size_t i = 0; i < len; ++i) ASSERT_EQ(fa[i], want[i] % q.value());
    }
}

TEST(Transform, AllChannelsAtOnce) {
    const auto plan = select_ntt_primes(64, {BigInt(1) << 130});
    ASSERT_GE(plan.primes.size(), 3u);
    std::mt19937_64 rng(33);
    std::vector<std::vector<std::uint64_t>> v(plan.primes.size(), std::vector<std::uint64_t>(64));
    for (std::size_t c = 0; c < v.size(); ++c)
        for (auto& x : v[c]) x = rng() % plan.primes[c].value();
    const auto orig = v;
    ntt_forward(v, plan);
    EXPECT_NE(v, orig);
    ntt_inverse(v, plan);
    EXPECT_EQ(v, orig);
}

TEST(Kronecker, SmallExample) {
    const auto f = lift_to_integers(parse_polynomial("x1 + x2", 5));
    const auto k = kronecker_substitute(f, 2);
    ASSERT_EQ(k.size(), 2u);
    EXPECT_EQ(k[0], 1);
    EXPECT_EQ(k[1], 1);
    EXPECT_THROW((void)kronecker_substitute(lift_to_integers(parse_polynomial("x1^3 + x2^3", 5)), 2), DomainError);
}

TEST(Kronecker, InvertEdgeCases) {
    const Layout l = Layout::for_max_exponent(4, 8);
    const std::vector<BigInt> zeros(10, BigInt(0));
    EXPECT_TRUE(kronecker_invert<IntegerRing>(zeros, 9, l, 8).is_zero());
    const std::vector<BigInt> first{BigInt(7)};
    const auto g = kronecker_invert<IntegerRing>(first, 9, l, 8);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.terms()[0].coeff, 7);
    EXPECT_EQ(g.terms()[0].exps, l.pack(std::vector<std::uint32_t>{0, 0, 0, 8}));
}

TEST(Kronecker, RoundTripAndProduct) {
    std::mt19937_64 rng(34);
    const Layout l = Layout::for_max_exponent(4, 8);
    for (int i = 0; i < 100; ++i) {
        const auto f = random_int_form(rng, 4, 4, 50, l, 0.4);
        const auto g = random_int_form(rng, 4, 4, 50, l, 0.4);
        const std::uint64_t stride = 9;  // admissible for the degree-8 product
        const auto kf = kronecker_substitute(f, stride);
        EXPECT_EQ(kronecker_invert<IntegerRing>(kf, stride, l, 4), f);
        const auto kg = kronecker_substitute(g, stride);
        const auto fg = schoolbook_mul(f, g);
        const auto kfg = kronecker_substitute(fg, stride);
        std::vector<BigInt> conv(kf.size() + kg.size(), BigInt(0));
        for (std::size_t a = 0; a < kf.size(); ++a)
            for (std::size_t b = 0; b < kg.size(); ++b) conv[a + b] += kf[a] * kg[b];
        for (std::size_t pos = 0; pos < conv.size(); ++pos) {
            const BigInt want = pos < kfg.size() ? kfg[pos] : BigInt(0);
            ASSERT_EQ(conv[pos], want);
        }
    }
}

TEST(CoefficientBound, Formula) {
    EXPECT_EQ(coefficient_bound(5, 3, 3, 0).value, 1);
    EXPECT_EQ(coefficient_bound(3, 12, 4, 3).value, BigInt(753571000));  // (2 * C(15,3))^3
    for (std::uint64_t p : {5ull, 7ull}) {
        const BigInt base = BigInt(p - 1) * binomial_big(4 * p + 3, 3);
        EXPECT_EQ(coefficient_bound(p, 4 * p, 4, p).value, boost::multiprecision::pow(base, static_cast<unsigned>(p)));
    }
    EXPECT_THROW((void)coefficient_bound(1, 3, 3, 2), DomainError);
}

TEST(CoefficientBound, HoldsOnRandomForms) {
    std::mt19937_64 rng(35);
    const Layout l = Layout::for_max_exponent(3, 12);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t k = 1 + i % 4;
        const auto f = random_int_form(rng, 3, 3, 5, l, 0.7);
        const auto g = schoolbook_pow(f, k);
        EXPECT_LE(max_coefficient(g), coefficient_bound(5, 3, 3, k).value);
    }
}

TEST(CoefficientBound, RefinedIsSharpAndBelowFormula) {
    const PowerShape s{3, 3, 4, 5};
    const auto r = refined_bound(s);
    EXPECT_LE(r.value, coefficient_bound(5, 3, 3, 4).value);
    // attained by the all-(m-1) form
    const Layout l = Layout::for_max_exponent(3, 12);
    std::vector<IntPoly::term_type> terms;
    for (auto t : wics(3, l)) terms.push_back({BigInt(4), t});
    const IntPoly f(IntegerRing{}, l, 3, std::move(terms));
    EXPECT_EQ(max_coefficient(schoolbook_pow(f, 4)), r.value);
}

TEST(MultimodularPower, Monomial) {
    const Layout l = Layout::for_max_exponent(4, 40);
    const IntPoly f(IntegerRing{}, l, 4, {{BigInt(3), l.pack(std::vector<std::uint32_t>{1, 2, 0, 1})}});
    const auto g = poly_power_multimodular(f, 7);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.terms()[0].coeff, 2187);
    EXPECT_EQ(g.terms()[0].exps, l.pack(std::vector<std::uint32_t>{7, 14, 0, 7}));
}

TEST(MultimodularPower, LinearFormSquared) {
    const auto f = lift_to_integers(relayout(parse_polynomial("x1 + x2 + x3 + x4", 5), Layout(4, 4)));
    EXPECT_EQ(poly_power_multimodular(f, 2), schoolbook_pow(f, 2));
}

TEST(MultimodularPower, FermatCubed) {
    const auto f = lift_to_integers(relayout(qfs::testing::fermat(4, 3, 4), Layout::for_max_exponent(4, 12)));
    const auto g = poly_power_multimodular(f, 3);
    const Layout& l = f.layout();
    EXPECT_EQ(g.coefficient(l.pack(std::vector<std::uint32_t>{4, 4, 4, 0})), 6);
    EXPECT_EQ(g.coefficient(l.pack(std::vector<std::uint32_t>{8, 4, 0, 0})), 3);
    EXPECT_EQ(g.coefficient(l.pack(std::vector<std::uint32_t>{12, 0, 0, 0})), 1);
    EXPECT_EQ(g.size(), 20u);
}

TEST(MultimodularPower, AgreesWithSchoolbook) {
    std::mt19937_64 rng(36);
    PlanCache cache;
    for (int i = 0; i < 100; ++i) {
        const unsigned n = 2 + i % 3;
        const std::uint64_t h = 1 + (i / 3) % 8;
        const std::uint64_t k = 1 + (i / 7) % 5;
        const std::uint64_t m = 2 + (i / 11) % 11;
        const Layout l = Layout::for_max_exponent(n, h * k);
        const auto f = random_int_form(rng, n, h, m, l, 0.4);
        EXPECT_EQ(poly_power_multimodular(f, k, m, cache), schoolbook_pow(f, k)) << n << " " << h << " " << k;
    }
}

TEST(MultimodularPower, ModularVariantAndCache) {
    std::mt19937_64 rng(37);
    PlanCache cache;
    const Layout l = Layout::for_max_exponent(4, 40);
    for (int i = 0; i < 5; ++i) {
        const auto f = random_form(rng, 4, 8, 5, l, 0.3);
        const auto exact = schoolbook_pow(lift_to_integers(f), 5);
        EXPECT_EQ(poly_power_multimodular_mod(f, 5, 25, 5, cache), reduce_coefficients(exact, 25));
    }
    EXPECT_EQ(cache.size(), 1u);
    const auto f = random_form(rng, 4, 8, 5, l, 0.3);
    EXPECT_THROW((void)poly_power_multimodular_mod(f, 5, 25, 3, cache), DomainError);
}

TEST(MultimodularPower, MinimalStride) {
    const PowerShape s{4, 4, 5, 5};
    EXPECT_EQ(minimal_stride(s), 21u);
    EXPECT_EQ(power_dense_length(s), 20u * 21 * 21 + 1);
}
