// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "qfs/modmatrix.hpp"

using namespace qfs;

namespace {

ModMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, std::uint64_t p, double density = 1.0) {
    ModMatrix m(r, c, p);
    std::bernoulli_distribution keep(density);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (keep(rng)) m.set(i, j, rng() % p);
    return m;
}

std::vector<std::uint64_t> random_vector(std::mt19937_64& rng, std::size_t n, std::uint64_t p) {
    std::vector<std::uint64_t> v(n);
    for (auto& x : v) x = rng() % p;
    return v;
}

}  // namespace

TEST(OverflowBudget, Float32Example) {
    EXPECT_EQ(overflow_budget((1u << 24) - 1, 3).ops, 4194302u);
}

TEST(OverflowBudget, BinaryEntries) {
    EXPECT_EQ(overflow_budget(1000, 2).ops, 999u);
    EXPECT_EQ(overflow_budget((1u << 24) - 1, 2).ops, (1u << 24) - 2);
}

TEST(OverflowBudget, InequalityOnRandomInputs) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 10000; ++i) {
        const std::uint64_t n = 2 + rng() % 5000;
        const std::uint64_t sq = (n - 1) * (n - 1);
        const std::uint64_t cap = 2 * sq + rng() % (std::uint64_t{1} << 40);
        const auto b = overflow_budget(cap, n);
        const unsigned __int128 o = b.ops;
        ASSERT_GE(b.ops, 1u);
        ASSERT_LE(o * sq, cap);
        ASSERT_LT(cap, (o + 2) * sq);
    }
}

TEST(OverflowBudget, RejectsTinyCap) {
    EXPECT_THROW((void)overflow_budget(4, 3), DomainError);
    EXPECT_THROW((void)overflow_budget(100, 1), DomainError);
    EXPECT_THROW((void)overflow_budget(7, 3), DomainError);  // floor(7/4) - 1 = 0
}

TEST(OverflowBudget, WordBudget) {
    const auto b = word_budget(13);
    EXPECT_EQ(b.ops, std::numeric_limits<std::uint64_t>::max() / 144 - 1);
}

TEST(Matvec, IdentityAndZero) {
    std::mt19937_64 rng(42);
    const auto id = ModMatrix::identity(50, 7);
    const auto v = random_vector(rng, 50, 7);
    EXPECT_EQ(matvec(id, v, word_budget(7)), v);
    const auto m = random_matrix(rng, 30, 50, 7);
    const std::vector<std::uint64_t> zero(50, 0);
    EXPECT_EQ(matvec(m, zero, word_budget(7)), std::vector<std::uint64_t>(30, 0));
    EXPECT_THROW((void)matvec(m, std::vector<std::uint64_t>(49, 0), word_budget(7)), DomainError);
}

TEST(Matvec, DelayedEqualsPerTermReduction) {
    std::mt19937_64 rng(43);
    for (std::uint64_t p : {5ull, 13ull}) {
        const auto b24 = overflow_budget((1u << 24) - 1, p);
        for (int i = 0; i < 100; ++i) {
            const std::size_t r = 1 + rng() % 300, c = 1 + rng() % 2000;
            const auto m = random_matrix(rng, r, c, p);
            const auto v = random_vector(rng, c, p);
            const auto ref = matvec_reference(m, v);
            ASSERT_EQ(matvec(m, v, word_budget(p)), ref);
            ASSERT_EQ(matvec(m, v, b24), ref);
            ASSERT_EQ(matvec(m, v, b24, 3), ref);
        }
    }
}

TEST(Matvec, CadenceAboveBudgetRejected) {
    const auto b = overflow_budget(100, 5);  // floor(100/16) - 1 = 5
    EXPECT_EQ(b.ops, 5u);
    const auto m = ModMatrix::identity(4, 5);
    EXPECT_THROW((void)matvec(m, std::vector<std::uint64_t>(4, 1), b, 6), DomainError);
    EXPECT_THROW((void)matvec(ModMatrix::identity(4, 7), std::vector<std::uint64_t>(4, 1), b), DomainError);
}

TEST(Matvec, ParallelMatchesSerial) {
    std::mt19937_64 rng(44);
    const auto m = random_matrix(rng, 500, 700, 11);
    const auto v = random_vector(rng, 700, 11);
    EXPECT_EQ(matvec(m, v, word_budget(11), 0, 4), matvec(m, v, word_budget(11), 0, 1));
}

TEST(Matmul, IdentityRight) {
    std::mt19937_64 rng(45);
    const auto a = random_matrix(rng, 20, 30, 7);
    EXPECT_EQ(matmul(a, ModMatrix::identity(30, 7), word_budget(7)), a);
}

TEST(Matmul, Associativity) {
    std::mt19937_64 rng(46);
    const auto a = random_matrix(rng, 50, 50, 7);
    const auto b = random_matrix(rng, 50, 50, 7);
    const auto v = random_vector(rng, 50, 7);
    const auto budget = word_budget(7);
    EXPECT_EQ(matvec(matmul(a, b, budget), v, budget), matvec(a, matvec(b, v, budget), budget));
}

TEST(Matmul, AgreesWithTripleLoop) {
    std::mt19937_64 rng(47);
    const auto budget = overflow_budget((1u << 24) - 1, 11);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_matrix(rng, 64, 64, 11, 0.8);
        const auto b = random_matrix(rng, 64, 64, 11);
        ModMatrix c(64, 64, 11);
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t s = 0; s < 64; ++s) {
                std::uint64_t acc = 0;
                for (std::size_t t = 0; t < 64; ++t) acc = (acc + a.at(r, t) * b.at(t, s)) % 11;
                c.set(r, s, acc);
            }
        ASSERT_EQ(matmul(a, b, budget, 0, 1 + i % 3), c);
    }
}

TEST(ModMatrix, Accessors) {
    ModMatrix m(2, 3, 5);
    EXPECT_TRUE(m.is_zero());
    m.set(1, 2, 7);
    EXPECT_EQ(m.at(1, 2), 2u);
    m.accumulate(1, 2, 4);
    EXPECT_EQ(m.at(1, 2), 1u);
    EXPECT_FALSE(m.is_zero());
    EXPECT_EQ(m.row(1).size(), 3u);
}
