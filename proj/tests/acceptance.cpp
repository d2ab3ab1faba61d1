// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [--only N]... [--skip N]...

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfs/qfs.hpp"
#include "support.hpp"

using namespace qfs;
using qfs::testing::fermat;
using qfs::testing::random_form;
using qfs::testing::random_int_form;
using qfs::testing::read_file;

namespace {

// tolerances
constexpr double distribution_sigmas = 5.0;
constexpr unsigned k3_bound = 10;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void fail(const std::string& why) {
        if (pass) detail.str("");
        pass = false;
        detail << why << "; ";
    }
};

using Check = std::function<void(Outcome&)>;

void fixtures(Outcome& o, const std::string& file, std::uint32_t p, unsigned max_height) {
    const auto rows = parse_fixtures(read_file(std::string(QFS_FIXTURE_DIR) + "/" + file));
    std::size_t checked = 0, good = 0;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            o.fail(file + " line " + std::to_string(row.line) + ": " + row.error);
            continue;
        }
        if (row.p != p) {
            o.fail(file + " line " + std::to_string(row.line) + ": wrong field");
            continue;
        }
        if (row.expected && *row.expected > max_height) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = compute_height({p, *row.f, k3_bound});
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++checked;
        std::cout << "  " << file << " line " << row.line << ": expected " << format_height(row.expected) << " got "
                  << format_height(r.height) << " (" << std::fixed << std::setprecision(3) << dt << " s)\n"
                  << std::defaultfloat << std::setprecision(6)
                  << std::flush;
        if (r.height == row.expected) {
            ++good;
        } else {
            o.fail(file + " line " + std::to_string(row.line) + " expected " + format_height(row.expected) + " got " +
                   format_height(r.height));
        }
    }
    if (checked == 0) o.fail(file + ": no rows");
    if (o.pass) o.detail << file << " " << good << "/" << checked << "; ";
}

void criterion1(Outcome& o) { fixtures(o, "k3_f5.txt", 5, k3_bound); }
void criterion2(Outcome& o) { fixtures(o, "k3_f7.txt", 7, k3_bound); }
void criterion3(Outcome& o) {
    fixtures(o, "k3_f11.txt", 11, 5);
    fixtures(o, "k3_f13.txt", 13, 5);
}

void criterion4(Outcome& o) {
    const auto h3 = compute_height({3, fermat(4, 3, 4), k3_bound}).height;
    const auto h5 = compute_height({5, fermat(4, 5, 4), k3_bound}).height;
    const auto g = parse_polynomial("x1^4 + x2^4 + x3^4 + x4^4 + x1*x2*x3*x4", 5);
    const auto hg = compute_height({5, g, k3_bound}).height;
    if (h3) o.fail("Fermat over F_3 gave " + format_height(h3));
    if (h5 != 1u) o.fail("Fermat over F_5 gave " + format_height(h5));
    if (hg) o.fail("Fermat + x1x2x3x4 over F_5 gave " + format_height(hg));
    if (o.pass) o.detail << "inf, 1, inf";
}

void criterion5(Outcome& o) {
    std::mt19937_64 rng(5005);
    std::size_t compared = 0;
    for (std::uint32_t p : {3u, 5u}) {
        const std::uint64_t D = 4ull * p * (p - 1), d = 4ull * (p - 1);
        const Layout l = pipeline_layout(4, p);
        for (int i = 0; i < 100; ++i) {
            const double density = (p == 3 ? 0.02 : 0.002) * (1 + i % 10);
            const auto delta = random_form(rng, 4, D, p, l, density);
            const auto t = mts_triv(delta, d, p);
            const auto m = mts_merge(delta, d, p);
            const auto w = mts_wics(delta, d, p);
            ++compared;
            if (!t || !m || !w || t->matrix != m->matrix || t->matrix != w->matrix) {
                o.fail("p=" + std::to_string(p) + " instance " + std::to_string(i) + " differs");
            }
        }
    }
    auto r = worker_rng(5005, 1);
    for (int i = 0; i < 10; ++i) {
        const auto f = sample_surface(r, 5, 4);
        const auto data = prepare_surface({5, f, k3_bound}, PowerMethod::automatic, true);
        const auto t = surface_matrix(data, MtsAlgorithm::triv);
        const auto m = surface_matrix(data, MtsAlgorithm::merge);
        const auto w = surface_matrix(data, MtsAlgorithm::wics);
        ++compared;
        if (t.matrix != m.matrix || t.matrix != w.matrix) o.fail("pipeline surface " + std::to_string(i) + " differs");
    }
    if (o.pass) o.detail << compared << " matrix triples equal";
}

void criterion6(Outcome& o) {
    for (auto [p, count] : {std::pair{3u, 200}, std::pair{5u, 50}}) {
        auto rng = worker_rng(6006, p);
        HeightHistogram hist(k3_bound);
        for (int i = 0; i < count; ++i) {
            const auto f = sample_surface(rng, p, 4);
            const auto a = compute_height({p, f, k3_bound}, {HeightMethod::naive});
            const auto b = compute_height({p, f, k3_bound}, {HeightMethod::matrix});
            hist.add(b.height);
            if (a.height != b.height) {
                o.fail("p=" + std::to_string(p) + " sample " + std::to_string(i) + ": naive " + format_height(a.height) +
                       " matrix " + format_height(b.height));
            }
        }
        if (o.pass) {
            o.detail << "p=" << p << " " << count << " agree (heights";
            for (unsigned h = 1; h <= k3_bound; ++h)
                if (hist.counts[h - 1]) o.detail << " " << h << ":" << hist.counts[h - 1];
            if (hist.infinite) o.detail << " inf:" << hist.infinite;
            o.detail << "); ";
        }
    }
}

void criterion7(Outcome& o) {
    std::mt19937_64 rng(7007);
    PlanCache cache;
    int agreed = 0;
    for (int i = 0; i < 100; ++i) {
        const unsigned n = 1 + static_cast<unsigned>(rng() % 4);
        const std::uint64_t h = 1 + rng() % 8, k = 1 + rng() % 5, m = 2 + rng() % 11;
        const Layout l = Layout::for_max_exponent(n, h * k);
        const auto f = random_int_form(rng, n, h, m, l, 0.5);
        if (poly_power_multimodular(f, k, m, cache) == schoolbook_pow(f, k)) {
            ++agreed;
        } else {
            o.fail("instance " + std::to_string(i) + " (n=" + std::to_string(n) + ", h=" + std::to_string(h) +
                   ", k=" + std::to_string(k) + ") differs");
        }
    }
    if (o.pass) o.detail << agreed << "/100 term lists equal";
}

void criterion8(Outcome& o) {
    const std::uint32_t primes[] = {3, 5, 7, 11, 13};
    const std::uint64_t want[] = {165, 969, 2925, 12341, 20825};
    for (int i = 0; i < 5; ++i) {
        const std::uint32_t p = primes[i];
        const auto b = basis(4ull * (p - 1), pipeline_layout(4, p));
        const auto c = binomial(4ull * p - 1, 3);
        if (b->size() != want[i] || c != want[i]) {
            o.fail("p=" + std::to_string(p) + ": basis " + std::to_string(b->size()) + ", binomial " +
                   std::to_string(c));
        } else {
            o.detail << b->size() << " ";
        }
    }
}

void criterion9(Outcome& o) {
    std::mt19937_64 rng(9009);
    const Layout l = Layout::for_max_exponent(3, 12);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t k = 1 + i % 4;
        const auto f = random_int_form(rng, 3, 3, 5, l, 0.3 + 0.7 * (i % 5) / 4.0);
        const auto bound = coefficient_bound(5, 3, 3, k).value;
        BigInt top = 0;
        const auto g = schoolbook_pow(f, k);
        for (const auto& t : g.terms()) top = t.coeff > top ? t.coeff : top;
        worst = std::max(worst, static_cast<double>(top) / static_cast<double>(bound));
        if (top > bound) o.fail("instance " + std::to_string(i) + " exceeds the bound");
    }
    if (o.pass) o.detail << "200 forms, largest coefficient/bound = " << worst;
}

void criterion10(Outcome& o) {
    const auto b = overflow_budget((std::uint64_t{1} << 24) - 1, 3);
    if (b.ops != 4194302) o.fail("o(2^24-1, 3) = " + std::to_string(b.ops));
    std::mt19937_64 rng(10010);
    for (std::uint64_t p : {5ull, 13ull}) {
        const auto b24 = overflow_budget((std::uint64_t{1} << 24) - 1, p);
        for (int i = 0; i < 100; ++i) {
            const std::size_t r = 1 + rng() % 400, c = 1 + rng() % 3000;
            ModMatrix m(r, c, p);
            for (std::size_t x = 0; x < r; ++x)
                for (std::size_t y = 0; y < c; ++y) m.set(x, y, rng() % p);
            std::vector<std::uint64_t> v(c);
            for (auto& e : v) e = rng() % p;
            const auto ref = matvec_reference(m, v);
            if (matvec(m, v, b24) != ref || matvec(m, v, word_budget(p)) != ref) {
                o.fail("p=" + std::to_string(p) + " instance " + std::to_string(i) + " differs");
            }
        }
    }
    if (o.pass) o.detail << "o = " << b.ops << ", 200 delayed matvecs exact";
}

void criterion11(Outcome& o) {
    for (auto [p, count] : {std::pair{3u, 10000ull}, std::pair{5u, 25000ull}}) {
        SearchConfig cfg;
        cfg.p = p;
        cfg.sample_count = count;
        cfg.seed = 11011;
        cfg.bound = k3_bound;
        cfg.jobs = 0;
        const auto r = run_search(cfg);
        const double p0 = 1.0 / p;
        const double frac = static_cast<double>(r.histogram.at_least(2)) / static_cast<double>(r.histogram.total);
        const double sigma = std::sqrt(p0 * (1 - p0) / static_cast<double>(r.histogram.total));
        const double z = (frac - p0) / sigma;
        std::cout << "  p=" << p << ":\n" << format_histogram(r.histogram, p) << std::flush;
        o.detail << "p=" << p << " N=" << r.histogram.total << " frac(h>=2)=" << frac << " z=" << z << "; ";
        if (r.histogram.total != count) o.fail("p=" + std::to_string(p) + " sample count short");
        if (std::abs(z) > distribution_sigmas) {
            o.fail("p=" + std::to_string(p) + " fraction " + std::to_string(frac) + " is " + std::to_string(z) +
                   " sigma from 1/p");
        }
    }
}

void criterion12(Outcome& o) {
    using Tuple = std::vector<std::uint32_t>;
    const Layout l(4, 8);
    const auto got = generate_matching(l.pack(Tuple{21, 19, 22, 18}), 5, 16, l);
    std::set<Tuple> s;
    for (auto t : got) s.insert(l.unpack_vector(t));
    // the reference list, verbatim
    const std::set<Tuple> want{{13, 0, 2, 1}, {8, 7, 0, 1}, {8, 0, 7, 1}, {8, 0, 2, 6},  {3, 10, 2, 1},
                               {3, 5, 7, 1},  {3, 5, 2, 6}, {3, 0, 12, 1}, {3, 0, 7, 6}, {3, 0, 2, 11}};
    auto str = [](const Tuple& t) {
        std::string r = "(";
        for (std::size_t i = 0; i < t.size(); ++i) r += (i ? "," : "") + std::to_string(t[i]);
        return r + ")";
    };
    auto matches = [](const Tuple& t) {
        const Tuple delta{21, 19, 22, 18};
        for (std::size_t i = 0; i < 4; ++i)
            if ((t[i] + delta[i]) % 5 != 4) return false;
        return true;
    };
    for (const auto& t : want) {
        if (s.count(t)) continue;
        o.fail("reference tuple " + str(t) + " not returned" +
               (matches(t) ? std::string() : " (it does not match: residues differ from (3,0,2,1) mod 5)"));
    }
    for (const auto& t : s) {
        if (!want.count(t)) o.fail("returned " + str(t) + " not in the reference list");
    }
    if (got.size() != 10) o.fail("returned " + std::to_string(got.size()) + " tuples");
    if (o.pass) o.detail << "10 tuples match";
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only, skip;
    for (int i = 1; i < argc; ++i) {
        const bool is_only = std::strcmp(argv[i], "--only") == 0, is_skip = std::strcmp(argv[i], "--skip") == 0;
        if ((!is_only && !is_skip) || i + 1 >= argc) {
            std::cerr << "usage: acceptance [--only N]... [--skip N]...\n";
            return 2;
        }
        (is_only ? only : skip).insert(std::atoi(argv[++i]));
    }

    const std::vector<Check> checks{criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
                                    criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
    int failures = 0;
    for (int c = 1; c <= static_cast<int>(checks.size()); ++c) {
        if ((!only.empty() && !only.count(c)) || skip.count(c)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            checks[c - 1](o);
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << " ["
                  << std::fixed << std::setprecision(1) << dt << " s]\n"
                  << std::defaultfloat << std::setprecision(6) << std::flush;
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
