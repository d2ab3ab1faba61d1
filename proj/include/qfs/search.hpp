// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Random sampling of Calabi-Yau forms, height histograms and fixture tables.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/height.hpp"
#include "qfs/parallel.hpp"
#include "qfs/poly_io.hpp"

namespace qfs {

using Rng = std::mt19937_64;

/// Generator for one worker of a seeded run.
[[nodiscard]] inline Rng worker_rng(std::uint64_t seed, std::uint64_t worker) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(worker >> 32)};
    return Rng(seq);
}

/// Uniform point of the space of degree-n forms in n variables over F_p,
/// resampled until nonzero.
[[nodiscard]] inline FpPoly sample_surface(Rng& rng, std::uint32_t p, unsigned n) {
    const Layout layout = Layout::for_max_exponent(n, n);
    const auto monomials = wics(n, layout);
    std::uniform_int_distribution<std::uint64_t> coeff(0, p - 1);
    while (true) {
        std::vector<FpPoly::term_type> terms;
        for (auto t : monomials) {
            const std::uint64_t c = coeff(rng);
            if (c != 0) terms.push_back({c, t});
        }
        if (!terms.empty()) return FpPoly::from_sorted(prime_field(p), layout, n, std::move(terms));
    }
}

struct SearchConfig {
    std::uint32_t p = 5;
    unsigned n = 4;
    std::uint64_t sample_count = 1;
    std::uint64_t seed = 0;
    unsigned bound = 10;
    std::optional<unsigned> target_height;  // stop once a surface of exactly this height turns up
    unsigned jobs = 1;
    HeightOptions height;
};

/// counts[h-1] for finite heights 1..bound, plus the infinite count.
struct HeightHistogram {
    unsigned bound = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t infinite = 0;
    std::uint64_t total = 0;

    explicit HeightHistogram(unsigned b = 0) : bound(b), counts(b, 0) {}

    void add(std::optional<unsigned> h) {
        if (h) {
            ++counts.at(*h - 1);
        } else {
            ++infinite;
        }
        ++total;
    }

    void merge(const HeightHistogram& o) {
        if (o.bound != bound) throw DomainError("cannot merge histograms with different bounds");
        for (unsigned i = 0; i < bound; ++i) counts[i] += o.counts[i];
        infinite += o.infinite;
        total += o.total;
    }

    /// Number of samples with height >= h (infinity included).
    [[nodiscard]] std::uint64_t at_least(unsigned h) const {
        std::uint64_t s = infinite;
        for (unsigned i = h; i <= bound; ++i) s += counts[i - 1];
        return s;
    }

    friend bool operator==(const HeightHistogram&, const HeightHistogram&) = default;
};

struct FoundSurface {
    unsigned worker;
    std::uint64_t index;  // position within the worker's stream
    unsigned height;
    FpPoly f;
};

struct SearchResult {
    HeightHistogram histogram;
    std::vector<FoundSurface> found;  // new per-worker maxima and the target hit, ordered by (worker, index)
    bool target_reached = false;
};

[[nodiscard]] inline SearchResult run_search(const SearchConfig& cfg) {
    if (cfg.sample_count == 0) throw DomainError("sample count must be at least 1");
    if (!is_prime(cfg.p)) throw DomainError("p must be prime");
    if (cfg.bound == 0) throw DomainError("bound must be at least 1");
    if (cfg.target_height && (*cfg.target_height == 0 || *cfg.target_height > cfg.bound)) {
        throw DomainError("target height must lie in 1..bound");
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_jobs(cfg.jobs), cfg.sample_count));
    std::vector<SearchResult> partial(workers, SearchResult{HeightHistogram(cfg.bound), {}, false});
    std::atomic<bool> stop{false};
    HeightOptions hopt = cfg.height;
    hopt.jobs = 1;

    parallel_for(workers, workers, [&](std::size_t wb, std::size_t we) {
        for (std::size_t w = wb; w < we; ++w) {
            const std::uint64_t begin = cfg.sample_count * w / workers, end = cfg.sample_count * (w + 1) / workers;
            Rng rng = worker_rng(cfg.seed, w);
            auto& out = partial[w];
            unsigned best = 0;
            for (std::uint64_t i = 0; i < end - begin; ++i) {
                if (stop.load(std::memory_order_relaxed)) break;
                FpPoly f = sample_surface(rng, cfg.p, cfg.n);
                const auto r = compute_height({cfg.p, f, cfg.bound}, hopt);
                out.histogram.add(r.height);
                const bool hit = cfg.target_height && r.height == cfg.target_height;
                if (r.height && (*r.height > best || hit)) {
                    best = std::max(best, *r.height);
                    out.found.push_back({static_cast<unsigned>(w), i, *r.height, std::move(f)});
                }
                if (hit) {
                    out.target_reached = true;
                    stop.store(true, std::memory_order_relaxed);
                    break;
                }
            }
        }
    });

    SearchResult res{HeightHistogram(cfg.bound), {}, false};
    for (auto& part : partial) {
        res.histogram.merge(part.histogram);
        res.target_reached = res.target_reached || part.target_reached;
        for (auto& s : part.found) res.found.push_back(std::move(s));
    }
    return res;
}

/// Aligned text table: per-height counts, observed share of height >= h and
/// the heuristic p^-(h-1).
[[nodiscard]] inline std::string format_histogram(const HeightHistogram& h, std::uint32_t p) {
    std::ostringstream out;
    out << std::setw(6) << "height" << std::setw(10) << "count" << std::setw(12) << ">=h" << std::setw(12)
        << "p^-(h-1)" << '\n';
    const double total = h.total ? static_cast<double>(h.total) : 1.0;
    out << std::fixed << std::setprecision(6);
    for (unsigned k = 1; k <= h.bound; ++k) {
        out << std::setw(6) << k << std::setw(10) << h.counts[k - 1] << std::setw(12)
            << static_cast<double>(h.at_least(k)) / total << std::setw(12) << std::pow(static_cast<double>(p), 1.0 - k)
            << '\n';
    }
    out << std::setw(6) << "inf" << std::setw(10) << h.infinite << '\n';
    out << std::setw(6) << "total" << std::setw(10) << h.total << '\n';
    return out.str();
}

/// One record of a fixture table: `p ; expected height ; polynomial`.
struct FixtureRow {
    std::size_t line = 0;
    std::uint32_t p = 0;
    std::optional<unsigned> expected;
    std::string text;
    std::optional<FpPoly> f;
    std::string error;  // non-empty when the line failed to parse
};

[[nodiscard]] inline std::optional<unsigned> parse_height(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s == "inf") return std::nullopt;
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        s.size() > 9) {
        throw ParseError("height must be a positive integer or inf", 0);
    }
    const auto v = static_cast<unsigned>(std::stoul(std::string(s)));
    if (v == 0) throw ParseError("height must be a positive integer or inf", 0);
    return v;
}

/// Rows of a fixture file; blank lines and `#` comments are skipped. Lines
/// that fail to parse are kept with `error` set.
[[nodiscard]] inline std::vector<FixtureRow> parse_fixtures(std::string_view text) {
    std::vector<FixtureRow> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;
        FixtureRow row;
        row.line = line_no;
        try {
            const auto a = line.find(';');
            const auto b = a == std::string_view::npos ? a : line.find(';', a + 1);
            if (b == std::string_view::npos) throw ParseError("expected 'p ; height ; polynomial'", 0);
            const std::string ps(line.substr(0, a));
            std::size_t used = 0;
            unsigned long pv = 0;
            try {
                pv = std::stoul(ps, &used);
            } catch (const std::exception&) {
                throw ParseError("bad prime field", 0);
            }
            if (ps.find_first_not_of(" \t", used) != std::string::npos || pv > UINT32_MAX) {
                throw ParseError("bad prime field", 0);
            }
            row.p = static_cast<std::uint32_t>(pv);
            row.expected = parse_height(line.substr(a + 1, b - a - 1));
            row.text = std::string(line.substr(b + 1));
            while (!row.text.empty() && std::isspace(static_cast<unsigned char>(row.text.back()))) row.text.pop_back();
            row.f = parse_polynomial(row.text, row.p);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
        if (nl == text.size()) break;
    }
    return rows;
}

struct FixtureVerdict {
    std::size_t line;
    std::uint32_t p;
    std::optional<unsigned> expected;
    std::optional<unsigned> actual;
    bool pass;
    std::string error;
};

/// Recomputes each row's height (bound: the known bound for the variable
/// count, else `fallback_bound`).
[[nodiscard]] inline std::vector<FixtureVerdict> verify_fixtures(const std::vector<FixtureRow>& rows,
                                                                 const HeightOptions& opt = {},
                                                                 unsigned fallback_bound = 10, unsigned jobs = 1) {
    std::vector<FixtureVerdict> out(rows.size());
    HeightOptions inner = opt;
    inner.jobs = 1;
    parallel_for(rows.size(), jobs, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto& row = rows[i];
            FixtureVerdict v{row.line, row.p, row.expected, std::nullopt, false, row.error};
            if (row.error.empty()) {
                try {
                    const unsigned bound = default_bound(row.f->nvars()).value_or(fallback_bound);
                    const auto r = compute_height({row.p, *row.f, bound}, inner);
                    v.actual = r.height;
                    v.pass = r.height == row.expected;
                } catch (const std::exception& ex) {
                    v.error = ex.what();
                }
            }
            out[i] = std::move(v);
        }
    });
    return out;
}

}  // namespace qfs
