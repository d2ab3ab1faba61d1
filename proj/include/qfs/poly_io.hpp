// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Text formats for polynomials over F_p.
///
/// Infix: `3*x1^2*x2^2 + x3^4 + x1*x2*x3*x4`. Variables are x1..xn; a missing
/// coefficient or exponent means 1. Whitespace is ignored.
/// Compact: one term per line, `c:a1,a2,...,an`.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qfs/errors.hpp"
#include "qfs/poly.hpp"

namespace qfs {

namespace detail {

struct RawTerm {
    std::uint64_t coeff;
    std::vector<std::uint32_t> exps;  // indexed by variable, grows on demand
    std::size_t position;
};

class InfixParser {
public:
    InfixParser(std::string_view text, std::uint64_t p) : text_(text), p_(p) {}

    std::vector<RawTerm> parse() {
        std::vector<RawTerm> terms;
        skip();
        if (at_end()) throw ParseError("empty polynomial", pos_);
        while (true) {
            terms.push_back(term());
            skip();
            if (at_end()) break;
            if (text_[pos_] != '+') throw ParseError(std::string("expected '+' but found '") + text_[pos_] + "'", pos_);
            ++pos_;
        }
        return terms;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }
    void skip() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool digit() const { return !at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_])); }

    /// Digits reduced mod `mod` (0 = no reduction, fail on overflow).
    std::uint64_t number(std::uint64_t mod) {
        skip();
        if (!digit()) throw ParseError("expected a number", pos_);
        const std::size_t start = pos_;
        std::uint64_t v = 0;
        while (digit()) {
            const std::uint64_t dgt = static_cast<std::uint64_t>(text_[pos_] - '0');
            if (mod != 0) {
                v = (v * 10 + dgt) % mod;
            } else {
                if (v > (UINT32_MAX - dgt) / 10) throw ParseError("number too large", start);
                v = v * 10 + dgt;
            }
            ++pos_;
        }
        return v;
    }

    void factor(RawTerm& t) {
        skip();
        if (at_end() || text_[pos_] != 'x') throw ParseError("expected a variable x1, x2, ...", pos_);
        const std::size_t at = pos_;
        ++pos_;
        if (!digit()) throw ParseError("variable index missing after 'x'", pos_);
        const std::uint64_t index = number(0);
        if (index < 1 || index > max_vars) {
            throw ParseError("variable index must be between 1 and " + std::to_string(max_vars), at);
        }
        std::uint64_t e = 1;
        skip();
        if (!at_end() && text_[pos_] == '^') {
            ++pos_;
            e = number(0);
        }
        if (t.exps.size() < index) t.exps.resize(index, 0);
        t.exps[index - 1] += static_cast<std::uint32_t>(e);
    }

    RawTerm term() {
        skip();
        RawTerm t{1 % p_, {}, pos_};
        bool need_factor = true;
        if (digit()) {
            t.coeff = number(p_);
            skip();
            if (at_end() || text_[pos_] != '*') return t;
            ++pos_;
        }
        while (need_factor) {
            factor(t);
            skip();
            need_factor = !at_end() && text_[pos_] == '*';
            if (need_factor) ++pos_;
        }
        return t;
    }

    std::string_view text_;
    std::uint64_t p_;
    std::size_t pos_ = 0;
};

inline FpPoly assemble(std::vector<RawTerm> raw, std::uint64_t p, std::optional<unsigned> nvars) {
    std::size_t seen = 1;
    for (const auto& t : raw) seen = std::max(seen, t.exps.size());
    const std::size_t n = nvars.value_or(static_cast<unsigned>(seen));
    if (nvars && seen > *nvars && std::any_of(raw.begin(), raw.end(), [&](const RawTerm& t) {
            return std::any_of(t.exps.begin() + std::min(t.exps.size(), n), t.exps.end(), [](auto e) { return e != 0; });
        })) {
        throw DomainError("polynomial mentions a variable beyond --nvars " + std::to_string(n));
    }
    if (n < 1 || n > max_vars) throw DomainError("variable count out of range");
    std::optional<std::uint64_t> degree;
    std::uint64_t top = 1;
    for (auto& t : raw) {
        t.exps.resize(n, 0);
        std::uint64_t s = 0;
        for (auto e : t.exps) {
            s += e;
            top = std::max<std::uint64_t>(top, e);
        }
        if (degree && *degree != s) {
            throw DomainError("polynomial is not homogeneous: term at " + std::to_string(t.position) + " has degree " +
                              std::to_string(s) + ", expected " + std::to_string(*degree));
        }
        degree = s;
    }
    const Layout layout = Layout::for_max_exponent(static_cast<unsigned>(n), top);
    std::vector<FpPoly::term_type> terms;
    for (const auto& t : raw) terms.push_back({t.coeff, layout.pack(t.exps)});
    return FpPoly(prime_field(p), layout, degree.value_or(0), std::move(terms));
}

}  // namespace detail

/// Parses the infix format over F_p. The variable count is the highest index
/// mentioned unless `nvars` overrides it.
[[nodiscard]] inline FpPoly parse_polynomial(std::string_view text, std::uint64_t p,
                                             std::optional<unsigned> nvars = std::nullopt) {
    (void)prime_field(p);
    return detail::assemble(detail::InfixParser(text, p).parse(), p, nvars);
}

/// Terms in lex-descending order; coefficient 1 is omitted except on constants.
[[nodiscard]] inline std::string format_polynomial(const FpPoly& f) {
    if (f.is_zero()) return "0";
    std::ostringstream out;
    const auto terms = f.terms();
    for (std::size_t k = terms.size(); k-- > 0;) {
        if (k + 1 != terms.size()) out << " + ";
        const auto e = f.layout().unpack(terms[k].exps);
        bool first = true;
        if (terms[k].coeff != 1 || f.degree() == 0) {
            out << terms[k].coeff;
            first = false;
        }
        for (unsigned i = 0; i < f.nvars(); ++i) {
            if (e[i] == 0) continue;
            if (!first) out << '*';
            out << 'x' << (i + 1);
            if (e[i] != 1) out << '^' << e[i];
            first = false;
        }
    }
    return out.str();
}

/// Compact format: `c:a1,...,an` per line; blank lines and `#` comments skipped.
/// ParseError positions are 1-based line numbers.
[[nodiscard]] inline FpPoly parse_compact(std::string_view text, std::uint64_t p) {
    (void)prime_field(p);
    std::vector<detail::RawTerm> raw;
    std::size_t line_no = 0;
    std::optional<std::size_t> width;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }), line.end());
        if (line.empty() || line[0] == '#') continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected 'c:a1,...,an'", line_no);
        detail::RawTerm t{0, {}, line_no};
        auto read = [&](std::string_view s, std::uint64_t mod) {
            if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
                throw ParseError("expected a nonnegative integer", line_no);
            }
            std::uint64_t v = 0;
            for (char c : s) {
                const std::uint64_t dgt = static_cast<std::uint64_t>(c - '0');
                if (mod != 0) {
                    v = (v * 10 + dgt) % mod;
                } else {
                    if (v > (UINT32_MAX - dgt) / 10) throw ParseError("exponent too large", line_no);
                    v = v * 10 + dgt;
                }
            }
            return v;
        };
        t.coeff = read(std::string_view(line).substr(0, colon), p);
        std::string_view rest = std::string_view(line).substr(colon + 1);
        while (true) {
            const auto comma = rest.find(',');
            t.exps.push_back(static_cast<std::uint32_t>(read(rest.substr(0, comma), 0)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (width && *width != t.exps.size()) throw ParseError("inconsistent number of exponents", line_no);
        if (t.exps.size() > max_vars) throw ParseError("too many variables", line_no);
        width = t.exps.size();
        raw.push_back(std::move(t));
    }
    if (raw.empty()) throw ParseError("no terms", line_no);
    return detail::assemble(std::move(raw), p, static_cast<unsigned>(*width));
}

[[nodiscard]] inline std::string format_compact(const FpPoly& f) {
    std::ostringstream out;
    for (const auto& t : f.terms()) {
        const auto e = f.layout().unpack(t.exps);
        out << t.coeff << ':';
        for (unsigned i = 0; i < f.nvars(); ++i) out << (i ? "," : "") << e[i];
        out << '\n';
    }
    return out.str();
}

}  // namespace qfs
