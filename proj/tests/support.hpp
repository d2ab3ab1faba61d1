// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shared helpers for the unit and acceptance tests.

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qfs/qfs.hpp"

namespace qfs::testing {

/// Random homogeneous form with coefficients in [0, cap); each monomial is
/// kept with probability `density`.
inline ModPoly random_form(std::mt19937_64& rng, unsigned n, std::uint64_t degree, std::uint64_t cap,
                           const Layout& layout, double density = 0.5) {
    std::uniform_int_distribution<std::uint64_t> coeff(1, cap - 1);
    std::bernoulli_distribution keep(density);
    std::vector<ModPoly::term_type> terms;
    for (auto t : wics(degree, layout)) {
        if (keep(rng)) terms.push_back({coeff(rng), t});
    }
    (void)n;
    return ModPoly(ResidueRing{cap}, layout, degree, std::move(terms));
}

inline IntPoly random_int_form(std::mt19937_64& rng, unsigned n, std::uint64_t degree, std::uint64_t cap,
                               const Layout& layout, double density = 0.5) {
    return lift_to_integers(random_form(rng, n, degree, cap, layout, density));
}

inline FpPoly fermat(unsigned n, std::uint32_t p, std::uint64_t degree) {
    const Layout layout = Layout::for_max_exponent(n, degree);
    std::vector<FpPoly::term_type> terms;
    for (unsigned i = 0; i < n; ++i) {
        std::vector<std::uint32_t> e(n, 0);
        e[i] = static_cast<std::uint32_t>(degree);
        terms.push_back({1, layout.pack(e)});
    }
    return FpPoly(prime_field(p), layout, degree, std::move(terms));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace qfs::testing
