// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Quasi-F-split height of a Calabi-Yau hypersurface f = 0 over F_p
/// (f homogeneous of degree n in n variables).

#include <cstdint>
#include <optional>
#include <string>

#include "qfs/delta.hpp"
#include "qfs/errors.hpp"
#include "qfs/modmatrix.hpp"
#include "qfs/mts.hpp"
#include "qfs/poly.hpp"

namespace qfs {

/// Known bound on finite heights: 10 for quartic K3 surfaces, nothing otherwise.
[[nodiscard]] inline std::optional<unsigned> default_bound(unsigned n) {
    if (n == 4) return 10;
    return std::nullopt;
}

struct SurfaceProblem {
    std::uint32_t p;
    FpPoly f;
    unsigned bound;
};

/// height == nullopt means infinity, i.e. no finite height <= bound_used.
struct HeightResult {
    std::optional<unsigned> height;
    unsigned bound_used = 0;
    unsigned iterations = 0;

    [[nodiscard]] bool infinite() const noexcept { return !height.has_value(); }
    friend bool operator==(const HeightResult&, const HeightResult&) = default;
};

[[nodiscard]] inline std::string format_height(std::optional<unsigned> h) { return h ? std::to_string(*h) : "inf"; }

enum class HeightMethod { naive, matrix };

struct HeightOptions {
    HeightMethod method = HeightMethod::matrix;
    MtsAlgorithm mts = MtsAlgorithm::wics;
    PowerMethod power = PowerMethod::automatic;
    unsigned jobs = 1;
};

/// Layout wide enough for every exponent the pipeline produces: Delta * g has
/// degree n(p^2 - 1).
[[nodiscard]] inline Layout pipeline_layout(unsigned n, std::uint32_t p) {
    return Layout::for_max_exponent(n, std::uint64_t{n} * (std::uint64_t{p} * p - 1));
}

/// f^{p-1}, the Fedder verdict on it, and (when needed) Delta_1(f^{p-1}).
struct SurfaceData {
    std::uint32_t p;
    unsigned n;
    FpPoly g;
    bool f_split;
    std::optional<FpPoly> delta;
};

inline void check_problem(const SurfaceProblem& prob) {
    if (!is_prime(prob.p)) throw DomainError("p must be prime");
    if (prob.f.ring().modulus != prob.p) throw DomainError("polynomial is not over F_p");
    const unsigned n = prob.f.nvars();
    if (n < 2) throw DomainError("need at least two variables");
    if (prob.f.degree() != n) {
        throw DomainError("not Calabi-Yau: degree " + std::to_string(prob.f.degree()) + " in " + std::to_string(n) +
                          " variables");
    }
    if (prob.f.is_zero()) throw DomainError("the zero polynomial does not define a hypersurface");
}

[[nodiscard]] inline SurfaceData prepare_surface(const SurfaceProblem& prob, PowerMethod power = PowerMethod::automatic,
                                                 bool need_delta = false) {
    check_problem(prob);
    const unsigned n = prob.f.nvars();
    const FpPoly f = relayout(prob.f, pipeline_layout(n, prob.p));
    SurfaceData data{prob.p, n, power_mod_p(f, prob.p - 1), false, std::nullopt};
    data.f_split = fedder_survives(data.g, n, prob.p);
    if (!data.f_split || need_delta) data.delta = delta1_of_power(f, prob.p - 1, power);
    return data;
}

/// Literal loop: g <- u(Delta g) with the Fedder test after each step.
[[nodiscard]] inline HeightResult height_naive(const SurfaceProblem& prob, const HeightOptions& opt = {}) {
    const SurfaceData data = prepare_surface(prob, opt.power);
    HeightResult res{std::nullopt, prob.bound, 0};
    if (data.f_split) {
        res.height = 1;
        return res;
    }
    const FpPoly& delta = *data.delta;
    FpPoly g = data.g;
    for (unsigned h = 2; h <= prob.bound; ++h) {
        g = split_u(schoolbook_mul(delta, g), prob.p);
        ++res.iterations;
        if (fedder_survives(g, data.n, prob.p)) {
            res.height = h;
            return res;
        }
    }
    return res;
}

/// The operator g -> u(Delta g) on S_{n(p-1)} for a prepared surface.
[[nodiscard]] inline MtsMatrix surface_matrix(const SurfaceData& data, MtsAlgorithm alg, unsigned jobs = 1) {
    if (!data.delta) throw DomainError("surface data has no Delta");
    const std::uint64_t d = std::uint64_t{data.n} * (data.p - 1);
    auto m = build_mts(alg, *data.delta, d, data.p, {jobs, nullptr});
    if (!m) throw ArithmeticInvariantError("multiply-then-split map has no target degree");
    return std::move(*m);
}

/// Same answer as height_naive, iterating one fixed matrix on coordinate vectors.
[[nodiscard]] inline HeightResult height_matrix(const SurfaceProblem& prob, const HeightOptions& opt = {}) {
    const SurfaceData data = prepare_surface(prob, opt.power);
    HeightResult res{std::nullopt, prob.bound, 0};
    if (data.f_split) {
        res.height = 1;
        return res;
    }
    if (prob.bound < 2) return res;
    const MtsMatrix m = surface_matrix(data, opt.mts, opt.jobs);
    const std::size_t i = m.source->index_of(data.g.layout().uniform(data.p - 1));
    const OverflowBudget budget = word_budget(data.p);
    DenseVector v = to_dense(data.g, m.source);
    for (unsigned h = 2; h <= prob.bound; ++h) {
        v = matvec(m, v, budget, 0, opt.jobs);
        ++res.iterations;
        if (v.values[i] != 0) {
            res.height = h;
            return res;
        }
    }
    return res;
}

[[nodiscard]] inline HeightResult compute_height(const SurfaceProblem& prob, const HeightOptions& opt = {}) {
    return opt.method == HeightMethod::naive ? height_naive(prob, opt) : height_matrix(prob, opt);
}

}  // namespace qfs
