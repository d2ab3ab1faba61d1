// SPDX-License-Identifier: Apache-2.0
// qfsheight: heights of Calabi-Yau hypersurfaces over F_p from the command line.
//
// Exit status: 0 ok, 1 verification mismatch, 2 input parse error,
// 3 domain error, 4 internal arithmetic failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfs/qfs.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

enum Exit : int { ok = 0, mismatch = 1, parse_failure = 2, domain_failure = 3, internal_failure = 4 };

/// Input that could not be read at all (missing file and the like).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// `@file` reads the polynomial from a file. Text containing ':' is taken
/// to be the compact `c:a,b,...` format.
qfs::FpPoly load_polynomial(const std::string& arg, std::uint32_t p, std::optional<unsigned> nvars) {
    const std::string text = !arg.empty() && arg[0] == '@' ? slurp(arg.substr(1)) : arg;
    if (text.find(':') != std::string::npos) {
        auto f = qfs::parse_compact(text, p);
        if (nvars && *nvars != f.nvars()) throw qfs::DomainError("--nvars disagrees with the compact exponent count");
        return f;
    }
    return qfs::parse_polynomial(text, p, nvars);
}

unsigned resolve_bound(std::optional<unsigned> bound, unsigned n) {
    if (bound) {
        if (*bound == 0) throw qfs::DomainError("--bound must be at least 1");
        return *bound;
    }
    if (auto b = qfs::default_bound(n)) return *b;
    throw qfs::DomainError("no known height bound for " + std::to_string(n) + " variables; pass --bound");
}

const std::map<std::string, qfs::MtsAlgorithm> mts_names{
    {"triv", qfs::MtsAlgorithm::triv}, {"merge", qfs::MtsAlgorithm::merge}, {"wics", qfs::MtsAlgorithm::wics}};
const std::map<std::string, qfs::HeightMethod> method_names{{"naive", qfs::HeightMethod::naive},
                                                            {"matrix", qfs::HeightMethod::matrix}};
const std::map<std::string, qfs::PowerMethod> power_names{{"auto", qfs::PowerMethod::automatic},
                                                          {"schoolbook", qfs::PowerMethod::schoolbook},
                                                          {"multimodular", qfs::PowerMethod::multimodular},
                                                          {"dense", qfs::PowerMethod::dense}};

json height_json(std::optional<unsigned> h) { return h ? json(*h) : json("inf"); }

void emit(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError("cannot write " + out_path);
    out << text;
}

// ---- height ---------------------------------------------------------------

struct HeightArgs {
    std::uint32_t p = 0;
    std::string poly;
    std::optional<unsigned> nvars;
    std::optional<unsigned> bound;
    std::string method = "matrix";
    std::string mts = "wics";
    std::string power = "auto";
    unsigned jobs = 0;
    bool json = false;
};

int run_height(const HeightArgs& a) {
    const qfs::FpPoly f = load_polynomial(a.poly, a.p, a.nvars);
    const unsigned bound = resolve_bound(a.bound, f.nvars());
    qfs::HeightOptions opt{method_names.at(a.method), mts_names.at(a.mts), power_names.at(a.power), qfs::resolve_jobs(a.jobs)};
    const auto t0 = Clock::now();
    const auto r = qfs::compute_height({a.p, f, bound}, opt);
    const double dt = seconds_since(t0);
    if (a.json) {
        json doc;
        doc["p"] = a.p;
        doc["n"] = f.nvars();
        doc["polynomial"] = qfs::format_polynomial(f);
        doc["bound"] = bound;
        doc["method"] = a.method;
        doc["mts"] = a.mts;
        doc["height"] = height_json(r.height);
        doc["iterations"] = r.iterations;
        doc["seconds"] = dt;
        emit(doc, "");
    } else {
        std::cout << "height: " << qfs::format_height(r.height) << "\n"
                  << "iterations: " << r.iterations << "\n"
                  << "bound: " << bound << "\n"
                  << "time: " << std::fixed << std::setprecision(3) << dt << " s\n";
    }
    return ok;
}

// ---- search ---------------------------------------------------------------

struct SearchArgs {
    std::uint32_t p = 0;
    unsigned n = 4;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;
    std::optional<unsigned> target;
    std::optional<unsigned> bound;
    std::string method = "matrix";
    unsigned jobs = 0;
    std::string out;
    bool json = false;
};

json search_json(const SearchArgs& a, const qfs::SearchConfig& cfg, const qfs::SearchResult& r) {
    json doc;
    doc["p"] = cfg.p;
    doc["n"] = cfg.n;
    doc["seed"] = cfg.seed;
    doc["jobs"] = cfg.jobs;
    doc["bound"] = cfg.bound;
    doc["requested"] = cfg.sample_count;
    json counts = json::object();
    for (unsigned h = 1; h <= r.histogram.bound; ++h) counts[std::to_string(h)] = r.histogram.counts[h - 1];
    counts["inf"] = r.histogram.infinite;
    doc["counts"] = counts;
    doc["total"] = r.histogram.total;
    doc["target_height"] = a.target ? json(*a.target) : json(nullptr);
    doc["target_reached"] = r.target_reached;
    json found = json::array();
    for (const auto& s : r.found) {
        found.push_back({{"worker", s.worker}, {"index", s.index}, {"height", s.height},
                         {"polynomial", qfs::format_polynomial(s.f)}});
    }
    doc["found"] = found;
    return doc;
}

int run_search(const SearchArgs& a) {
    qfs::SearchConfig cfg;
    cfg.p = a.p;
    cfg.n = a.n;
    cfg.sample_count = a.count;
    cfg.seed = a.seed;
    cfg.bound = resolve_bound(a.bound, a.n);
    cfg.target_height = a.target;
    cfg.jobs = qfs::resolve_jobs(a.jobs);
    cfg.height.method = method_names.at(a.method);
    const auto t0 = Clock::now();
    const auto r = qfs::run_search(cfg);
    const double dt = seconds_since(t0);
    const json doc = search_json(a, cfg, r);
    if (!a.out.empty()) emit(doc, a.out);
    if (a.json) {
        emit(doc, "");
    } else {
        std::cout << qfs::format_histogram(r.histogram, cfg.p);
        for (const auto& s : r.found) {
            std::cout << "found height " << s.height << " (worker " << s.worker << ", sample " << s.index
                      << "): " << qfs::format_polynomial(s.f) << "\n";
        }
        if (a.target) std::cout << "target height " << *a.target << (r.target_reached ? " reached\n" : " not reached\n");
        std::cout << "time: " << std::fixed << std::setprecision(3) << dt << " s\n";
    }
    return ok;
}

// ---- matrix ---------------------------------------------------------------

struct MatrixArgs {
    std::uint32_t p = 0;
    std::string poly;
    std::optional<unsigned> nvars;
    std::string mts = "wics";
    std::string power = "auto";
    std::string out;
    std::string format = "text";
    unsigned jobs = 0;
};

int run_matrix(const MatrixArgs& a) {
    const qfs::FpPoly f = load_polynomial(a.poly, a.p, a.nvars);
    const auto t0 = Clock::now();
    const auto data = qfs::prepare_surface({a.p, f, 1}, power_names.at(a.power), true);
    const auto m = qfs::surface_matrix(data, mts_names.at(a.mts), qfs::resolve_jobs(a.jobs));
    const double dt = seconds_since(t0);
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw InputError("cannot write " + a.out);
    if (a.format == "binary") {
        qfs::write_matrix_binary(out, m.matrix);
    } else {
        qfs::write_matrix_text(out, m.matrix);
    }
    if (!out.flush()) throw InputError("write failed: " + a.out);
    std::cout << "matrix: " << m.rows() << " x " << m.cols() << " over F_" << a.p << " (" << a.mts << ")\n"
              << "time: " << std::fixed << std::setprecision(3) << dt << " s\n";
    return ok;
}

// ---- verify ---------------------------------------------------------------

struct VerifyArgs {
    std::string fixtures;
    std::string method = "matrix";
    unsigned fallback_bound = 10;
    unsigned jobs = 0;
    bool json = false;
};

int run_verify(const VerifyArgs& a) {
    const auto rows = qfs::parse_fixtures(slurp(a.fixtures));
    qfs::HeightOptions opt;
    opt.method = method_names.at(a.method);
    const auto t0 = Clock::now();
    const auto verdicts = qfs::verify_fixtures(rows, opt, a.fallback_bound, qfs::resolve_jobs(a.jobs));
    const double dt = seconds_since(t0);

    std::size_t passed = 0, failed = 0, unparsed = 0;
    json list = json::array();
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        const bool parse_bad = !rows[i].error.empty();
        if (v.pass) {
            ++passed;
        } else if (parse_bad) {
            ++unparsed;
        } else {
            ++failed;
        }
        if (a.json) {
            list.push_back({{"line", v.line}, {"p", v.p}, {"expected", height_json(v.expected)},
                            {"actual", v.error.empty() ? height_json(v.actual) : json(nullptr)}, {"pass", v.pass},
                            {"error", v.error}});
            continue;
        }
        std::cout << "line " << v.line << ": ";
        if (!v.error.empty()) {
            std::cout << "ERROR " << v.error << "\n";
        } else {
            std::cout << "p=" << v.p << " expected " << qfs::format_height(v.expected) << " got "
                      << qfs::format_height(v.actual) << (v.pass ? " PASS" : " FAIL") << "\n";
        }
    }
    if (a.json) {
        emit(json{{"rows", list}, {"passed", passed}, {"failed", failed}, {"unparsed", unparsed}}, "");
    } else {
        std::cout << passed << "/" << verdicts.size() << " rows pass";
        if (unparsed) std::cout << ", " << unparsed << " unparsed";
        std::cout << " (" << std::fixed << std::setprecision(3) << dt << " s)\n";
    }
    if (unparsed) return parse_failure;
    return failed ? mismatch : ok;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::vector<std::uint32_t> primes{3, 5, 7};
    std::string what = "mts";
    unsigned reps = 10;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    bool json = false;
};

struct Timing {
    std::uint32_t p;
    std::string item;
    double mean;
    double best;
};

template <class F>
Timing time_reps(std::uint32_t p, std::string item, unsigned reps, F&& fn) {
    double total = 0, best = 0;
    for (unsigned r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        const double dt = seconds_since(t0);
        total += dt;
        best = r == 0 ? dt : std::min(best, dt);
    }
    return {p, std::move(item), total / reps, best};
}

int run_bench(const BenchArgs& a) {
    if (a.reps == 0) throw qfs::DomainError("--reps must be at least 1");
    std::vector<Timing> rows;
    for (const std::uint32_t p : a.primes) {
        if (!qfs::is_prime(p)) throw qfs::DomainError("bench primes must be prime");
        auto rng = qfs::worker_rng(a.seed, 0);
        const qfs::FpPoly f = qfs::sample_surface(rng, p, 4);
        if (a.what == "power") {
            for (const auto& [name, method] : power_names) {
                if (method == qfs::PowerMethod::dense && !qfs::dense_power_feasible(4, 4, (p - 1) * p, std::uint64_t{p} * p)) {
                    continue;
                }
                const auto g = qfs::relayout(f, qfs::pipeline_layout(4, p));
                rows.push_back(time_reps(p, name, a.reps, [&] { (void)qfs::delta1_of_power(g, p - 1, method); }));
            }
            continue;
        }
        const auto data = qfs::prepare_surface({p, f, 10}, qfs::PowerMethod::automatic, true);
        if (a.what == "mts") {
            for (const auto& [name, alg] : mts_names) {
                rows.push_back(time_reps(p, name, a.reps, [&] { (void)qfs::surface_matrix(data, alg, a.jobs); }));
            }
        } else if (a.what == "matvec") {
            const auto m = qfs::surface_matrix(data, qfs::MtsAlgorithm::wics, a.jobs);
            const auto v = qfs::to_dense(data.g, m.source);
            const auto budget = qfs::word_budget(p);
            rows.push_back(time_reps(p, "delayed", a.reps, [&] { (void)qfs::matvec(m, v, budget, 0, a.jobs); }));
            rows.push_back(time_reps(p, "reference", a.reps, [&] { (void)qfs::matvec_reference(m.matrix, v.values); }));
        } else {
            for (const auto& [name, method] : method_names) {
                qfs::HeightOptions opt;
                opt.method = method;
                opt.jobs = a.jobs;
                rows.push_back(time_reps(p, name, a.reps, [&] { (void)qfs::compute_height({p, f, 10}, opt); }));
            }
        }
    }
    if (a.json) {
        json list = json::array();
        for (const auto& t : rows) list.push_back({{"p", t.p}, {"item", t.item}, {"mean_s", t.mean}, {"min_s", t.best}});
        emit(json{{"what", a.what}, {"reps", a.reps}, {"seed", a.seed}, {"timings", list}}, "");
        return ok;
    }
    std::cout << std::setw(4) << "p" << std::setw(14) << a.what << std::setw(14) << "mean (s)" << std::setw(14)
              << "min (s)" << "\n";
    std::cout << std::scientific << std::setprecision(3);
    for (const auto& t : rows) {
        std::cout << std::setw(4) << t.p << std::setw(14) << t.item << std::setw(14) << t.mean << std::setw(14) << t.best
                  << "\n";
    }
    std::cout << "reps: " << a.reps << "\n";
    return ok;
}

template <class Map>
std::vector<std::string> keys(const Map& m) {
    std::vector<std::string> out;
    for (const auto& kv : m) out.push_back(kv.first);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-F-split heights of Calabi-Yau hypersurfaces over F_p"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qfsheight 0.1.0");

    const auto prime_check = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                const auto v = std::stoull(s);
                return qfs::is_prime(v) && v < 256 ? "" : "must be a prime below 256";
            } catch (...) {
                return "must be a prime below 256";
            }
        },
        "PRIME", "prime");

    HeightArgs ha;
    auto* height = app.add_subcommand("height", "Height of one hypersurface");
    height->add_option("--p", ha.p, "Characteristic")->required()->check(prime_check);
    height->add_option("--poly", ha.poly, "Polynomial text, or @file")->required();
    height->add_option("--nvars", ha.nvars, "Variable count when not all are mentioned")->check(CLI::Range(1u, 8u));
    height->add_option("--bound", ha.bound, "Largest height tested (default 10 for quartics)");
    height->add_option("--method", ha.method, "naive or matrix")->check(CLI::IsMember(keys(method_names)));
    height->add_option("--mts", ha.mts, "Matrix construction")->check(CLI::IsMember(keys(mts_names)));
    height->add_option("--power", ha.power, "Delta powering method")->check(CLI::IsMember(keys(power_names)));
    height->add_option("--jobs", ha.jobs, "Worker threads (0: QFS_JOBS or all cores)");
    height->add_flag("--json", ha.json, "Structured output");

    SearchArgs sa;
    auto* search = app.add_subcommand("search", "Random search and height histogram");
    search->add_option("--p", sa.p, "Characteristic")->required()->check(prime_check);
    search->add_option("--count", sa.count, "Number of samples")->required()->check(CLI::PositiveNumber);
    search->add_option("--seed", sa.seed, "RNG seed");
    search->add_option("--n", sa.n, "Variables (degree n forms)")->check(CLI::Range(2u, 8u));
    search->add_option("--bound", sa.bound, "Largest height tested (default 10 for quartics)");
    search->add_option("--target-height", sa.target, "Stop at the first surface of this height");
    search->add_option("--method", sa.method, "naive or matrix")->check(CLI::IsMember(keys(method_names)));
    search->add_option("--jobs", sa.jobs, "Workers (0: QFS_JOBS or all cores)");
    search->add_option("--out", sa.out, "Write the structured result here");
    search->add_flag("--json", sa.json, "Structured output on stdout");

    MatrixArgs ma;
    auto* matrix = app.add_subcommand("matrix", "Export the multiply-then-split matrix");
    matrix->add_option("--p", ma.p, "Characteristic")->required()->check(prime_check);
    matrix->add_option("--poly", ma.poly, "Polynomial text, or @file")->required();
    matrix->add_option("--nvars", ma.nvars, "Variable count when not all are mentioned")->check(CLI::Range(1u, 8u));
    matrix->add_option("--mts", ma.mts, "Matrix construction")->check(CLI::IsMember(keys(mts_names)));
    matrix->add_option("--power", ma.power, "Delta powering method")->check(CLI::IsMember(keys(power_names)));
    matrix->add_option("--out", ma.out, "Output file")->required();
    matrix->add_option("--format", ma.format, "text or binary")->check(CLI::IsMember({"text", "binary"}));
    matrix->add_option("--jobs", ma.jobs, "Worker threads");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Check a fixture table");
    verify->add_option("--fixtures", va.fixtures, "Fixture file (p ; height ; polynomial)")->required();
    verify->add_option("--method", va.method, "naive or matrix")->check(CLI::IsMember(keys(method_names)));
    verify->add_option("--bound", va.fallback_bound, "Bound for variable counts without a known one")
        ->check(CLI::PositiveNumber);
    verify->add_option("--jobs", va.jobs, "Rows checked in parallel");
    verify->add_flag("--json", va.json, "Structured output");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Timings (informational)");
    bench->add_option("--p", ba.primes, "Characteristics")->check(prime_check);
    bench->add_option("--what", ba.what, "power, mts, matvec or height")
        ->check(CLI::IsMember({"power", "mts", "matvec", "height"}));
    bench->add_option("--reps", ba.reps, "Repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--seed", ba.seed, "Seed for the benchmark surface");
    bench->add_option("--jobs", ba.jobs, "Worker threads");
    bench->add_flag("--json", ba.json, "Structured output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return parse_failure;
    }

    try {
        if (*height) return run_height(ha);
        if (*search) return run_search(sa);
        if (*matrix) return run_matrix(ma);
        if (*verify) return run_verify(va);
        if (*bench) return run_bench(ba);
    } catch (const qfs::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return parse_failure;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return parse_failure;
    } catch (const qfs::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return domain_failure;
    } catch (const qfs::ArithmeticInvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal_failure;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal_failure;
    }
    return ok;
}
