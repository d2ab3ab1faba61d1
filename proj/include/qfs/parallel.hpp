// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Minimal fork-join helpers over std::thread.

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qfs {

/// Worker count from QFS_JOBS, else the hardware concurrency (at least 1).
[[nodiscard]] inline unsigned default_jobs() {
    if (const char* env = std::getenv("QFS_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// 0 means "use default_jobs()".
[[nodiscard]] inline unsigned resolve_jobs(unsigned jobs) { return jobs == 0 ? default_jobs() : jobs; }

/// Calls fn(begin, end) on contiguous slices of [0, n) from up to `jobs`
/// threads. The first exception thrown by any slice is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    jobs = resolve_jobs(jobs);
    const std::size_t workers = std::min<std::size_t>(jobs, n);
    if (workers <= 1) {
        if (n != 0) fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
        threads.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace qfs
