#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace depthpca {

inline std::size_t worker_count() {
    if (const char* env = std::getenv("DEPTHPCA_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over a contiguous partition of [0, n). Workers write
// to disjoint index ranges only, so results never depend on the schedule or
// the thread count.
inline void parallel_for(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::min(worker_count(), n == 0 ? std::size_t{1} : n);
    if (workers <= 1 || n < 2) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace depthpca
