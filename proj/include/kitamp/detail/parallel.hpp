#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace kitamp::detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Runs fn(k) for k in [0, n) across hardware threads; results land by index,
// so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t k = w; k < n; k += workers) fn(k);
        }));
    for (auto& j : jobs) j.get();
}

}  // namespace kitamp::detail
