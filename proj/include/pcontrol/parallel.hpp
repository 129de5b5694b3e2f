#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pcontrol::detail {

// Runs fn(i) for i in [0, n) on `threads` workers (0 = hardware concurrency).
// Work is strided by index; callers write only to slot i, so the outcome never
// depends on the schedule.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    }
}

}  // namespace pcontrol::detail
