#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "mcpsel/config.hpp"

namespace mcpsel {

// Runs f(0..n-1); results must be written to per-index slots so the outcome
// does not depend on scheduling.
template <class F>
void parallel_for(int n, F&& f) {
    unsigned t = std::min<unsigned>(thread_cap(), n > 0 ? unsigned(n) : 1u);
    if (t <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace mcpsel
