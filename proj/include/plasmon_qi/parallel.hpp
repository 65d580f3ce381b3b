// parallel.hpp: static-partition parallel loop over an index range
//
// Every index writes only its own output slot, so results do not depend on the
// thread count. The exception from the lowest failing index is rethrown.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace plasmon_qi {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, resolve_threads(threads)), std::max<std::size_t>(count, 1));
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](std::size_t w) {
        // interleaved assignment balances cost that varies smoothly with the index
        for (std::size_t i = w; i < count; i += workers) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace plasmon_qi
