#ifndef HYPTSNE_PARALLEL_HPP
#define HYPTSNE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hyptsne {

/**
 * Run `fun(begin, end)` over contiguous chunks of [0, n) on up to `threads`
 * workers. Chunks are disjoint, so writes to per-index outputs need no locking.
 * The first exception thrown by any worker is rethrown on the caller.
 */
template<typename Function_>
void parallel_for(std::size_t n, int threads, Function_ fun) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        fun(std::size_t{0}, n);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    auto run = [&](std::size_t w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        try {
            fun(begin, end);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(run, w);
    }
    run(0);
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/** Thread count from HYPTSNE_THREADS, or 1 when unset or unparsable. */
int threads_from_environment();

}

#endif
