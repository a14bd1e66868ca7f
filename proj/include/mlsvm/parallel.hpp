#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mlsvm {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Chunked parallel loop over [begin, end). f(i) must only write to slots owned
// by index i; the first exception thrown by any worker is rethrown.
template <typename F>
void parallel_for(std::size_t begin, std::size_t end, int threads, F&& f) {
    const std::size_t n = end > begin ? end - begin : 0;
    const int nt = std::min<std::size_t>(resolve_threads(threads), n);
    if (nt <= 1) {
        for (std::size_t i = begin; i < end; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const std::size_t lo = begin + chunk * t;
        const std::size_t hi = std::min(end, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace mlsvm
