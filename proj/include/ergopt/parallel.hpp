#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ergopt {

// Worker cap: explicit argument, then ERGOPT_THREADS, then the hardware.
inline int thread_count(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ERGOPT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

inline int& default_threads() {
    static int value = 0;  // 0 = resolve lazily from the environment
    return value;
}

inline void set_default_threads(int n) { default_threads() = n; }

// Static block partition; f(i) must write only to slot i of shared output,
// which keeps results identical for every worker count.  The first exception
// thrown by any worker is rethrown on the calling thread.
template <class F>
void parallel_for(long n, F&& f, int threads = 0) {
    if (n <= 0) return;
    int workers = thread_count(threads > 0 ? threads : default_threads());
    if (workers > n) workers = static_cast<int>(n);
    if (workers <= 1 || n < 4) {
        for (long i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    long chunk = (n + workers - 1) / workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        long lo = w * chunk;
        long hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f, &first_error, &error_mutex]() {
            try {
                for (long i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ergopt
