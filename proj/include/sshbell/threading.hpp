#pragma once
// Deterministic parallel orchestration: N workers pull job indices from an
// atomic counter and each job writes only to its own index-keyed slot, so
// results are identical for any worker count and completion order. The
// first exception thrown by any job is rethrown on the calling thread.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "sshbell/common.hpp"

namespace sshbell {

inline void run_indexed(std::int64_t njobs, int nworkers,
                        const std::function<void(std::int64_t)>& job) {
    if (nworkers < 1) throw config_error("worker count must be >= 1");
    if (njobs <= 0) return;
    if (nworkers == 1) {
        for (std::int64_t i = 0; i < njobs; ++i) job(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= njobs) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int n = static_cast<int>(
        std::min<std::int64_t>(nworkers, njobs));
    threads.reserve(n);
    for (int t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace sshbell
