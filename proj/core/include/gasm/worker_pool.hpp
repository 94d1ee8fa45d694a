#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace gasm {

// Runs fn(worker_id) on `num_workers` threads and joins them. The first
// exception thrown by any worker is rethrown on the caller.
inline void run_workers(int num_workers, const std::function<void(int)>& fn) {
    if (num_workers == 1) {
        fn(0);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(num_workers));
    std::exception_ptr error;
    std::mutex error_mu;
    for (int w = 0; w < num_workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                fn(w);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

// Splits [0, n) into `parts` contiguous slices; returns [begin, end) of slice i.
inline std::pair<std::size_t, std::size_t> slice(std::size_t n, int parts, int i) {
    std::size_t base = n / static_cast<std::size_t>(parts);
    std::size_t rem = n % static_cast<std::size_t>(parts);
    std::size_t ui = static_cast<std::size_t>(i);
    std::size_t begin = ui * base + std::min(ui, rem);
    std::size_t end = begin + base + (ui < rem ? 1 : 0);
    return {begin, end};
}

}  // namespace gasm
