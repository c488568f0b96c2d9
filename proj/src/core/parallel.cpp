// Copyright (c) 2026, The Tessera Authors
// SPDX-License-Identifier: Apache-2.0

#include "tessera/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tessera {

namespace {

int default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> g_threads{default_threads()};

// Runs fn(t) on `count` threads (the calling thread takes t = 0) and
// rethrows the first exception.
template <class Fn>
void run_threads(int count, Fn&& fn) {
    std::exception_ptr error;
    std::mutex error_mu;
    auto guarded = [&](int t) {
        try {
            fn(t);
        } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(count - 1));
    for (int t = 1; t < count; ++t) workers.emplace_back(guarded, t);
    guarded(0);
    workers.clear();
    if (error) std::rethrow_exception(error);
}

} // namespace

int num_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }

void set_num_threads(int n) noexcept { g_threads.store(n > 0 ? n : default_threads()); }

void parallel_for(std::int64_t n, std::int64_t grain,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
    if (n <= 0) return;
    grain = std::max<std::int64_t>(grain, 1);
    std::int64_t parts = std::min<std::int64_t>(num_threads(), (n + grain - 1) / grain);
    if (parts <= 1) {
        body(0, n);
        return;
    }
    run_threads(static_cast<int>(parts), [&](int t) {
        std::int64_t begin = n * t / parts;
        std::int64_t end = n * (t + 1) / parts;
        if (begin < end) body(begin, end);
    });
}

void parallel_tasks(std::int64_t tasks, const std::function<void(std::int64_t)>& body) {
    if (tasks <= 0) return;
    int threads = static_cast<int>(std::min<std::int64_t>(num_threads(), tasks));
    if (threads <= 1) {
        for (std::int64_t t = 0; t < tasks; ++t) body(t);
        return;
    }
    std::atomic<std::int64_t> next{0};
    run_threads(threads, [&](int) {
        for (std::int64_t t = next++; t < tasks; t = next++) body(t);
    });
}

} // namespace tessera
