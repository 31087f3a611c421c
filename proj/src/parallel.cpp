#include "treeanova/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace treeanova {

int resolve_thread_count(int requested) {
    int threads = requested;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    if (const char* cap_text = std::getenv("TREE_ANOVA_THREADS")) {
        const int cap = std::atoi(cap_text);
        if (cap >= 1) threads = std::min(threads, cap);
    }
    return std::max(threads, 1);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, int)>& fn) {
    if (count == 0) return;
    const int workers =
        std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::size_t>(
                                               count, 1024))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, 0);
        return;
    }

    // indices are handed out in small blocks
    constexpr std::size_t kBlock = 8;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&](int worker) {
        for (;;) {
            const std::size_t begin = next.fetch_add(kBlock);
            if (begin >= count || failed.load(std::memory_order_relaxed)) return;
            const std::size_t end = std::min(begin + kBlock, count);
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i, worker);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace treeanova
