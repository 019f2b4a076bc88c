#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tbg {

// Order-preserving parallel map. Each index is computed by exactly one worker
// and written to its own slot, so results do not depend on the worker count.
class ParallelMap {
public:
    explicit ParallelMap(int threads = 1) : threads_(std::max(1, threads)) {}

    int threads() const { return threads_; }

    template <class F>
    auto operator()(std::size_t n, F&& f) const -> std::vector<decltype(f(std::size_t{}))> {
        using T = decltype(f(std::size_t{}));
        std::vector<T> out(n);
        const std::size_t workers = std::min<std::size_t>(threads_, n);
        if (workers <= 1) {
            for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
            return out;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr err;
        std::mutex err_mu;
        auto work = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    out[i] = f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    next.store(n);
                }
            }
        };
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        pool.clear();
        if (err) std::rethrow_exception(err);
        return out;
    }

private:
    int threads_;
};

}  // namespace tbg
