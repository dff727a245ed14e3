#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hpg::detail {

// Runs work(i) for i in [0, n) on up to `workers` threads with strided
// indices. The first captured exception is rethrown after all threads join.
template <class Work>
void parallel_for(std::size_t n, unsigned workers, Work&& work) {
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n_workers);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += n_workers) work(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace hpg::detail
