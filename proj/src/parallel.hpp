#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mkernel::detail {

// Worker count: MKERNEL_THREADS when set to a positive integer, else the hardware concurrency.
inline unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("MKERNEL_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap > 0) {
                n = static_cast<unsigned>(cap);
            }
        } catch (const std::exception &) {
        }
    }
    return n;
}

// Runs body(i) for i in [0, count). Each index is visited by exactly one thread,
// so bodies writing disjoint outputs stay deterministic.
template <class Body>
void parallel_for(std::size_t count, Body &&body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1 || count < 64) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) {
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace mkernel::detail
