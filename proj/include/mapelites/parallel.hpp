#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "domains/domain.hpp"

namespace mapelites {

/// Runs f(i) for i in [0, n) on up to `threads` threads. Results must be
/// written to per-index storage; the call order is unspecified.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& f)
{
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads - 1);
        for (std::size_t t = 1; t < threads; ++t)
            pool.emplace_back(worker);
        worker();
    }
    if (error)
        std::rethrow_exception(error);
}

/// Evaluates a batch of genomes, in parallel when threads > 1. Slot i of the
/// result is empty when genome i threw or produced a non-finite fitness or
/// descriptor.
template <Domain D>
std::vector<std::optional<Evaluation>> evaluate_batch(const D& domain, std::span<const typename D::Genome> genomes,
                                                      std::size_t threads)
{
    std::vector<std::optional<Evaluation>> out(genomes.size());
    const std::size_t dims = domain.descriptor_dims();
    parallel_for(genomes.size(), threads, [&](std::size_t i) {
        try {
            Evaluation e = domain.evaluate(genomes[i]);
            if (e.valid(dims))
                out[i] = std::move(e);
        } catch (const std::exception&) {
            // discarded, counted by the caller
        }
    });
    return out;
}

} // namespace mapelites
