#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace evfield {

//! Number of worker threads; 0 selects the hardware concurrency.
struct ExecutionOptions
{
    unsigned threads = 0;

    [[nodiscard]] unsigned resolved() const
    {
        return threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    }
};

//! Runs fn(i) for i in [0, n). Work items must be independent.
template <class Fn>
void parallel_for(std::size_t n, const ExecutionOptions& exec, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(exec.resolved(), n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    if (!failed.exchange(true))
                    {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

} // namespace evfield
