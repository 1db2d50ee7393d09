#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <thread>
#include <vector>

namespace stochexp {

/// Neumaier-compensated accumulator. Used for every running sum that feeds a
/// tolerance-gated identity, and for the ordered reductions that make results
/// independent of the worker count.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

[[nodiscard]] inline double compensated_total(std::span<const double> xs) {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

/// log(sum(exp(x))) over a fixed-order range; stable for widely spread x.
[[nodiscard]] inline double log_sum_exp(std::span<const double> xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    CompensatedSum acc;
    for (double x : xs) acc.add(std::exp(x - mx));
    return mx + std::log(acc.value());
}

/// Runs fn(i) for i in [0, n). Work is dealt in fixed 256-item chunks whose
/// assignment to workers is the only nondeterministic part, so fn must write
/// exclusively to slot i of preallocated output. All reductions happen after
/// the join, in index order, which makes every statistic bit-identical for
/// any worker count.
template <typename Fn>
void parallel_for_indexed(std::size_t n, unsigned n_threads, Fn&& fn) {
    constexpr std::size_t kChunk = 256;
    if (n == 0) return;
    if (n_threads < 1) n_threads = 1;
    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    const unsigned workers =
        unsigned(std::min<std::size_t>(n_threads, n_chunks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            const std::size_t lo = c * kChunk;
            const std::size_t hi = std::min(n, lo + kChunk);
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(drain);
}

}  // namespace stochexp
