// Shared plumbing: error types, compensated summation, bounded parallel map.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace folnerlab {

inline constexpr const char* kVersion = "0.1.0";

// Bad arguments, mismatched group models, out-of-contract calls.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A lookup left the declared window/domain of a weight or sample.
struct DomainWindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A set operation would exceed the element or pairwise-work budget.
struct ScaleCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed config file / CLI usage. Maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested closed form does not exist in the catalog.
struct NoDecompositionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Neumaier variant of Kahan summation. Order-sensitive like any float sum,
// so callers that promise determinism must feed it in a fixed order.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Thread cap: FOLNERLAB_THREADS wins, then hardware_concurrency, floor 1.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("FOLNERLAB_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

// Runs fn(i) for i in [0, n). Work is chunked over at most thread_budget()
// threads; results land in a caller-indexed buffer inside fn, so aggregation
// stays deterministic (callers reduce serially afterwards).
inline void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned workers = thread_budget();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace folnerlab
