// Counter-based pseudo-randomness. Every consumer derives its own stream from
// a master seed plus a label path, so per-scale / per-trial draws are
// reproducible and order-independent.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "folnerlab/common.hpp"

namespace folnerlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stateless value at an index of a keyed stream. Used for lazy coordinate
// paths (Bernoulli shifts) where random access matters.
inline std::uint64_t value_at(std::uint64_t key, std::uint64_t index) {
    return mix64(key + index * kGolden);
}

// zigzag map Z -> N so paths indexed by group elements cover negatives too
inline std::uint64_t zigzag(std::int64_t n) {
    return (static_cast<std::uint64_t>(n) << 1) ^ static_cast<std::uint64_t>(n >> 63);
}

inline double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

struct Stream {
    std::uint64_t key = 0;
    std::uint64_t ctr = 0;

    std::uint64_t next_u64() { return value_at(key, ctr++); }
    double next_unit() { return unit_from_bits(next_u64()); }  // [0,1)
};

// Key derivation: fold labels into the master seed one mix at a time.
inline std::uint64_t derive_key(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix64(master ^ 0x5851F42D4C957F2Dull);
    std::uint64_t depth = 1;
    for (std::uint64_t label : path)
        key = mix64(key ^ mix64(label + depth++ * kGolden));
    return key;
}

inline Stream derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Stream{derive_key(master, path), 0};
}

// +-1 coordinate of a keyed iid path at position n (n ranges over Z).
inline double pm1_at(std::uint64_t key, std::int64_t n) {
    return (value_at(key, zigzag(n)) >> 63) ? 1.0 : -1.0;
}

// Poisson sampling. Exact CDF-walk inversion for small lambda; Hormann's
// PTRS transformed rejection (normal-shaped proposal) for large lambda.
inline long poisson_inversion(Stream& s, double lambda) {
    double u = s.next_unit();
    double p = std::exp(-lambda);
    double cum = p;
    long k = 0;
    while (u > cum) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cum += p;
        if (k > 2000) break;  // unreachable for lambda < 30, guards FP stall
    }
    return k;
}

inline long poisson_ptrs(Stream& s, double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = s.next_unit() - 0.5;
        double v = s.next_unit();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            kf * loglam - lambda - std::lgamma(kf + 1.0))
            return static_cast<long>(kf);
    }
}

inline long poisson(Stream& s, double lambda) {
    if (lambda < 0.0) throw UsageError("poisson: negative intensity");
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) return poisson_inversion(s, lambda);
    return poisson_ptrs(s, lambda);
}

}  // namespace folnerlab::rng
