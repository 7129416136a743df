#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace siqa {

/// Base class for all library errors; CLI maps these to nonzero exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};
struct ValueError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct DegenerateClusteringError : Error {
    using Error::Error;
};
struct UndefinedCorrelationError : Error {
    using Error::Error;
};
struct DivergenceError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Seeding and portable sampling helpers. All randomness in the library flows
// from one master seed, fanned out to named sub-seeds so independent stages
// (clustering, init, shuffle, dropout, synthesis) never share a stream.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t salt) {
    return splitmix64(master ^ splitmix64(salt));
}

inline std::uint64_t sub_seed(std::uint64_t master, std::string_view role) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : role) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return sub_seed(master, h);
}

/// Uniform double in [0, 1) built from the top 53 bits of the generator.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw ValueError("uniform_below: n must be positive");
    std::uint64_t x, r;
    do {
        x = rng();
        r = x % n;
    } while (x - r > std::uint64_t(-1) - n + 1);
    return r;
}

/// Standard normal via Marsaglia's polar method (second value discarded).
inline double standard_normal(std::mt19937_64& rng) {
    double u, v, s;
    do {
        u = 2.0 * uniform01(rng) - 1.0;
        v = 2.0 * uniform01(rng) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

/// Fisher-Yates shuffle with explicit sampling, stable across standard
/// library implementations.
template <class T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

/// Runs fn(0..n-1) on up to `workers` threads. Callers must write only to
/// per-index slots, which keeps results identical for any worker count.
/// The first exception thrown by fn is rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace siqa
