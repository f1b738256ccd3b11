#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bpsim {

// Stream splitting: derive independent engine seeds from (seed, index) so
// that per-run / per-movement streams never depend on draw order elsewhere.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

// Uniform in (0, 1]: never 0 so logs are safe.
inline double uniform_pos(std::mt19937_64& eng) {
    const std::uint64_t r = eng();
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& eng, double mean) {
    return -mean * std::log(uniform_pos(eng));
}

// Knuth's product method; fixed draw count behavior across platforms,
// unlike std::poisson_distribution.
inline long poisson(std::mt19937_64& eng, double mean) {
    if (mean <= 0) return 0;
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        long n = 0;
        double prod = uniform_pos(eng);
        while (prod > limit) {
            ++n;
            prod *= uniform_pos(eng);
        }
        return n;
    }
    // Split large means so the product never underflows.
    const long half = poisson(eng, mean / 2.0);
    return half + poisson(eng, mean - mean / 2.0);
}

}  // namespace bpsim
