#ifndef RADCS_RNG_HPP
#define RADCS_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace radcs {

// Deterministic random streams. Every random quantity in the library is
// derived from a single user seed through mix64/derive_stream, so partial
// re-runs (e.g. re-sensing one block) agree with full runs bit for bit.

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash a (seed, a, b, c) tuple into an independent stream seed.
inline constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a,
                                             std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xc2b2ae3d27d4eb4fULL;
    h ^= splitmix64(s);
    s ^= c + 0x165667b19e3779f9ULL;
    h ^= splitmix64(s);
    return h ? h : 0x9e3779b97f4a7c15ULL;
}

/// Counter-based generator: splitmix64 stream with a ziggurat normal sampler.
/// Self-contained so sequences are identical across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t stream_seed) : state_(stream_seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0,1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Marsaglia-Tsang ziggurat (128 layers).
    double normal() {
        const Tables& t = tables();
        for (;;) {
            std::uint64_t u = next_u64();
            int i = int(u & 127u);
            std::int64_t j = std::int64_t(u >> 8) - (std::int64_t(1) << 55); // signed 56-bit
            double x = double(j) * t.w[i];
            if ((j < 0 ? -j : j) < t.k[i]) return x;
            if (i == 0) return normal_tail(x < 0);
            double f0 = t.f[i], f1 = t.f[i + 1];
            if (f1 + uniform01() * (f0 - f1) < std::exp(-0.5 * x * x)) return x;
        }
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential with unit mean (speckle amplitudes).
    double exponential() {
        double u;
        do { u = uniform01(); } while (u <= 0.0);
        return -std::log(u);
    }

private:
    struct Tables {
        std::array<double, 129> x{};
        std::array<double, 129> f{};
        std::array<double, 128> w{};
        std::array<std::int64_t, 128> k{};
    };

    static const Tables& tables() {
        static const Tables t = [] {
            Tables tb;
            const double r = 3.442619855899;     // rightmost layer edge
            const double v = 9.91256303526217e-3; // layer area
            double xi = r;
            tb.x[0] = v / std::exp(-0.5 * r * r);
            tb.x[1] = r;
            tb.f[0] = std::exp(-0.5 * tb.x[0] * tb.x[0]);
            tb.f[1] = std::exp(-0.5 * r * r);
            for (int i = 2; i < 128; ++i) {
                xi = std::sqrt(-2.0 * std::log(v / xi + std::exp(-0.5 * xi * xi)));
                tb.x[i] = xi;
                tb.f[i] = std::exp(-0.5 * xi * xi);
            }
            tb.x[128] = 0.0;
            tb.f[128] = 1.0;
            const double m = double(std::int64_t(1) << 55);
            for (int i = 0; i < 128; ++i) {
                tb.w[i] = tb.x[i] / m;
                tb.k[i] = std::int64_t((tb.x[i + 1] / tb.x[i]) * m);
            }
            return tb;
        }();
        return t;
    }

    double normal_tail(bool negative) {
        const double r = 3.442619855899;
        double x, y;
        do {
            double u1;
            do { u1 = uniform01(); } while (u1 <= 0.0);
            double u2;
            do { u2 = uniform01(); } while (u2 <= 0.0);
            x = -std::log(u1) / r;
            y = -std::log(u2);
        } while (y + y < x * x);
        return negative ? -(r + x) : (r + x);
    }

    std::uint64_t state_;
};

} // namespace radcs

#endif
