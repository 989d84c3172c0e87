#ifndef COLPP_RNG_HPP
#define COLPP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace colpp {

// Counter-seeded xoshiro256** stream. A (seed, stream_id) pair fully determines
// every draw, and distinct stream_ids give statistically independent streams;
// envelope drivers hand one stream per replicate (stream_id = replicate index).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
        // SplitMix64 over the mixed (seed, stream) pair fills the state.
        std::uint64_t x = seed ^ (stream_id * 0x9E3779B97F4A7C15ULL + 0x6A09E667F3BCC909ULL);
        for (int i = 0; i < 4; ++i) s_[i] = splitmix(x);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
        // warm-up so that nearly-equal seeds decorrelate
        for (int i = 0; i < 8; ++i) next_u64();
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1), 53-bit resolution
    double u01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) noexcept { return a + (b - a) * u01(); }

    // uniform integer on [0, n)
    std::uint64_t below(std::uint64_t n) noexcept {
        // multiply-shift; bias is < 2^-64 per draw which is irrelevant here
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        return static_cast<std::uint64_t>(m >> 64);
    }

    // standard normal via Box-Muller (second value cached)
    double normal() noexcept {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - u01(); // (0,1]
        double u2 = u01();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        cached_ = rad * std::sin(ang);
        have_cached_ = true;
        return rad * std::cos(ang);
    }

    // Poisson count: CDF inversion for small means, Hormann's PTRS rejection
    // for large ones. The switch point is fixed so replays are stable.
    long poisson(double mean) noexcept {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    static std::uint64_t splitmix(std::uint64_t& x) noexcept {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) noexcept { return (v << k) | (v >> (64 - k)); }

    long poisson_inversion(double mean) noexcept {
        double p = std::exp(-mean);
        double cum = p;
        double u = u01();
        long k = 0;
        while (u > cum && k < 2000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    long poisson_ptrs(double mean) noexcept {
        const double slam = std::sqrt(mean);
        const double llam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = u01() - 0.5;
            double v = u01();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * llam - mean - std::lgamma(kf + 1.0))
                return static_cast<long>(kf);
        }
    }

    std::uint64_t s_[4];
    std::uint64_t seed_, stream_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Stage/purpose seed derivation used by the CLI: a documented SplitMix64 hash
// of the master seed and a label hash, so every stage can be replayed alone.
inline std::uint64_t derive_seed(std::uint64_t master, const char* label) {
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a
    for (const char* p = label; *p; ++p) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
        h *= 0x100000001B3ULL;
    }
    std::uint64_t x = master ^ h;
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace colpp

#endif
