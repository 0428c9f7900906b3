#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssgmix {

// All randomness in the library flows through this wrapper around
// std::mt19937_64 so that a given seed produces the same stream on every
// platform. Variate transforms are hand-rolled inverse-CDF / Box-Muller
// (std::*_distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform on the open interval (0,1); safe to pass through log().
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // One standard normal per call (Box-Muller, cosine branch).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double exponential() { return -std::log(uniform()); }

    // Weibull with pdf a w^{a-1} exp(-w^a) by inversion: w = (-log u)^{1/a}.
    double weibull(double shape) { return std::pow(exponential(), 1.0 / shape); }

private:
    std::mt19937_64 gen_;
};

// Named substreams. A master seed plus a stream tag and up to three indices
// (iteration, component, observation, ...) determine an independent generator,
// so parallel schedules cannot reorder the randomness a given task sees.
enum class Stream : std::uint64_t {
    init = 1,
    pool,      // (iteration, component)
    cm_step,   // (iteration, component, repeat)
    slice,     // (iteration, component, observation)
    classify,  // (component)
    sample,    // data simulation
    tail,      // tail-probability chunks
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

inline std::uint64_t substream_seed(std::uint64_t master, Stream s, std::uint64_t a = 0,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = detail::splitmix64(master ^ 0x5851f42d4c957f2dULL);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(s));
    h = detail::splitmix64(h ^ a);
    h = detail::splitmix64(h ^ b);
    h = detail::splitmix64(h ^ c);
    return h;
}

inline Rng substream(std::uint64_t master, Stream s, std::uint64_t a = 0, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
    return Rng(substream_seed(master, s, a, b, c));
}

}  // namespace ssgmix
