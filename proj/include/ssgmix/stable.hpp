#pragma once

#include <cstdint>
#include <vector>

#include "ssgmix/rng.hpp"

namespace ssgmix {

// Positive stable mixing variable P ~ S(alpha/2, 1, cos(pi alpha/4)^{2/alpha}, 0)
// in the S1 parameterization, i.e. Laplace transform E exp(-sP) = exp(-s^{alpha/2}).
// alpha is the tail index of the parent law and must lie strictly in (0,2);
// the alpha = 2 limit (P degenerate at 1) is handled by callers, never here.
struct PositiveStableDist {
    double alpha;
    explicit PositiveStableDist(double a);
};

struct SeriesConfig {
    int n_terms = 80;  // retained terms of the tail series
    int n_mc = 3000;   // Monte Carlo pool size for the non-tail branch
};

// The four series families used by the conditional-expectation integrals.
// Thresholds differ only through the dimension shift of the inner gamma ratio.
enum class SeriesFamily {
    density_i0,  // mixture density integral
    density_i1,  // E(P^-1) numerator
    moment_j1,   // E(P^-1 T) correction integral
    moment_j2,   // E(P^-1 T^2) correction integral
};

// Tail-series density of P. Valid only for p above pdf_series_threshold();
// throws region_error below it (callers fall back to Monte Carlo estimation)
// and std::domain_error for p <= 0.
double positive_stable_pdf(double p, const PositiveStableDist& dist, const SeriesConfig& cfg);

// Smallest p at which every retained term of the density series is already in
// the decaying regime (ratio test maximized over the retained indices).
double pdf_series_threshold(const PositiveStableDist& dist, const SeriesConfig& cfg);

// Convergence threshold 2 L^{2/alpha} for the d-dimensional integral series,
// with the gamma ratio L evaluated at the final retained index j = n_terms.
double series_threshold(SeriesFamily family, int d, const PositiveStableDist& dist,
                        const SeriesConfig& cfg);

// One exact draw of P (Kanter / Chambers-Mallows-Stuck construction).
double positive_stable_draw(Rng& rng, double alpha);

// n i.i.d. draws; deterministic for a fixed seed.
std::vector<double> positive_stable_sample(const PositiveStableDist& dist, std::size_t n,
                                           std::uint64_t seed);

// Monte Carlo estimate of Pr(P > p) from n_draws fresh draws. Deterministic
// for fixed seed regardless of thread count (fixed-size chunk substreams).
double positive_stable_upper_tail(double p, const PositiveStableDist& dist, std::size_t n_draws,
                                  std::uint64_t seed, int threads = 0);

}  // namespace ssgmix
