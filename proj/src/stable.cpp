#include "ssgmix/stable.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssgmix/errors.hpp"
#include "ssgmix/special.hpp"

namespace ssgmix {

PositiveStableDist::PositiveStableDist(double a) : alpha(a) {
    if (!(a > 0.0) || !(a < 2.0))
        throw std::domain_error("PositiveStableDist: alpha must lie in (0,2)");
}

namespace {

// log of the ratio-test factor of the density series at index j:
//   L0(j) = Gamma(j a/2 + 1 + a/2) / (Gamma(j a/2 + 1) (j+1))
double log_l0(int j, double a) {
    const double x = 0.5 * j * a + 1.0;
    return std::lgamma(x + 0.5 * a) - std::lgamma(x) - std::log(j + 1.0);
}

}  // namespace

double pdf_series_threshold(const PositiveStableDist& dist, const SeriesConfig& cfg) {
    const double a = dist.alpha;
    double max_log_l = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= cfg.n_terms; ++j) max_log_l = std::max(max_log_l, log_l0(j, a));
    return 2.0 * std::exp((2.0 / a) * max_log_l);
}

double series_threshold(SeriesFamily family, int d, const PositiveStableDist& dist,
                        const SeriesConfig& cfg) {
    if (d < 1) throw std::domain_error("series_threshold: dimension must be >= 1");
    const double a = dist.alpha;
    const int j = cfg.n_terms;
    double shift = 0.0;
    switch (family) {
        case SeriesFamily::density_i0: shift = 0.0; break;
        case SeriesFamily::density_i1: shift = 2.0; break;
        case SeriesFamily::moment_j1: shift = 1.0; break;
        case SeriesFamily::moment_j2: shift = 2.0; break;
    }
    const double g = 0.5 * (d + shift + j * a);
    const double log_l =
        log_l0(j, a) + std::lgamma(g + 0.5 * a) - std::lgamma(g);
    return 2.0 * std::exp((2.0 / a) * log_l);
}

double positive_stable_pdf(double p, const PositiveStableDist& dist, const SeriesConfig& cfg) {
    if (!(p > 0.0)) throw std::domain_error("positive_stable_pdf: p must be positive");
    const double a = dist.alpha;
    if (p <= pdf_series_threshold(dist, cfg))
        throw region_error("positive_stable_pdf: p below series convergence threshold");

    const double log_p = std::log(p);
    KahanSum acc;
    double tail1 = 0.0, tail2 = 0.0;  // magnitudes of the two last terms
    for (int j = 1; j <= cfg.n_terms; ++j) {
        const double s = std::sin(0.5 * j * M_PI * a);
        const double log_mag = std::lgamma(0.5 * j * a + 1.0) - std::lgamma(j + 1.0) +
                               std::log(std::abs(s)) - (0.5 * j * a + 1.0) * log_p;
        const double sign = ((j - 1) % 2 == 0 ? 1.0 : -1.0) * (s >= 0.0 ? 1.0 : -1.0);
        const double term = s == 0.0 ? 0.0 : sign * std::exp(log_mag) / M_PI;
        acc.add(term);
        tail2 = tail1;
        tail1 = std::abs(term);
    }
    const double sum = acc.value();
    // Alternating-series tail bound: the truncation is untrustworthy once the
    // last retained terms stop being negligible against the sum.
    if (std::max(tail1, tail2) > 0.1 * std::abs(sum))
        throw region_error("positive_stable_pdf: series not converged at this p");
    return std::max(sum, 0.0);
}

double positive_stable_draw(Rng& rng, double alpha) {
    // Kanter's representation for Laplace transform exp(-s^rho), rho = alpha/2:
    //   P = sin(rho pi U) / sin(pi U)^{1/rho} * (sin((1-rho) pi U) / E)^{(1-rho)/rho}
    const double rho = 0.5 * alpha;
    const double u = rng.uniform();
    const double e = rng.exponential();
    const double pu = M_PI * u;
    return std::sin(rho * pu) / std::pow(std::sin(pu), 1.0 / rho) *
           std::pow(std::sin((1.0 - rho) * pu) / e, (1.0 - rho) / rho);
}

std::vector<double> positive_stable_sample(const PositiveStableDist& dist, std::size_t n,
                                           std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("positive_stable_sample: n must be >= 1");
    std::vector<double> out(n);
    Rng rng(seed);
    for (auto& v : out) v = positive_stable_draw(rng, dist.alpha);
    return out;
}

double positive_stable_upper_tail(double p, const PositiveStableDist& dist, std::size_t n_draws,
                                  std::uint64_t seed, int threads) {
    if (!(p > 0.0)) throw std::domain_error("positive_stable_upper_tail: p must be positive");
    constexpr std::size_t kChunk = 1 << 15;
    const std::size_t n_chunks = (n_draws + kChunk - 1) / kChunk;
    std::vector<std::uint64_t> counts(n_chunks, 0);
#ifdef _OPENMP
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#else
    (void)threads;
#endif
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        Rng rng = substream(seed, Stream::tail, static_cast<std::uint64_t>(c));
        const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, n_draws);
        std::uint64_t cnt = 0;
        for (std::size_t i = lo; i < hi; ++i)
            if (positive_stable_draw(rng, dist.alpha) > p) ++cnt;
        counts[static_cast<std::size_t>(c)] = cnt;
    }
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    return static_cast<double>(total) / static_cast<double>(n_draws);
}

}  // namespace ssgmix
