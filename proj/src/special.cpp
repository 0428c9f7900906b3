#include "ssgmix/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace ssgmix {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double log_norm_cdf(double z) {
    if (z > -37.0) return std::log(norm_cdf(z));
    // Mills-ratio asymptotic for the deep left tail.
    return -0.5 * z * z - std::log(-z) - kLogSqrt2Pi;
}

double student_t_cdf(double nu, double x) {
    if (!(nu > 0.0)) throw std::domain_error("student_t_cdf: nu must be positive");
    if (!std::isfinite(x)) return x > 0.0 ? 1.0 : 0.0;
    if (x == 0.0) return 0.5;
    const double t = nu / (nu + x * x);
    const double half_tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, t);
    return x > 0.0 ? 1.0 - half_tail : half_tail;
}

double gamma_cdf_3half(double x) {
    if (x <= 0.0) return 0.0;
    const double r = std::sqrt(x);
    // P(3/2,x) = erf(sqrt x) - 2 sqrt(x/pi) exp(-x)
    return std::erf(r) - 2.0 * r * std::exp(-x) / 1.7724538509055160273;
}

double truncated_t_second_moment(double nu, double b) {
    if (!(nu > 2.0)) throw std::domain_error("truncated_t_second_moment: nu must exceed 2");
    const double tb = student_t_cdf(nu, b);
    if (tb <= 0.0) throw std::domain_error("truncated_t_second_moment: empty truncation region");
    if (!std::isfinite(b)) return nu / (nu - 2.0);
    // E[X^2 1{X<b}] = nu/(nu-2) T_{nu-2}(b sqrt((nu-2)/nu))
    //                 - b nu^{nu/2} Gamma((nu-1)/2) / (2 (nu+b^2)^{(nu-1)/2}
    //                   Gamma(nu/2) Gamma(1/2)),
    // then normalize by T_nu(b). The second factor is assembled in log space;
    // nu^{nu/2}/(nu+b^2)^{(nu-1)/2} overflows already at moderate nu otherwise.
    const double lead = nu / (nu - 2.0) * student_t_cdf(nu - 2.0, b * std::sqrt((nu - 2.0) / nu));
    double corr = 0.0;
    if (b != 0.0) {
        const double lg = std::log(std::abs(b)) + std::lgamma(0.5 * (nu - 1.0)) -
                          std::lgamma(0.5 * nu) - std::log(2.0) - 0.5 * std::log(M_PI) -
                          0.5 * nu * std::log1p(b * b / nu) + 0.5 * std::log(nu + b * b);
        corr = (b > 0.0 ? 1.0 : -1.0) * std::exp(lg);
    }
    return (lead - corr) / tb;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
    const double h = q * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - std::floor(h)) * (sorted[hi] - sorted[lo]);
}

double ls_slope(const std::vector<double>& y) {
    const auto n = static_cast<double>(y.size());
    if (y.size() < 2) return 0.0;
    const double xbar = 0.5 * (n + 1.0);
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dx = static_cast<double>(i + 1) - xbar;
        sxy += dx * (y[i] - ybar);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace ssgmix
