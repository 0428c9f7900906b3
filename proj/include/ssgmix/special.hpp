#pragma once

#include <vector>

namespace ssgmix {

// Standard normal CDF.
double norm_cdf(double z);

// log of the standard normal CDF, finite for arbitrarily negative z.
double log_norm_cdf(double z);

// Student-t CDF with real degrees of freedom nu > 0.
double student_t_cdf(double nu, double x);

// Regularized lower incomplete gamma P(3/2, x); closed form via erf.
double gamma_cdf_3half(double x);

// Second moment of a Student-t with nu d.o.f. truncated to (-inf, b).
// Requires nu > 2.
double truncated_t_second_moment(double nu, double b);

// Linear-interpolation sample quantile (R type 7) of already sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Slope of the least-squares line of y against 1..n.
double ls_slope(const std::vector<double>& y);

// Compensated accumulator in extended precision for alternating series.
struct KahanSum {
    long double sum = 0.0L;
    long double carry = 0.0L;
    void add(long double x) {
        const long double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const { return static_cast<double>(sum + carry); }
};

}  // namespace ssgmix
