#pragma once

#include <vector>

#include "ssgmix/estep.hpp"
#include "ssgmix/model.hpp"

namespace ssgmix {

// k-medoids (Manhattan) partition; per cluster: componentwise median location,
// diagonally shrunk covariance, sign-of-skewness x MAD skewness, alpha = 1.7,
// proportions as weights. Throws degenerate_error when a cluster is too small
// (< d+2 points) or its shrunk covariance is not positive definite.
MixtureModel initialize(const Matrix& data, int k, std::uint64_t seed);

// Closed-form updates of weights, mu, sigma, lambda from the E-step cache;
// alpha is left untouched. sigma is symmetrized and eigenvalue-floored at
// 1e-8; throws singular_error if the floored mass exceeds 10% of the trace.
MixtureModel m_step(const Matrix& data, const EStepCache& cache, const MixtureModel& model);

// Maximizer of the Weibull complete-data log-likelihood
//   n log(alpha) + alpha sum(log w) - sum(w^alpha)
// over [alpha_min, alpha_max] (strictly concave; bracketed search).
double weibull_mle(const std::vector<double>& w, double alpha_min, double alpha_max);

// Stochastic tail-index update for one component: scale the hard-assigned
// residuals by independent exponentials, slice-sample the latent Weibull
// scale of each, and maximize the Weibull complete-data log-likelihood over
// the fitting bounds. Requires at least 5 assigned points.
double cm_step_alpha_component(const Matrix& data, const std::vector<int>& hard_labels,
                               int component, const MixtureModel& model, const FitConfig& cfg,
                               std::uint64_t seed, std::uint64_t iteration);

// All components at once; mean of m_repeats maximizers each, clamped to the
// alpha bounds. Throws if any component has fewer than 5 assigned points.
Vector cm_step_alpha(const Matrix& data, const std::vector<int>& hard_labels,
                     const MixtureModel& model, const FitConfig& cfg, std::uint64_t seed,
                     std::uint64_t iteration = 0);

struct StopDecision {
    bool stop = false;
    int window_begin = 0;  // 1-based averaging window, inclusive
    int window_end = 0;
};

// Compares the least-squares slopes of the two most recent 10-iteration
// blocks of the trace, each trimmed to its own [0.1, 0.9] quantile band;
// stops when the slopes agree within eps.
StopDecision stopping_check(const std::vector<double>& loglik_trace, double eps);

// Full fitting loop: initialize, then iterate E-step / M-step / CM-step with
// the stopping rule above; final parameters are the componentwise average of
// the last 20 iterations and labels are re-derived under the averaged model.
FitResult fit(const Matrix& data, int k, const FitConfig& cfg);

}  // namespace ssgmix
