#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ssgmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One mixture component: tail index alpha, location mu, dispersion sigma
// (SPD), skewness lambda.
struct ComponentParams {
    double alpha = 1.7;
    Vector mu;
    Matrix sigma;
    Vector lambda;

    int dim() const { return static_cast<int>(mu.size()); }
    // Throws if sigma is not symmetric SPD, dimensions disagree, or alpha is
    // outside (0,2]. With `fitting` set, alpha must lie in the fitting bounds.
    void validate(bool fitting = false, double alpha_min = 0.3, double alpha_max = 1.99) const;
};

// Quantities derived from one component, shared across observations.
struct ComponentGeometry {
    Matrix omega;      // sigma + lambda lambda^T
    Matrix omega_inv;
    double delta = 1.0;          // 1 - lambda^T omega^{-1} lambda, clamped to [1e-10, 1]
    double log_det_sigma = 0.0;
    double c0 = 0.0;             // 2 (2 pi)^{-(d+1)/2} |sigma|^{-1/2}
    double log_c0 = 0.0;
};

// Per-observation scalars for one component.
struct PointStats {
    double d_y = 0.0;  // (y-mu)^T omega^{-1} (y-mu)
    double m = 0.0;    // lambda^T omega^{-1} (y-mu)
};

// Monte Carlo pool of positive stable draws for one (component, iteration).
// All four integral families of a component share the pool, which couples the
// numerator and denominator estimates of each conditional-expectation ratio.
struct McPool {
    std::vector<double> draws;
    std::uint64_t seed = 0;
};

struct MixtureModel {
    Vector weights;                          // simplex, length K
    std::vector<ComponentParams> components;

    int k() const { return static_cast<int>(components.size()); }
    int dim() const { return components.empty() ? 0 : components.front().dim(); }
    void validate(bool fitting = false) const;
};

struct SliceParams {
    double width = 1.0;
    int burn_in = 50;
    int kept = 1;
};

struct FitConfig {
    int n_terms = 80;
    int n_mc = 3000;
    int m_repeats = 5;
    double eps = 0.10;
    int max_iter = 500;
    int min_iter = 30;
    double alpha_min = 0.3;
    double alpha_max = 1.99;
    SliceParams slice;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = all available

    void validate() const;
};

// E-step output. tau rows sum to one; e1..e3 already carry the tau factor.
struct EStepCache {
    Matrix tau;  // n x K responsibilities
    Matrix e1;   // tau * E(P^-1     | y, component)
    Matrix e2;   // tau * E(P^-1 T   | y, component)
    Matrix e3;   // tau * E(P^-1 T^2 | y, component)
};

struct FitResult {
    MixtureModel model;                 // averaged over the stopping window
    std::vector<int> labels;            // 1-based hard assignments
    std::vector<double> loglik_trace;   // one entry per iteration
    int n_iter = 0;
    double loglik = 0.0;                // under the averaged model
    double bic = 0.0;
    bool converged = false;
    double seconds = 0.0;
};

constexpr double kDensityFloor = 1e-300;

}  // namespace ssgmix
