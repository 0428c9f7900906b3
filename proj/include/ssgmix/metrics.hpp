#pragma once

#include <cstddef>
#include <vector>

#include "ssgmix/model.hpp"

namespace ssgmix {

// Bayesian information criterion with the free-parameter count of a
// K-component d-dimensional model: K(1 + 2d + d(d+1)/2) + (K-1).
double bic(double loglik, std::size_t n, int k, int d);

int bic_free_parameters(int k, int d);

// Hubert-Arabie adjusted Rand index on two equal-length label vectors.
// Labels may come from arbitrary finite alphabets. When the expected index
// equals the maximum index (both partitions trivial) the value is 0 by
// convention.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Hard labels under `model` (argmax responsibility, ties to the lowest k).
std::vector<int> classify(const Matrix& data, const MixtureModel& model, const FitConfig& cfg);

}  // namespace ssgmix
