#pragma once

#include <utility>

#include "ssgmix/model.hpp"

namespace ssgmix {

struct LabeledSample {
    Matrix data;              // n x d
    std::vector<int> labels;  // 1-based component indices
    std::uint64_t seed = 0;
};

// n draws of Y = mu + sqrt(P) lambda |Z0| + sqrt(P) chol(Sigma) Z1.
Matrix sample_ssg(std::size_t n, const ComponentParams& theta, std::uint64_t seed);

// Multinomial labels with probabilities `weights`, rows from the labeled
// component.
LabeledSample sample_mixture(std::size_t n, const MixtureModel& model, std::uint64_t seed);

// Draws of V = (Y - mu)/sqrt(E) two ways: directly from the definition
// (first) and through the Weibull scale-mixture hierarchy (second). The two
// samples are equal in distribution; tests compare them with a KS statistic.
std::pair<Matrix, Matrix> sample_hierarchy_v(std::size_t n, const ComponentParams& theta,
                                             std::uint64_t seed);

}  // namespace ssgmix
