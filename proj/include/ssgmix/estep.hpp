#pragma once

#include <utility>

#include "ssgmix/density.hpp"
#include "ssgmix/model.hpp"

namespace ssgmix {

struct EStepResult {
    EStepCache cache;
    double loglik = 0.0;
};

// Responsibilities and conditional-expectation caches for all observations.
// Rows are independent given the read-only model and pools; the parallel
// kernel distributes rows over OpenMP threads and is bitwise identical to the
// serial reference (per-row arithmetic is self-contained and the final
// log-likelihood reduction runs in fixed row order).
EStepResult e_step_serial(const Matrix& data, const MixtureModel& model,
                          const std::vector<McPool>& pools, const FitConfig& cfg);
EStepResult e_step_parallel(const Matrix& data, const MixtureModel& model,
                            const std::vector<McPool>& pools, const FitConfig& cfg, int threads);

// Dispatches on cfg.threads (0 = all available, 1 = serial reference).
EStepResult e_step(const Matrix& data, const MixtureModel& model, const std::vector<McPool>& pools,
                   const FitConfig& cfg);

// Hard labels (1-based, argmax responsibility, ties to the lowest index) and
// total log-likelihood under `model`, with pools derived from cfg.seed.
std::pair<std::vector<int>, double> classify_loglik(const Matrix& data, const MixtureModel& model,
                                                    const FitConfig& cfg);

}  // namespace ssgmix
