#pragma once

#include <vector>

#include "ssgmix/model.hpp"

namespace ssgmix {

// PAM (BUILD + SWAP) k-medoids under the Manhattan metric. Returns 0-based
// cluster indices per row. Deterministic: BUILD seeds the medoids greedily
// and SWAP iterates to a local optimum with first-index tie-breaking.
std::vector<int> pam_manhattan(const Matrix& data, int k);

}  // namespace ssgmix
