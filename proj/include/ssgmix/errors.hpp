#pragma once

#include <stdexcept>
#include <string>

namespace ssgmix {

// Numeric/model failures; the CLI maps these to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument is outside the series convergence region.
struct region_error : numeric_error {
    using numeric_error::numeric_error;
};

// A matrix that must be SPD is numerically singular, or an update floored
// away too much eigenvalue mass.
struct singular_error : numeric_error {
    using numeric_error::numeric_error;
};

// A density or cluster degenerated (underflow floor, empty/tiny cluster).
struct degenerate_error : numeric_error {
    using numeric_error::numeric_error;
};

// Slice sampler could not bracket the slice.
struct slice_error : numeric_error {
    using numeric_error::numeric_error;
};

}  // namespace ssgmix
