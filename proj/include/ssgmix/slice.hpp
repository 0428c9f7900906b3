#pragma once

#include <cmath>
#include <limits>

#include "ssgmix/errors.hpp"
#include "ssgmix/rng.hpp"

namespace ssgmix {

// One slice-sampling update (Neal 2003) restricted to the positive half-line:
// stepping-out to bracket the slice, then shrinkage. `logf` is the target
// log-density up to an additive constant and may return -inf.
template <typename LogF>
double slice_update_positive(LogF&& logf, double w, double width, Rng& rng) {
    constexpr int kMaxExpand = 1000;
    const double level = logf(w) + std::log(rng.uniform());
    double lo = w - width * rng.uniform();
    double hi = lo + width;
    int n = 0;
    while (lo > 0.0 && logf(lo) > level) {
        lo -= width;
        if (++n > kMaxExpand) throw slice_error("slice sampler: stepping-out did not terminate");
    }
    lo = std::max(lo, 0.0);
    n = 0;
    while (logf(hi) > level) {
        hi += width;
        if (++n > kMaxExpand) throw slice_error("slice sampler: stepping-out did not terminate");
    }
    for (;;) {
        const double cand = lo + (hi - lo) * rng.uniform();
        if (cand > 0.0 && logf(cand) > level) return cand;
        if (cand < w)
            lo = cand;
        else
            hi = cand;
        if (hi - lo < 1e-14) return w;  // slice collapsed to the current point
    }
}

template <typename LogF>
double slice_sample_positive(LogF&& logf, double w0, double width, int burn_in, Rng& rng) {
    double w = w0;
    for (int i = 0; i <= burn_in; ++i) w = slice_update_positive(logf, w, width, rng);
    return w;
}

}  // namespace ssgmix
