#pragma once

#include "ssgmix/model.hpp"
#include "ssgmix/special.hpp"
#include "ssgmix/stable.hpp"

namespace ssgmix {

// Derived matrices and normalizer for one component. Throws singular_error if
// sigma (hence omega) cannot be factorized.
ComponentGeometry component_geometry(const ComponentParams& theta);

PointStats point_stats(const Vector& y, const ComponentParams& theta,
                       const ComponentGeometry& geom);

// Fresh pool of positive stable draws for the given tail index.
McPool draw_pool(double alpha, int n, std::uint64_t seed);

// The density integral I(i), i = 0 (the pdf itself) or 1 (E(P^-1) numerator).
// Uses the tail series when d(y) clears the family threshold, otherwise the
// pool average; result is floored at kDensityFloor, never exactly zero.
double I_integral(int i, const Vector& y, const ComponentParams& theta,
                  const ComponentGeometry& geom, const McPool& pool, const SeriesConfig& cfg);

double ssg_pdf(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
               const McPool& pool, const SeriesConfig& cfg);

// Conditional expectations given y for the latent (P, T) pair. All ratios are
// evaluated on the same pool. Throw degenerate_error when the density sits at
// the underflow floor.
double cond_E_invP(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                   const McPool& pool, const SeriesConfig& cfg);
double cond_E_invP_T(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                     const McPool& pool, const SeriesConfig& cfg);
double cond_E_invP_T2(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                      const McPool& pool, const SeriesConfig& cfg);

double mixture_pdf(const Vector& y, const MixtureModel& model, const std::vector<McPool>& pools,
                   const SeriesConfig& cfg);

namespace detail {

// All four integrals of one (observation, component) pair, computed in a
// single pass over the pool with series overrides in the tail region.
struct PointIntegrals {
    double i0 = 0.0;  // density (floored)
    double i1 = 0.0;
    double j1 = 0.0;
    double j2 = 0.0;
};

struct FamilyThresholds {
    double i0, i1, j1, j2;
};

FamilyThresholds family_thresholds(int d, double alpha, const SeriesConfig& cfg);

PointIntegrals point_integrals(const PointStats& st, int d, double alpha,
                               const ComponentGeometry& geom, const McPool& pool,
                               const SeriesConfig& cfg, const FamilyThresholds& th);

// Individual branches, exposed for branch-consistency tests. The series
// evaluators return false if the alternating tail bound rejects the value.
double mc_I(int i, const PointStats& st, int d, const ComponentGeometry& geom,
            const McPool& pool);
double mc_J1(const PointStats& st, int d, const ComponentGeometry& geom, const McPool& pool);
double mc_J2(const PointStats& st, int d, const ComponentGeometry& geom, const McPool& pool);
bool series_I(int i, const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
              const SeriesConfig& cfg, double& out);
bool series_J1(const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
               const SeriesConfig& cfg, double& out);
bool series_J2(const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
               const SeriesConfig& cfg, double& out);

}  // namespace detail

}  // namespace ssgmix
