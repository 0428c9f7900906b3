#include "ssgmix/estep.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssgmix/errors.hpp"

namespace ssgmix {

namespace {

struct ComponentContext {
    ComponentGeometry geom;
    detail::FamilyThresholds thresholds;
};

// Everything one row needs; writes its slice of the cache and its log-density.
void process_row(Eigen::Index i, const Matrix& data, const MixtureModel& model,
                 const std::vector<ComponentContext>& ctx, const std::vector<McPool>& pools,
                 const SeriesConfig& scfg, EStepCache& cache, std::vector<double>& row_loglik) {
    const int K = model.k();
    const int d = model.dim();
    const Vector y = data.row(i).transpose();

    std::vector<detail::PointIntegrals> ints(static_cast<std::size_t>(K));
    std::vector<PointStats> stats(static_cast<std::size_t>(K));
    double g = 0.0;
    bool all_floored = true;
    for (int k = 0; k < K; ++k) {
        const auto& c = ctx[static_cast<std::size_t>(k)];
        stats[static_cast<std::size_t>(k)] =
            point_stats(y, model.components[static_cast<std::size_t>(k)], c.geom);
        ints[static_cast<std::size_t>(k)] = detail::point_integrals(
            stats[static_cast<std::size_t>(k)], d,
            model.components[static_cast<std::size_t>(k)].alpha, c.geom,
            pools[static_cast<std::size_t>(k)], scfg, c.thresholds);
        all_floored &= (ints[static_cast<std::size_t>(k)].i0 <= kDensityFloor);
        g += model.weights[k] * ints[static_cast<std::size_t>(k)].i0;
    }
    g = std::max(g, kDensityFloor);
    row_loglik[static_cast<std::size_t>(i)] = std::log(g);

    if (all_floored) {
        // Extreme outlier: every component underflowed. Keep the iteration
        // alive with uniform responsibilities and Gaussian-limit moments.
        const double u = 1.0 / K;
        for (int k = 0; k < K; ++k) {
            cache.tau(i, k) = u;
            cache.e1(i, k) = u;
            cache.e2(i, k) = 0.0;
            cache.e3(i, k) = u;
        }
        return;
    }
    for (int k = 0; k < K; ++k) {
        const auto& r = ints[static_cast<std::size_t>(k)];
        const double tau = model.weights[k] * r.i0 / g;
        cache.tau(i, k) = tau;
        if (tau > 1e-12 && r.i0 > kDensityFloor) {
            const double m = stats[static_cast<std::size_t>(k)].m;
            cache.e1(i, k) = tau * (r.i1 / r.i0);
            cache.e2(i, k) = tau * ((r.j1 + m * r.i1) / r.i0);
            cache.e3(i, k) =
                tau * std::max((r.j2 + 2.0 * m * r.j1 + m * m * r.i1) / r.i0, 0.0);
        } else {
            // Negligible responsibility; the conditional moments would be
            // ratios of underflowed quantities.
            cache.e1(i, k) = 0.0;
            cache.e2(i, k) = 0.0;
            cache.e3(i, k) = 0.0;
        }
    }
}

EStepResult run_estep(const Matrix& data, const MixtureModel& model,
                      const std::vector<McPool>& pools, const FitConfig& cfg, int threads) {
    model.validate();
    cfg.validate();
    if (pools.size() != static_cast<std::size_t>(model.k()))
        throw std::invalid_argument("e_step: one pool per component required");
    const auto n = data.rows();
    const int K = model.k();
    const SeriesConfig scfg{cfg.n_terms, cfg.n_mc};

    std::vector<ComponentContext> ctx(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        ctx[static_cast<std::size_t>(k)].geom =
            component_geometry(model.components[static_cast<std::size_t>(k)]);
        ctx[static_cast<std::size_t>(k)].thresholds = detail::family_thresholds(
            model.dim(), model.components[static_cast<std::size_t>(k)].alpha, scfg);
    }

    EStepResult out;
    out.cache.tau.resize(n, K);
    out.cache.e1.resize(n, K);
    out.cache.e2.resize(n, K);
    out.cache.e3.resize(n, K);
    std::vector<double> row_loglik(static_cast<std::size_t>(n));

    if (threads == 1) {
        for (Eigen::Index i = 0; i < n; ++i)
            process_row(i, data, model, ctx, pools, scfg, out.cache, row_loglik);
    } else {
#ifdef _OPENMP
        const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
#endif
        for (Eigen::Index i = 0; i < n; ++i)
            process_row(i, data, model, ctx, pools, scfg, out.cache, row_loglik);
    }

    double ll = 0.0;
    for (double v : row_loglik) ll += v;
    out.loglik = ll;
    return out;
}

}  // namespace

EStepResult e_step_serial(const Matrix& data, const MixtureModel& model,
                          const std::vector<McPool>& pools, const FitConfig& cfg) {
    return run_estep(data, model, pools, cfg, 1);
}

EStepResult e_step_parallel(const Matrix& data, const MixtureModel& model,
                            const std::vector<McPool>& pools, const FitConfig& cfg, int threads) {
    return run_estep(data, model, pools, cfg, threads);
}

EStepResult e_step(const Matrix& data, const MixtureModel& model, const std::vector<McPool>& pools,
                   const FitConfig& cfg) {
    return run_estep(data, model, pools, cfg, cfg.threads);
}

std::pair<std::vector<int>, double> classify_loglik(const Matrix& data, const MixtureModel& model,
                                                    const FitConfig& cfg) {
    std::vector<McPool> pools;
    pools.reserve(static_cast<std::size_t>(model.k()));
    for (int k = 0; k < model.k(); ++k)
        pools.push_back(draw_pool(model.components[static_cast<std::size_t>(k)].alpha, cfg.n_mc,
                                  substream_seed(cfg.seed, Stream::classify,
                                                 static_cast<std::uint64_t>(k))));
    const auto res = e_step(data, model, pools, cfg);
    std::vector<int> labels(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        int best = 0;
        for (int k = 1; k < model.k(); ++k)
            if (res.cache.tau(i, k) > res.cache.tau(i, best)) best = k;
        labels[static_cast<std::size_t>(i)] = best + 1;
    }
    return {std::move(labels), res.loglik};
}

}  // namespace ssgmix
