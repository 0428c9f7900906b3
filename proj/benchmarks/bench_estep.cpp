// Timing comparison of the serial reference E-step against the OpenMP kernel,
// plus the pool sampler. Usage: bench_estep [n] [n_mc] [reps]

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssgmix/em.hpp"
#include "ssgmix/sampling.hpp"

using namespace ssgmix;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

MixtureModel study_model() {
    MixtureModel m;
    m.weights.resize(2);
    m.weights << 0.25, 0.75;
    m.components.resize(2);
    m.components[0].alpha = 1.5;
    m.components[0].mu = Vector(2);
    m.components[0].mu << 1, 1;
    m.components[0].lambda = Vector(2);
    m.components[0].lambda << 5, 1;
    m.components[0].sigma = Matrix(2, 2);
    m.components[0].sigma << 1, -0.5, -0.5, 1;
    m.components[1] = m.components[0];
    m.components[1].mu << -2, -2;
    m.components[1].lambda << 1, 5;
    m.components[1].sigma << 1, 0.5, 0.5, 1;
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    const Eigen::Index n = argc > 1 ? std::atoll(argv[1]) : 2000;
    const int n_mc = argc > 2 ? std::atoi(argv[2]) : 3000;
    const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

    const MixtureModel model = study_model();
    const auto sample = sample_mixture(static_cast<std::size_t>(n), model, 1);
    FitConfig cfg;
    cfg.n_mc = n_mc;

    std::vector<McPool> pools;
    {
        const auto t0 = Clock::now();
        for (int k = 0; k < model.k(); ++k)
            pools.push_back(draw_pool(model.components[static_cast<std::size_t>(k)].alpha, n_mc,
                                      static_cast<std::uint64_t>(k) + 7));
        std::cout << "pool sampling: " << seconds_since(t0) * 1e3 << " ms\n";
    }

    double serial_best = 1e300;
    EStepResult ref;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        ref = e_step_serial(sample.data, model, pools, cfg);
        serial_best = std::min(serial_best, seconds_since(t0));
    }
    std::cout << "serial reference: " << serial_best * 1e3 << " ms ("
              << static_cast<double>(n) / serial_best << " rows/s), loglik " << ref.loglik
              << "\n";

#ifdef _OPENMP
    for (int threads : {2, omp_get_max_threads()}) {
        double best = 1e300;
        EStepResult out;
        for (int r = 0; r < reps; ++r) {
            const auto t0 = Clock::now();
            out = e_step_parallel(sample.data, model, pools, cfg, threads);
            best = std::min(best, seconds_since(t0));
        }
        const bool identical =
            out.loglik == ref.loglik &&
            (out.cache.tau - ref.cache.tau).cwiseAbs().maxCoeff() == 0.0 &&
            (out.cache.e1 - ref.cache.e1).cwiseAbs().maxCoeff() == 0.0 &&
            (out.cache.e2 - ref.cache.e2).cwiseAbs().maxCoeff() == 0.0 &&
            (out.cache.e3 - ref.cache.e3).cwiseAbs().maxCoeff() == 0.0;
        std::cout << "openmp x" << threads << ": " << best * 1e3 << " ms (speedup "
                  << serial_best / best << ", bitwise match: " << (identical ? "yes" : "NO")
                  << ")\n";
        if (!identical) return 1;
    }
#else
    std::cout << "openmp: not available in this build\n";
#endif
    return 0;
}
