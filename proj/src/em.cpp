#include "ssgmix/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ssgmix/errors.hpp"
#include "ssgmix/kmedoids.hpp"
#include "ssgmix/metrics.hpp"
#include "ssgmix/slice.hpp"
#include "ssgmix/special.hpp"

namespace ssgmix {

namespace {

double column_median(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

// Golden-section search for the maximum of a strictly concave f on [lo, hi].
template <typename F>
double maximize_scalar(F&& f, double lo, double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-7) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

namespace {

bool has_small_cluster(const std::vector<int>& part, int k, int min_size) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int c : part) ++counts[static_cast<std::size_t>(c)];
    for (int c : counts)
        if (c < min_size) return true;
    return false;
}

// Heavy-tailed samples occasionally contain a point so remote that the exact
// k-medoids optimum spends a whole medoid on it. Re-partition without the
// most remote 2% (L1 distance from the coordinatewise median), then assign
// everything to its nearest medoid.
std::vector<int> pam_trimmed(const Matrix& data, int k) {
    const auto n = data.rows();
    const int d = static_cast<int>(data.cols());
    Vector center(d);
    for (int j = 0; j < d; ++j) {
        std::vector<double> col(data.col(j).data(), data.col(j).data() + n);
        std::sort(col.begin(), col.end());
        center[j] = quantile_sorted(col, 0.5);
    }
    std::vector<double> remoteness(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        remoteness[static_cast<std::size_t>(i)] =
            (data.row(i).transpose() - center).cwiseAbs().sum();
    std::vector<double> sorted = remoteness;
    std::sort(sorted.begin(), sorted.end());
    const double cutoff = quantile_sorted(sorted, 0.98);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (remoteness[static_cast<std::size_t>(i)] <= cutoff) kept.push_back(i);
    Matrix inliers(kept.size(), d);
    for (std::size_t r = 0; r < kept.size(); ++r) inliers.row(static_cast<Eigen::Index>(r)) = data.row(kept[r]);
    const std::vector<int> inlier_part = pam_manhattan(inliers, k);

    // medoid rows per cluster: the in-cluster point with minimal total L1 cost
    std::vector<Vector> medoids(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_row = 0;
        for (std::size_t a = 0; a < kept.size(); ++a) {
            if (inlier_part[a] != c) continue;
            double cost = 0.0;
            for (std::size_t b = 0; b < kept.size(); ++b)
                if (inlier_part[b] == c)
                    cost += (inliers.row(static_cast<Eigen::Index>(a)) -
                             inliers.row(static_cast<Eigen::Index>(b)))
                                .cwiseAbs()
                                .sum();
            if (cost < best) {
                best = cost;
                best_row = static_cast<Eigen::Index>(a);
            }
        }
        medoids[static_cast<std::size_t>(c)] = inliers.row(best_row).transpose();
    }
    std::vector<int> part(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double dist =
                (data.row(i).transpose() - medoids[static_cast<std::size_t>(c)]).cwiseAbs().sum();
            if (dist < bd) {
                bd = dist;
                best = c;
            }
        }
        part[static_cast<std::size_t>(i)] = best;
    }
    return part;
}

}  // namespace

MixtureModel initialize(const Matrix& data, int k, std::uint64_t seed) {
    const auto n = data.rows();
    const int d = static_cast<int>(data.cols());
    if (n <= static_cast<Eigen::Index>(k) * (d + 2))
        throw std::invalid_argument("initialize: need more than k*(d+2) observations");
    (void)seed;  // PAM build/swap is deterministic; reserved for restarts

    std::vector<int> part = pam_manhattan(data, k);
    if (has_small_cluster(part, k, d + 2)) part = pam_trimmed(data, k);
    MixtureModel model;
    model.weights.resize(k);
    model.components.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (part[static_cast<std::size_t>(i)] == c) idx.push_back(i);
        if (static_cast<int>(idx.size()) < d + 2)
            throw degenerate_error("initialize: cluster " + std::to_string(c + 1) +
                                   " has fewer than d+2 points");
        const auto nc = static_cast<double>(idx.size());
        Matrix X(idx.size(), d);
        for (std::size_t r = 0; r < idx.size(); ++r) X.row(r) = data.row(idx[r]);

        auto& comp = model.components[static_cast<std::size_t>(c)];
        comp.alpha = 1.7;
        comp.mu.resize(d);
        comp.lambda.resize(d);
        for (int j = 0; j < d; ++j) {
            std::vector<double> col(X.col(j).data(), X.col(j).data() + X.rows());
            comp.mu[j] = column_median(col);
        }
        const Vector mean = X.colwise().mean();
        Matrix S = Matrix::Zero(d, d);
        for (Eigen::Index r = 0; r < X.rows(); ++r) {
            const Vector diff = X.row(r).transpose() - mean;
            S += diff * diff.transpose();
        }
        S /= std::max(nc - 1.0, 1.0);
        Matrix sigma0 = 0.9 * S + 0.1 * Matrix(S.diagonal().asDiagonal());
        Eigen::LLT<Matrix> llt(sigma0);
        if (llt.info() != Eigen::Success)
            throw degenerate_error("initialize: cluster covariance is degenerate");
        comp.sigma = sigma0;

        for (int j = 0; j < d; ++j) {
            double m3 = 0.0;
            for (Eigen::Index r = 0; r < X.rows(); ++r) {
                const double diff = X(r, j) - mean[j];
                m3 += diff * diff * diff;
            }
            std::vector<double> absdev(static_cast<std::size_t>(X.rows()));
            for (Eigen::Index r = 0; r < X.rows(); ++r)
                absdev[static_cast<std::size_t>(r)] = std::abs(X(r, j) - comp.mu[j]);
            const double mad = column_median(absdev);
            comp.lambda[j] = (m3 >= 0.0 ? 1.0 : -1.0) * mad;
        }
        model.weights[c] = nc / static_cast<double>(n);
    }
    model.weights /= model.weights.sum();
    return model;
}

MixtureModel m_step(const Matrix& data, const EStepCache& cache, const MixtureModel& model) {
    const auto n = data.rows();
    const int K = model.k();
    const int d = model.dim();
    if (cache.tau.rows() != n || cache.tau.cols() != K)
        throw std::invalid_argument("m_step: cache/model shape mismatch");

    MixtureModel out = model;
    for (int k = 0; k < K; ++k) {
        const auto& comp = model.components[static_cast<std::size_t>(k)];
        double tau_sum = 0.0, e1_sum = 0.0, e2_sum = 0.0, e3_sum = 0.0;
        Vector e1y = Vector::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            tau_sum += cache.tau(i, k);
            e1_sum += cache.e1(i, k);
            e2_sum += cache.e2(i, k);
            e3_sum += cache.e3(i, k);
            e1y += cache.e1(i, k) * data.row(i).transpose();
        }
        if (tau_sum <= 0.0 || e1_sum <= 0.0)
            throw degenerate_error("m_step: component " + std::to_string(k + 1) +
                                   " lost all responsibility");
        const Vector mu_new = (e1y - e2_sum * comp.lambda) / e1_sum;

        // Dispersion update uses the pre-update location and skewness.
        Matrix M = Matrix::Zero(d, d);
        Vector e2r = Vector::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector r = data.row(i).transpose() - comp.mu;
            M += cache.e1(i, k) * (r * r.transpose());
            e2r += cache.e2(i, k) * r;
        }
        M -= e2r * comp.lambda.transpose();
        M -= comp.lambda * e2r.transpose();
        M += e3_sum * (comp.lambda * comp.lambda.transpose());
        Matrix sigma_new = M / tau_sum;
        sigma_new = 0.5 * (sigma_new + sigma_new.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_new);
        Vector ev = es.eigenvalues();
        double floored_mass = 0.0;
        for (int j = 0; j < d; ++j)
            if (ev[j] < 1e-8) {
                floored_mass += 1e-8 - ev[j];
                ev[j] = 1e-8;
            }
        const double trace = std::max(ev.sum(), 1e-30);
        if (floored_mass > 0.1 * trace)
            throw singular_error("m_step: dispersion update of component " +
                                 std::to_string(k + 1) + " is numerically singular");
        sigma_new = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        sigma_new = 0.5 * (sigma_new + sigma_new.transpose());

        Vector lambda_new = Vector::Zero(d);
        if (e3_sum > 0.0) {
            Vector e2r_new = Vector::Zero(d);
            for (Eigen::Index i = 0; i < n; ++i)
                e2r_new += cache.e2(i, k) * (data.row(i).transpose() - mu_new);
            lambda_new = e2r_new / e3_sum;
        }

        auto& oc = out.components[static_cast<std::size_t>(k)];
        oc.mu = mu_new;
        oc.sigma = sigma_new;
        oc.lambda = lambda_new;
        out.weights[k] = tau_sum / static_cast<double>(n);
    }
    out.weights /= out.weights.sum();
    return out;
}

double cm_step_alpha_component(const Matrix& data, const std::vector<int>& hard_labels,
                               int component, const MixtureModel& model, const FitConfig& cfg,
                               std::uint64_t seed, std::uint64_t iteration) {
    const int d = model.dim();
    const auto& comp = model.components[static_cast<std::size_t>(component)];
    const double alpha = comp.alpha;
    const auto geom = component_geometry(comp);
    const double sqrt_delta = std::sqrt(geom.delta);

    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        if (hard_labels[static_cast<std::size_t>(i)] == component + 1) idx.push_back(i);
    const auto nk = static_cast<Eigen::Index>(idx.size());
    if (nk < 5)
        throw std::invalid_argument("cm_step_alpha: component " + std::to_string(component + 1) +
                                    " has fewer than 5 hard-assigned points");

    const int M = cfg.m_repeats;
    // Exponential scalings drawn up front so the slice loop can run in any
    // order over observations without touching the repeat stream.
    Matrix expdraw(nk, M);
    for (int m = 0; m < M; ++m) {
        Rng rng = substream(seed, Stream::cm_step, iteration,
                            static_cast<std::uint64_t>(component), static_cast<std::uint64_t>(m));
        for (Eigen::Index i = 0; i < nk; ++i) expdraw(i, m) = rng.exponential();
    }

    Matrix w(nk, M);
#ifdef _OPENMP
    const int nt = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(nt)
#endif
    for (Eigen::Index ii = 0; ii < nk; ++ii) {
        Rng rng = substream(seed, Stream::slice, iteration, static_cast<std::uint64_t>(component),
                            static_cast<std::uint64_t>(ii));
        double wcur = 1.0;
        for (int m = 0; m < M; ++m) {
            const Vector v =
                (data.row(idx[static_cast<std::size_t>(ii)]).transpose() - comp.mu) /
                std::sqrt(expdraw(ii, m));
            const double dstar = std::max(v.dot(geom.omega_inv * v), 0.0);
            const double mstar = comp.lambda.dot(geom.omega_inv * v);
            const auto logf = [&](double x) {
                if (x <= 0.0) return -std::numeric_limits<double>::infinity();
                return (d + alpha - 1.0) * std::log(x) - std::pow(x, alpha) -
                       0.5 * dstar * x * x + log_norm_cdf(mstar * x / sqrt_delta);
            };
            wcur = slice_sample_positive(logf, wcur, cfg.slice.width, cfg.slice.burn_in, rng);
            w(ii, m) = wcur;
        }
    }

    double alpha_mean = 0.0;
    std::vector<double> wm(static_cast<std::size_t>(nk));
    for (int m = 0; m < M; ++m) {
        for (Eigen::Index i = 0; i < nk; ++i) wm[static_cast<std::size_t>(i)] = w(i, m);
        alpha_mean += weibull_mle(wm, cfg.alpha_min, cfg.alpha_max);
    }
    return std::clamp(alpha_mean / M, cfg.alpha_min, cfg.alpha_max);
}

double weibull_mle(const std::vector<double>& w, double alpha_min, double alpha_max) {
    if (w.empty()) throw std::invalid_argument("weibull_mle: empty sample");
    double sum_log = 0.0;
    for (double v : w) sum_log += std::log(v);
    const auto loglik = [&](double a) {
        double sum_pow = 0.0;
        for (double v : w) sum_pow += std::pow(v, a);
        return static_cast<double>(w.size()) * std::log(a) + a * sum_log - sum_pow;
    };
    return maximize_scalar(loglik, alpha_min, alpha_max);
}

Vector cm_step_alpha(const Matrix& data, const std::vector<int>& hard_labels,
                     const MixtureModel& model, const FitConfig& cfg, std::uint64_t seed,
                     std::uint64_t iteration) {
    Vector out(model.k());
    for (int k = 0; k < model.k(); ++k)
        out[k] = cm_step_alpha_component(data, hard_labels, k, model, cfg, seed, iteration);
    return out;
}

StopDecision stopping_check(const std::vector<double>& loglik_trace, double eps) {
    const int r = static_cast<int>(loglik_trace.size());
    if (r < 20) return {};

    const auto block_slope = [&](int begin, int end) {  // [begin, end) 0-based
        std::vector<double> block(loglik_trace.begin() + begin, loglik_trace.begin() + end);
        std::vector<double> sorted = block;
        std::sort(sorted.begin(), sorted.end());
        const double lo = quantile_sorted(sorted, 0.1);
        const double hi = quantile_sorted(sorted, 0.9);
        std::vector<double> trimmed;
        for (double v : block)
            if (v >= lo && v <= hi) trimmed.push_back(v);
        return ls_slope(trimmed);
    };
    const double b1 = block_slope(r - 20, r - 10);
    const double b2 = block_slope(r - 10, r);
    StopDecision dec;
    dec.stop = std::abs(b1 - b2) <= eps;
    if (dec.stop) {
        dec.window_begin = std::max(1, r - 19);
        dec.window_end = r;
    }
    return dec;
}

namespace {

MixtureModel average_models(const std::vector<MixtureModel>& history, std::size_t window,
                            const FitConfig& cfg) {
    const std::size_t n = history.size();
    const std::size_t take = std::min(window, n);
    const std::size_t begin = n - take;
    MixtureModel avg = history.back();
    avg.weights.setZero();
    const int K = avg.k();
    for (int k = 0; k < K; ++k) {
        auto& c = avg.components[static_cast<std::size_t>(k)];
        c.alpha = 0.0;
        c.mu.setZero();
        c.sigma.setZero();
        c.lambda.setZero();
    }
    for (std::size_t t = begin; t < n; ++t) {
        avg.weights += history[t].weights;
        for (int k = 0; k < K; ++k) {
            auto& c = avg.components[static_cast<std::size_t>(k)];
            const auto& h = history[t].components[static_cast<std::size_t>(k)];
            c.alpha += h.alpha;
            c.mu += h.mu;
            c.sigma += h.sigma;
            c.lambda += h.lambda;
        }
    }
    const double inv = 1.0 / static_cast<double>(take);
    avg.weights *= inv;
    avg.weights /= avg.weights.sum();
    for (int k = 0; k < K; ++k) {
        auto& c = avg.components[static_cast<std::size_t>(k)];
        c.alpha = std::clamp(c.alpha * inv, cfg.alpha_min, cfg.alpha_max);
        c.mu *= inv;
        c.sigma *= inv;
        c.lambda *= inv;
    }
    return avg;
}

}  // namespace

FitResult fit(const Matrix& data, int k, const FitConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto n = data.rows();
    const int d = static_cast<int>(data.cols());
    if (!data.allFinite()) throw std::invalid_argument("fit: data contains non-finite entries");
    if (n <= static_cast<Eigen::Index>(k) * (d + 2))
        throw std::invalid_argument("fit: need more than k*(d+2) observations");

    MixtureModel model = initialize(data, k, substream_seed(cfg.seed, Stream::init));
    FitResult res;
    std::vector<MixtureModel> history;
    history.reserve(static_cast<std::size_t>(cfg.max_iter));
    bool stopped = false;

    for (int t = 1; t <= cfg.max_iter && !stopped; ++t) {
        std::vector<McPool> pools;
        pools.reserve(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c)
            pools.push_back(draw_pool(
                model.components[static_cast<std::size_t>(c)].alpha, cfg.n_mc,
                substream_seed(cfg.seed, Stream::pool, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(c))));

        const EStepResult e = e_step(data, model, pools, cfg);
        res.loglik_trace.push_back(e.loglik);

        model = m_step(data, e.cache, model);

        std::vector<int> hard(static_cast<std::size_t>(n));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            for (int c = 1; c < k; ++c)
                if (e.cache.tau(i, c) > e.cache.tau(i, best)) best = c;
            hard[static_cast<std::size_t>(i)] = best + 1;
            ++counts[static_cast<std::size_t>(best)];
        }
        for (int c = 0; c < k; ++c) {
            // Components starved of points keep their tail index this round.
            if (counts[static_cast<std::size_t>(c)] >= 5)
                model.components[static_cast<std::size_t>(c)].alpha = cm_step_alpha_component(
                    data, hard, c, model, cfg, cfg.seed, static_cast<std::uint64_t>(t));
        }
        history.push_back(model);

        const int r = t;
        if (r >= cfg.min_iter && r >= 20 && r % 10 == 0)
            stopped = stopping_check(res.loglik_trace, cfg.eps).stop;
    }

    res.n_iter = static_cast<int>(res.loglik_trace.size());
    res.converged = stopped;
    res.model = average_models(history, 20, cfg);
    auto [labels, ll] = classify_loglik(data, res.model, cfg);
    res.labels = std::move(labels);
    res.loglik = ll;
    res.bic = bic(ll, static_cast<std::size_t>(n), k, d);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace ssgmix
