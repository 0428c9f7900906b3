#include "ssgmix/density.hpp"

#include <cmath>

#include "ssgmix/errors.hpp"

namespace ssgmix {

namespace {
constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(2) * Gamma(3/2)
constexpr double kLog2Pi = 1.8378770664093454836;

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }
}  // namespace

void ComponentParams::validate(bool fitting, double alpha_min, double alpha_max) const {
    const int d = dim();
    if (d < 1) throw std::invalid_argument("ComponentParams: empty location vector");
    if (sigma.rows() != d || sigma.cols() != d || lambda.size() != d)
        throw std::invalid_argument("ComponentParams: dimension mismatch");
    if (!(alpha > 0.0) || alpha > 2.0)
        throw std::domain_error("ComponentParams: alpha outside (0,2]");
    if (fitting && (alpha < alpha_min || alpha > alpha_max))
        throw std::domain_error("ComponentParams: alpha outside fitting bounds");
    const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-30);
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("ComponentParams: sigma is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw singular_error("ComponentParams: sigma is not positive definite");
}

void MixtureModel::validate(bool fitting) const {
    if (components.empty()) throw std::invalid_argument("MixtureModel: no components");
    if (weights.size() != k()) throw std::invalid_argument("MixtureModel: weight count mismatch");
    if (weights.minCoeff() < 0.0) throw std::invalid_argument("MixtureModel: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("MixtureModel: weights do not sum to 1");
    const int d = dim();
    for (const auto& c : components) {
        if (c.dim() != d) throw std::invalid_argument("MixtureModel: mixed dimensions");
        c.validate(fitting);
    }
}

void FitConfig::validate() const {
    if (n_terms < 1 || n_mc < 1 || m_repeats < 1 || max_iter < 1 || min_iter < 1)
        throw std::invalid_argument("FitConfig: counts must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("FitConfig: eps must be positive");
    if (!(alpha_min > 0.0) || !(alpha_max < 2.0) || alpha_min > alpha_max)
        throw std::invalid_argument("FitConfig: alpha bounds must satisfy 0 < lo <= hi < 2");
    if (!(slice.width > 0.0) || slice.burn_in < 0 || slice.kept < 1)
        throw std::invalid_argument("FitConfig: bad slice parameters");
}

ComponentGeometry component_geometry(const ComponentParams& theta) {
    theta.validate();
    const int d = theta.dim();
    ComponentGeometry g;
    Eigen::LLT<Matrix> llt_sigma(theta.sigma);
    if (llt_sigma.info() != Eigen::Success)
        throw singular_error("component_geometry: sigma factorization failed");
    g.log_det_sigma = 0.0;
    for (int i = 0; i < d; ++i) g.log_det_sigma += 2.0 * std::log(llt_sigma.matrixL()(i, i));

    g.omega = theta.sigma + theta.lambda * theta.lambda.transpose();
    Eigen::LLT<Matrix> llt_omega(g.omega);
    if (llt_omega.info() != Eigen::Success)
        throw singular_error("component_geometry: omega factorization failed");
    g.omega_inv = llt_omega.solve(Matrix::Identity(d, d));

    const double raw_delta = 1.0 - theta.lambda.dot(g.omega_inv * theta.lambda);
    g.delta = std::min(std::max(raw_delta, 1e-10), 1.0);
    g.log_c0 = std::log(2.0) - 0.5 * (d + 1) * kLog2Pi - 0.5 * g.log_det_sigma;
    g.c0 = std::exp(g.log_c0);
    return g;
}

PointStats point_stats(const Vector& y, const ComponentParams& theta,
                       const ComponentGeometry& geom) {
    if (y.size() != theta.mu.size()) throw std::invalid_argument("point_stats: dimension mismatch");
    const Vector r = y - theta.mu;
    PointStats st;
    st.d_y = std::max(r.dot(geom.omega_inv * r), 0.0);
    st.m = theta.lambda.dot(geom.omega_inv * r);
    return st;
}

McPool draw_pool(double alpha, int n, std::uint64_t seed) {
    McPool pool;
    pool.seed = seed;
    pool.draws.resize(static_cast<std::size_t>(n));
    Rng rng(seed);
    for (auto& p : pool.draws) p = positive_stable_draw(rng, alpha);
    return pool;
}

namespace detail {

FamilyThresholds family_thresholds(int d, double alpha, const SeriesConfig& cfg) {
    const PositiveStableDist dist(alpha);
    return FamilyThresholds{
        series_threshold(SeriesFamily::density_i0, d, dist, cfg),
        series_threshold(SeriesFamily::density_i1, d, dist, cfg),
        series_threshold(SeriesFamily::moment_j1, d, dist, cfg),
        series_threshold(SeriesFamily::moment_j2, d, dist, cfg),
    };
}

double mc_I(int i, const PointStats& st, int d, const ComponentGeometry& geom,
            const McPool& pool) {
    const double sd = std::sqrt(geom.delta);
    double sum = 0.0;
    for (double p : pool.draws) {
        const double inv = 1.0 / p;
        const double base = std::pow(inv, 0.5 * d + i);
        sum += base * std::exp(-0.5 * st.d_y * inv) * norm_cdf(st.m / (sd * std::sqrt(p)));
    }
    return geom.c0 * std::sqrt(2.0 * M_PI * geom.delta) * sum /
           static_cast<double>(pool.draws.size());
}

double mc_J1(const PointStats& st, int d, const ComponentGeometry& geom, const McPool& pool) {
    const double q = st.d_y + st.m * st.m / geom.delta;
    double sum = 0.0;
    for (double p : pool.draws) {
        const double inv = 1.0 / p;
        sum += std::pow(inv, 0.5 * (d + 1)) * std::exp(-0.5 * q * inv);
    }
    return geom.c0 * geom.delta * sum / static_cast<double>(pool.draws.size());
}

double mc_J2(const PointStats& st, int d, const ComponentGeometry& geom, const McPool& pool) {
    const double sgn = sign_of(st.m);
    const double m2_over_2delta = 0.5 * st.m * st.m / geom.delta;
    double sum = 0.0;
    for (double p : pool.draws) {
        const double inv = 1.0 / p;
        const double g = st.m == 0.0 ? 0.0 : gamma_cdf_3half(m2_over_2delta * inv);
        sum += std::pow(inv, 0.5 * d) * std::exp(-0.5 * st.d_y * inv) * (1.0 + sgn * g);
    }
    return kSqrtHalfPi * geom.delta * std::sqrt(geom.delta) * geom.c0 * sum /
           static_cast<double>(pool.draws.size());
}

namespace {

// Shared driver for the alternating tail series. `term_fn(j)` returns the
// signed term; the result is rejected when the last retained terms are not
// yet negligible (the truncation bound of an alternating series).
template <typename TermFn>
bool sum_series(int n_terms, TermFn&& term_fn, double& out) {
    KahanSum acc;
    double tail1 = 0.0, tail2 = 0.0;
    for (int j = 1; j <= n_terms; ++j) {
        const double t = term_fn(j);
        acc.add(t);
        tail2 = tail1;
        tail1 = std::abs(t);
    }
    const double sum = acc.value();
    if (std::max(tail1, tail2) > 0.1 * std::abs(sum)) return false;
    out = std::max(sum, 0.0);
    return true;
}

double log_series_coeff(int j, double alpha, double& sign, double& abs_sin) {
    const double s = std::sin(0.5 * j * M_PI * alpha);
    sign = ((j - 1) % 2 == 0 ? 1.0 : -1.0) * sign_of(s);
    abs_sin = std::abs(s);
    return std::lgamma(0.5 * j * alpha + 1.0) - std::lgamma(j + 1.0);
}

}  // namespace

bool series_I(int i, const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
              const SeriesConfig& cfg, double& out) {
    const double log_half_dy = std::log(0.5 * st.d_y);
    const double dy_delta = st.d_y * geom.delta;
    const double pref = geom.c0 * std::sqrt(dy_delta / M_PI);
    const bool ok = sum_series(
        cfg.n_terms,
        [&](int j) {
            double sign, abs_sin;
            const double lc = log_series_coeff(j, alpha, sign, abs_sin);
            if (abs_sin == 0.0) return 0.0;
            const double nu = d + j * alpha + 2 * i;
            const double tcdf = student_t_cdf(nu, st.m * std::sqrt(nu / dy_delta));
            if (tcdf == 0.0) return 0.0;
            const double lm = lc + std::log(abs_sin) + std::lgamma(0.5 * nu) -
                              0.5 * (nu + 1.0) * log_half_dy + std::log(tcdf);
            return sign * std::exp(lm);
        },
        out);
    if (ok) out *= pref;
    return ok;
}

bool series_J1(const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
               const SeriesConfig& cfg, double& out) {
    const double log_q = std::log(0.5 * st.d_y + 0.5 * st.m * st.m / geom.delta);
    const bool ok = sum_series(
        cfg.n_terms,
        [&](int j) {
            double sign, abs_sin;
            const double lc = log_series_coeff(j, alpha, sign, abs_sin);
            if (abs_sin == 0.0) return 0.0;
            const double h = 0.5 * (d + 1 + j * alpha);
            return sign * std::exp(lc + std::log(abs_sin) + std::lgamma(h) - h * log_q);
        },
        out);
    if (ok) out *= geom.c0 * geom.delta / M_PI;
    return ok;
}

namespace {

// E[X^2 1{X < b}] for X ~ Student-t with nu d.o.f. (unnormalized second
// moment of the left-truncated t); nonnegative by construction.
double t_partial_second_moment(double nu, double b) {
    const double lead =
        nu / (nu - 2.0) * student_t_cdf(nu - 2.0, b * std::sqrt((nu - 2.0) / nu));
    if (b == 0.0) return lead;
    const double lg = std::log(std::abs(b)) + std::lgamma(0.5 * (nu - 1.0)) -
                      std::lgamma(0.5 * nu) - std::log(2.0) - 0.5 * std::log(M_PI) -
                      0.5 * nu * std::log1p(b * b / nu) + 0.5 * std::log(nu + b * b);
    return std::max(lead - sign_of(b) * std::exp(lg), 0.0);
}

}  // namespace

bool series_J2(const PointStats& st, int d, double alpha, const ComponentGeometry& geom,
               const SeriesConfig& cfg, double& out) {
    const double log_half_dy = std::log(0.5 * st.d_y);
    const double dy_delta = st.d_y * geom.delta;
    const bool ok = sum_series(
        cfg.n_terms,
        [&](int j) {
            double sign, abs_sin;
            const double lc = log_series_coeff(j, alpha, sign, abs_sin);
            if (abs_sin == 0.0) return 0.0;
            const double nu = d + 2 + j * alpha;
            const double g = t_partial_second_moment(nu, st.m * std::sqrt(nu / dy_delta));
            if (g == 0.0) return 0.0;
            const double lm = lc + std::log(abs_sin) + std::lgamma(0.5 * nu) - std::log(nu) -
                              0.5 * (nu + 1.0) * log_half_dy + std::log(g);
            return sign * std::exp(lm);
        },
        out);
    if (ok) out *= geom.c0 * dy_delta * std::sqrt(dy_delta) / std::sqrt(M_PI);
    return ok;
}

PointIntegrals point_integrals(const PointStats& st, int d, double alpha,
                               const ComponentGeometry& geom, const McPool& pool,
                               const SeriesConfig& cfg, const FamilyThresholds& th) {
    // One fused pass over the pool accumulates all four Monte Carlo sums; the
    // series expansions then override whichever families sit past their
    // convergence threshold (they are both cheaper and immune to the
    // underflow the Monte Carlo kernel suffers deep in the tail).
    PointIntegrals r;
    const double sd = std::sqrt(geom.delta);
    const double m2_over_2delta = 0.5 * st.m * st.m / geom.delta;
    const double sgn_m = sign_of(st.m);
    double s_i0 = 0.0, s_i1 = 0.0, s_j1 = 0.0, s_j2 = 0.0;
    for (double p : pool.draws) {
        const double inv = 1.0 / p;
        const double sq = std::sqrt(inv);
        double base = sq;  // p^{-d/2}
        for (int q = 1; q < d; ++q) base *= sq;
        const double e0 = std::exp(-0.5 * st.d_y * inv);
        const double cn = norm_cdf(st.m * sq / sd);
        s_i0 += base * e0 * cn;
        s_i1 += base * inv * e0 * cn;
        if (st.m == 0.0) {
            s_j1 += base * sq * e0;
            s_j2 += base * e0;
        } else {
            s_j1 += base * sq * e0 * std::exp(-m2_over_2delta * inv);
            s_j2 += base * e0 * (1.0 + sgn_m * gamma_cdf_3half(m2_over_2delta * inv));
        }
    }
    const double n = static_cast<double>(pool.draws.size());
    const double c_i = geom.c0 * std::sqrt(2.0 * M_PI * geom.delta) / n;
    r.i0 = c_i * s_i0;
    r.i1 = c_i * s_i1;
    r.j1 = geom.c0 * geom.delta * s_j1 / n;
    r.j2 = kSqrtHalfPi * geom.delta * sd * geom.c0 * s_j2 / n;

    if (st.d_y > th.i0) {
        double v;
        if (series_I(0, st, d, alpha, geom, cfg, v)) r.i0 = v;
    }
    if (st.d_y > th.i1) {
        double v;
        if (series_I(1, st, d, alpha, geom, cfg, v)) r.i1 = v;
    }
    if (st.d_y > th.j1) {
        double v;
        if (series_J1(st, d, alpha, geom, cfg, v)) r.j1 = v;
    }
    if (st.d_y > th.j2) {
        double v;
        if (series_J2(st, d, alpha, geom, cfg, v)) r.j2 = v;
    }
    r.i0 = std::max(r.i0, kDensityFloor);
    r.i1 = std::max(r.i1, 0.0);
    r.j1 = std::max(r.j1, 0.0);
    r.j2 = std::max(r.j2, 0.0);
    return r;
}

}  // namespace detail

namespace {

detail::PointIntegrals eval_point(const Vector& y, const ComponentParams& theta,
                                  const ComponentGeometry& geom, const McPool& pool,
                                  const SeriesConfig& cfg) {
    const int d = theta.dim();
    const auto st = point_stats(y, theta, geom);
    const auto th = detail::family_thresholds(d, theta.alpha, cfg);
    return detail::point_integrals(st, d, theta.alpha, geom, pool, cfg, th);
}

}  // namespace

double I_integral(int i, const Vector& y, const ComponentParams& theta,
                  const ComponentGeometry& geom, const McPool& pool, const SeriesConfig& cfg) {
    if (i != 0 && i != 1) throw std::invalid_argument("I_integral: i must be 0 or 1");
    const auto r = eval_point(y, theta, geom, pool, cfg);
    return i == 0 ? r.i0 : std::max(r.i1, kDensityFloor);
}

double ssg_pdf(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
               const McPool& pool, const SeriesConfig& cfg) {
    return eval_point(y, theta, geom, pool, cfg).i0;
}

double cond_E_invP(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                   const McPool& pool, const SeriesConfig& cfg) {
    const auto r = eval_point(y, theta, geom, pool, cfg);
    if (r.i0 <= kDensityFloor)
        throw degenerate_error("cond_E_invP: density at underflow floor");
    return r.i1 / r.i0;
}

double cond_E_invP_T(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                     const McPool& pool, const SeriesConfig& cfg) {
    const auto r = eval_point(y, theta, geom, pool, cfg);
    if (r.i0 <= kDensityFloor)
        throw degenerate_error("cond_E_invP_T: density at underflow floor");
    const auto st = point_stats(y, theta, geom);
    return (r.j1 + st.m * r.i1) / r.i0;
}

double cond_E_invP_T2(const Vector& y, const ComponentParams& theta, const ComponentGeometry& geom,
                      const McPool& pool, const SeriesConfig& cfg) {
    const auto r = eval_point(y, theta, geom, pool, cfg);
    if (r.i0 <= kDensityFloor)
        throw degenerate_error("cond_E_invP_T2: density at underflow floor");
    const auto st = point_stats(y, theta, geom);
    return std::max((r.j2 + 2.0 * st.m * r.j1 + st.m * st.m * r.i1) / r.i0, 0.0);
}

double mixture_pdf(const Vector& y, const MixtureModel& model, const std::vector<McPool>& pools,
                   const SeriesConfig& cfg) {
    model.validate();
    if (pools.size() != static_cast<std::size_t>(model.k()))
        throw std::invalid_argument("mixture_pdf: one pool per component required");
    double g = 0.0;
    for (int k = 0; k < model.k(); ++k) {
        const auto geom = component_geometry(model.components[k]);
        g += model.weights[k] *
             ssg_pdf(y, model.components[k], geom, pools[static_cast<std::size_t>(k)], cfg);
    }
    return std::max(g, kDensityFloor);
}

}  // namespace ssgmix
