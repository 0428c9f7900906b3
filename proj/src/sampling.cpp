#include "ssgmix/sampling.hpp"

#include <cmath>

#include "ssgmix/stable.hpp"

namespace ssgmix {

namespace {

Matrix cholesky_lower(const Matrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("sample_ssg: sigma is not positive definite");
    return llt.matrixL();
}

// alpha = 2 is the Gaussian edge of the family: P is the point mass at 1.
double draw_scale(Rng& rng, double alpha) {
    return alpha >= 2.0 ? 1.0 : positive_stable_draw(rng, alpha);
}

}  // namespace

Matrix sample_ssg(std::size_t n, const ComponentParams& theta, std::uint64_t seed) {
    theta.validate();
    const int d = theta.dim();
    const Matrix L = cholesky_lower(theta.sigma);
    Matrix out(n, d);
    Rng rng = substream(seed, Stream::sample);
    Vector z(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double sp = std::sqrt(draw_scale(rng, theta.alpha));
        const double t = std::abs(rng.normal());
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        out.row(i) = (theta.mu + sp * t * theta.lambda + sp * (L * z)).transpose();
    }
    return out;
}

LabeledSample sample_mixture(std::size_t n, const MixtureModel& model, std::uint64_t seed) {
    model.validate();
    const int d = model.dim();
    const int K = model.k();
    LabeledSample s;
    s.seed = seed;
    s.data.resize(n, d);
    s.labels.resize(n);
    std::vector<Matrix> chol;
    chol.reserve(static_cast<std::size_t>(K));
    for (const auto& c : model.components) chol.push_back(cholesky_lower(c.sigma));

    Rng rng = substream(seed, Stream::sample);
    Vector z(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int k = 0;
        double cum = model.weights[0];
        while (u > cum && k + 1 < K) cum += model.weights[++k];
        const auto& c = model.components[static_cast<std::size_t>(k)];
        const double sp = std::sqrt(draw_scale(rng, c.alpha));
        const double t = std::abs(rng.normal());
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        s.data.row(i) =
            (c.mu + sp * t * c.lambda + sp * (chol[static_cast<std::size_t>(k)] * z)).transpose();
        s.labels[i] = k + 1;
    }
    return s;
}

std::pair<Matrix, Matrix> sample_hierarchy_v(std::size_t n, const ComponentParams& theta,
                                             std::uint64_t seed) {
    theta.validate();
    const int d = theta.dim();
    const Matrix L = cholesky_lower(theta.sigma);
    Matrix direct(n, d), weibull(n, d);
    Rng rng = substream(seed, Stream::sample);
    Vector z(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double sp = std::sqrt(draw_scale(rng, theta.alpha));
        const double t = std::abs(rng.normal());
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        const double e = rng.exponential();
        direct.row(i) =
            ((sp * t * theta.lambda + sp * (L * z)) / std::sqrt(e)).transpose();

        const double w = rng.weibull(theta.alpha);
        const double t2 = std::abs(rng.normal());
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        weibull.row(i) = ((t2 * theta.lambda + L * z) / w).transpose();
    }
    return {std::move(direct), std::move(weibull)};
}

}  // namespace ssgmix
