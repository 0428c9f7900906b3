#include "ssgmix/kmedoids.hpp"

#include <limits>
#include <stdexcept>

namespace ssgmix {

namespace {

Matrix manhattan_distances(const Matrix& data) {
    const auto n = data.rows();
    Matrix dist = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (data.row(i) - data.row(j)).cwiseAbs().sum();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    return dist;
}

double total_cost(const Matrix& dist, const std::vector<Eigen::Index>& medoids) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, dist(i, m));
        cost += best;
    }
    return cost;
}

}  // namespace

std::vector<int> pam_manhattan(const Matrix& data, int k) {
    const auto n = data.rows();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw std::invalid_argument("pam_manhattan: k must be in [1, n]");
    const Matrix dist = manhattan_distances(data);

    // BUILD: start from the 1-medoid optimum, then add the point giving the
    // largest cost reduction.
    std::vector<Eigen::Index> medoids;
    {
        Eigen::Index best = 0;
        double best_cost = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < n; ++c) {
            const double cost = dist.col(c).sum();
            if (cost < best_cost) {
                best_cost = cost;
                best = c;
            }
        }
        medoids.push_back(best);
    }
    std::vector<double> nearest(static_cast<std::size_t>(n));
    auto refresh_nearest = [&] {
        for (Eigen::Index i = 0; i < n; ++i) {
            double b = std::numeric_limits<double>::infinity();
            for (auto m : medoids) b = std::min(b, dist(i, m));
            nearest[static_cast<std::size_t>(i)] = b;
        }
    };
    refresh_nearest();
    while (static_cast<int>(medoids.size()) < k) {
        Eigen::Index best = -1;
        double best_gain = -1.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            bool is_medoid = false;
            for (auto m : medoids) is_medoid |= (m == c);
            if (is_medoid) continue;
            double gain = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                gain += std::max(nearest[static_cast<std::size_t>(i)] - dist(i, c), 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                best = c;
            }
        }
        medoids.push_back(best);
        refresh_nearest();
    }

    // SWAP until no single medoid exchange lowers the cost.
    double cost = total_cost(dist, medoids);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t mi = 0; mi < medoids.size(); ++mi) {
            for (Eigen::Index c = 0; c < n; ++c) {
                bool is_medoid = false;
                for (auto m : medoids) is_medoid |= (m == c);
                if (is_medoid) continue;
                const Eigen::Index old = medoids[mi];
                medoids[mi] = c;
                const double trial = total_cost(dist, medoids);
                if (trial + 1e-12 < cost) {
                    cost = trial;
                    improved = true;
                } else {
                    medoids[mi] = old;
                }
            }
        }
    }

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double bd = dist(i, medoids[0]);
        for (std::size_t m = 1; m < medoids.size(); ++m)
            if (dist(i, medoids[m]) < bd) {
                bd = dist(i, medoids[m]);
                best = static_cast<int>(m);
            }
        labels[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

}  // namespace ssgmix
