#include "ssgmix/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ssgmix/estep.hpp"

namespace ssgmix {

int bic_free_parameters(int k, int d) {
    return k * (1 + 2 * d + d * (d + 1) / 2) + (k - 1);
}

double bic(double loglik, std::size_t n, int k, int d) {
    if (n < 2) throw std::invalid_argument("bic: need n > 1");
    return -2.0 * loglik + bic_free_parameters(k, d) * std::log(static_cast<double>(n));
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
    if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty partitions");

    std::map<int, int> ra, rb;
    for (int v : a) ra.emplace(v, static_cast<int>(ra.size()));
    for (int v : b) rb.emplace(v, static_cast<int>(rb.size()));
    std::map<std::pair<int, int>, long long> cont;
    std::map<int, long long> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cont[{ra[a[i]], rb[b[i]]}];
        ++rows[ra[a[i]]];
        ++cols[rb[b[i]]];
    }
    const auto choose2 = [](long long m) { return 0.5 * static_cast<double>(m) * (m - 1); };
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : cont) index += choose2(c);
    for (const auto& [key, c] : rows) sum_a += choose2(c);
    for (const auto& [key, c] : cols) sum_b += choose2(c);
    const double total = choose2(static_cast<long long>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) return 0.0;
    return (index - expected) / denom;
}

std::vector<int> classify(const Matrix& data, const MixtureModel& model, const FitConfig& cfg) {
    return classify_loglik(data, model, cfg).first;
}

}  // namespace ssgmix
