#include "pathvar/estimate.hpp"

#include "pathvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pathvar {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) bad.push_back(i);
    if (!bad.empty()) throw EstimationFailure(std::move(bad), what);
}

EstimateWithError moments(std::span<const double> values, double scale) {
    const std::size_t m = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;
    return {scale * mean, scale * std::sqrt(var / static_cast<double>(m)), m};
}

}  // namespace

EstimateWithError estimate_mean(std::span<const double> values, const char* what) {
    if (values.empty()) throw InvalidArgument(std::string(what) + ": no samples");
    require_finite(values, what);
    return moments(values, 1.0);
}

EstimateWithError estimate_weighted_mean(std::span<const double> values,
                                         std::span<const double> log_weights, const char* what) {
    if (values.size() != log_weights.size())
        throw InvalidArgument(std::string(what) + ": values and weights differ in length");
    if (values.empty()) throw InvalidArgument(std::string(what) + ": no samples");
    require_finite(values, what);
    require_finite(log_weights, what);
    const double shift = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> scaled(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        scaled[i] = values[i] * std::exp(log_weights[i] - shift);
    return moments(scaled, std::exp(shift));
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double ne = std::sqrt(nx * ny / (nx + ny));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    if (lambda < 1e-3) {
        p = 1.0;
    } else {
        double sign = 1.0;
        for (int k = 1; k <= 100; ++k) {
            const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
            p += term;
            if (std::abs(term) < 1e-12) break;
            sign = -sign;
        }
        p = std::clamp(2.0 * p, 0.0, 1.0);
    }
    return {d, p};
}

double z_score(const EstimateWithError& a, const EstimateWithError& b) noexcept {
    const double diff = std::abs(a.mean - b.mean);
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / se;
}

}  // namespace pathvar
