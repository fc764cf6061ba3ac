#pragma once

#include <cstddef>
#include <span>

namespace pathvar {

struct EstimateWithError {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Sample mean and standard error, reduced in index order. Throws
/// EstimationFailure listing the offending indices if any value is non-finite.
[[nodiscard]] EstimateWithError estimate_mean(std::span<const double> values, const char* what);

/// Mean and standard error of value_i * exp(log_weight_i). The exponent is
/// shifted by max_i log_weight_i before exponentiation and restored at the end.
[[nodiscard]] EstimateWithError estimate_weighted_mean(std::span<const double> values,
                                                       std::span<const double> log_weights,
                                                       const char* what);

/// Exact single-evaluation estimate (zero error).
[[nodiscard]] inline EstimateWithError exact_estimate(double value) noexcept {
    return {value, 0.0, 1};
}

struct KsResult {
    double statistic;  // sup |F_a - F_b|
    double p_value;    // asymptotic Kolmogorov distribution
};

/// Two-sample Kolmogorov-Smirnov test.
[[nodiscard]] KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// |a - b| / sqrt(se_a^2 + se_b^2); 0 when both errors vanish and the means agree.
[[nodiscard]] double z_score(const EstimateWithError& a, const EstimateWithError& b) noexcept;

}  // namespace pathvar
