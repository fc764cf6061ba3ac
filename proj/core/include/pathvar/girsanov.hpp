#pragma once

#include "pathvar/drift.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/measures.hpp"

#include <vector>

namespace pathvar {

struct WeightedSample {
    double value;       // f on the controlled path
    double log_weight;  // log rho(-delta_beta u)
};

/// Deliberate weight defects used as negative controls.
enum class WeightCorruption {
    none,
    drop_energy,  // omit the -|u|_H^2 / 2 term
    flip_sign,    // use the weight of -u instead of u
};

/// -ito_integral(u, dbeta) - cm_norm_sq(u) / 2 for a drift realized along the base path.
[[nodiscard]] double log_weight(const CameronMartinDrift& u, const DiscretePath& beta,
                                WeightCorruption corruption = WeightCorruption::none);

/// f(perturb(base, u)) paired with its Girsanov log weight, for one base sample.
[[nodiscard]] WeightedSample weighted_sample(const Functional& f, const MeasureSpec& spec,
                                             const BasePair& base, const DriftSpec& u,
                                             const RandomSource& rng,
                                             WeightCorruption corruption = WeightCorruption::none);

/// Plain Monte Carlo estimates of E[f(W)] for each statistic, on one shared set of samples.
[[nodiscard]] std::vector<EstimateWithError> plain_expectations(
    const std::vector<Functional>& statistics, const MeasureSpec& spec, const TimeGrid& grid,
    std::size_t samples, const RandomSource& rng);

/// Estimates of E[f(W^u) rho(-delta_beta u)] for each statistic, on one shared set of samples.
[[nodiscard]] std::vector<EstimateWithError> reweighted_expectations(
    const std::vector<Functional>& statistics, const MeasureSpec& spec, const DriftSpec& u,
    const TimeGrid& grid, std::size_t samples, const RandomSource& rng,
    WeightCorruption corruption = WeightCorruption::none);

[[nodiscard]] EstimateWithError reweighted_expectation(const Functional& f,
                                                       const MeasureSpec& spec,
                                                       const DriftSpec& u, const TimeGrid& grid,
                                                       std::size_t samples,
                                                       const RandomSource& rng);

/// z-score between plain and reweighted estimates computed on independent streams.
[[nodiscard]] double validate_change_of_variable(
    const Functional& f, const MeasureSpec& spec, const DriftSpec& u, const TimeGrid& grid,
    std::size_t samples, const RandomSource& rng,
    WeightCorruption corruption = WeightCorruption::none);

/// Per-statistic z-scores comparing the law of W with the reweighted law of W^u.
[[nodiscard]] std::vector<double> validate_law_transport(
    const std::vector<Functional>& statistics, const MeasureSpec& spec, const DriftSpec& u,
    const TimeGrid& grid, std::size_t samples, const RandomSource& rng,
    WeightCorruption corruption = WeightCorruption::none);

}  // namespace pathvar
