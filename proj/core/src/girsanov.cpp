#include "pathvar/girsanov.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/stochastic.hpp"

namespace pathvar {

namespace {

constexpr std::uint64_t plain_stream = 1;
constexpr std::uint64_t reweighted_stream = 2;

void require_samples(std::size_t samples, const char* what) {
    if (samples < 2) throw InvalidArgument(std::string(what) + ": at least 2 samples required");
}

}  // namespace

double log_weight(const CameronMartinDrift& u, const DiscretePath& beta,
                  WeightCorruption corruption) {
    if (!(u.grid() == beta.grid()) || u.dim() != beta.dim())
        throw InvalidArgument("log_weight: drift and beta live on different grids");
    const auto increments = increments_of(beta);
    const double ito = ito_integral(u, increments);
    const double energy = 0.5 * cm_norm_sq(u);
    switch (corruption) {
    case WeightCorruption::drop_energy:
        return -ito;
    case WeightCorruption::flip_sign:
        return ito - energy;
    case WeightCorruption::none:
        break;
    }
    return -ito - energy;
}

WeightedSample weighted_sample(const Functional& f, const MeasureSpec& spec, const BasePair& base,
                               const DriftSpec& u, const RandomSource& rng,
                               WeightCorruption corruption) {
    const auto cp = perturb(spec, base, u, rng);
    return {f(cp.path), log_weight(cp.drift, base.beta, corruption)};
}

std::vector<EstimateWithError> plain_expectations(const std::vector<Functional>& statistics,
                                                  const MeasureSpec& spec, const TimeGrid& grid,
                                                  std::size_t samples, const RandomSource& rng) {
    require_samples(samples, "plain_expectations");
    const std::size_t s = statistics.size();
    std::vector<double> values(samples * s);
    parallel_for(samples, [&](std::size_t i) {
        const auto base = sample_base(spec, grid, rng.derive(i).derive(0));
        for (std::size_t j = 0; j < s; ++j) values[j * samples + i] = statistics[j](base.path);
    });
    std::vector<EstimateWithError> out;
    for (std::size_t j = 0; j < s; ++j)
        out.push_back(estimate_mean(std::span(values).subspan(j * samples, samples),
                                    "plain_expectations"));
    return out;
}

std::vector<EstimateWithError> reweighted_expectations(const std::vector<Functional>& statistics,
                                                       const MeasureSpec& spec,
                                                       const DriftSpec& u, const TimeGrid& grid,
                                                       std::size_t samples,
                                                       const RandomSource& rng,
                                                       WeightCorruption corruption) {
    require_samples(samples, "reweighted_expectations");
    const std::size_t s = statistics.size();
    std::vector<double> values(samples * s);
    std::vector<double> log_weights(samples);
    parallel_for(samples, [&](std::size_t i) {
        const RandomSource r = rng.derive(i);
        const auto base = sample_base(spec, grid, r.derive(0));
        const auto cp = perturb(spec, base, u, r.derive(1));
        log_weights[i] = log_weight(cp.drift, base.beta, corruption);
        for (std::size_t j = 0; j < s; ++j) values[j * samples + i] = statistics[j](cp.path);
    });
    std::vector<EstimateWithError> out;
    for (std::size_t j = 0; j < s; ++j)
        out.push_back(estimate_weighted_mean(std::span(values).subspan(j * samples, samples),
                                             log_weights, "reweighted_expectations"));
    return out;
}

EstimateWithError reweighted_expectation(const Functional& f, const MeasureSpec& spec,
                                         const DriftSpec& u, const TimeGrid& grid,
                                         std::size_t samples, const RandomSource& rng) {
    return reweighted_expectations({f}, spec, u, grid, samples, rng).front();
}

double validate_change_of_variable(const Functional& f, const MeasureSpec& spec,
                                   const DriftSpec& u, const TimeGrid& grid, std::size_t samples,
                                   const RandomSource& rng, WeightCorruption corruption) {
    return validate_law_transport({f}, spec, u, grid, samples, rng, corruption).front();
}

std::vector<double> validate_law_transport(const std::vector<Functional>& statistics,
                                           const MeasureSpec& spec, const DriftSpec& u,
                                           const TimeGrid& grid, std::size_t samples,
                                           const RandomSource& rng,
                                           WeightCorruption corruption) {
    const auto plain = plain_expectations(statistics, spec, grid, samples, rng.derive(plain_stream));
    const auto weighted = reweighted_expectations(statistics, spec, u, grid, samples,
                                                  rng.derive(reweighted_stream), corruption);
    std::vector<double> z;
    for (std::size_t j = 0; j < statistics.size(); ++j) z.push_back(z_score(plain[j], weighted[j]));
    return z;
}

}  // namespace pathvar
