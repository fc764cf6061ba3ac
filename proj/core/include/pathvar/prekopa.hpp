#pragma once

#include "pathvar/functional.hpp"
#include "pathvar/measures.hpp"

#include <optional>
#include <vector>

namespace pathvar {

/// Positive functionals a, b, c, a weight t in [0, 1] and an optional
/// positive density d defining theta = d nu (up to normalization).
struct PLInstance {
    Functional a;
    Functional b;
    Functional c;
    double t = 0.5;
    std::optional<Functional> theta_density;
};

/// Fraction of base samples on which
///   a(W^{th+(1-t)k}) e^{-|th+(1-t)k|^2/2} >= (b(W^h) e^{-|h|^2/2})^t (c(W^k) e^{-|k|^2/2})^{1-t}
/// fails by more than 1e-9 relative, compared in log space. h and k are deterministic.
[[nodiscard]] double pl_hypothesis_probe(const PLInstance& inst, const MeasureSpec& spec,
                                         const CameronMartinDrift& h, const CameronMartinDrift& k,
                                         std::size_t samples, const RandomSource& rng);

/// Fraction of base samples on which h -> -log d(W^h) fails the midpoint
/// concavity test on the segment [h, k].
[[nodiscard]] double density_concavity_probe(const Functional& d, const MeasureSpec& spec,
                                             const CameronMartinDrift& h,
                                             const CameronMartinDrift& k, std::size_t samples,
                                             const RandomSource& rng);

struct PLCheck {
    double margin;     // log E[a] - t log E[b] - (1 - t) log E[c]
    double std_error;  // delta method, independent streams
    double z;          // margin / std_error (0 when both vanish)
};

/// Estimates the Prekopa-Leindler margin; expectations are weighted by d when present.
[[nodiscard]] PLCheck pl_check(const PLInstance& inst, const MeasureSpec& spec,
                               const TimeGrid& grid, std::size_t samples,
                               const RandomSource& rng);

struct PLCertificate {
    std::vector<double> drift_levels;     // constant densities used for h and k
    double max_violation_rate = 0.0;      // over all (h, k) pairs
    double max_concavity_violation = 0.0; // 0 without a density
    bool hypothesis_clear = false;        // no violation found on the grid
    PLCheck check{};
};

/// Probes the hypothesis on the grid of constant drifts {-1, -0.5, 0, 0.5, 1}
/// for h and k, then runs pl_check. Certifies only "no violation found".
[[nodiscard]] PLCertificate certify(const PLInstance& inst, const MeasureSpec& spec,
                                    const TimeGrid& grid, std::size_t probe_samples,
                                    std::size_t check_samples, const RandomSource& rng);

}  // namespace pathvar
