#pragma once

#include "pathvar/grid.hpp"
#include "pathvar/random.hpp"

#include <span>
#include <vector>

namespace pathvar {

/// N rows of `dim` i.i.d. N(0, dt) draws from the start of `rng`'s stream.
[[nodiscard]] std::vector<double> brownian_increments(const TimeGrid& grid, std::size_t dim,
                                                      const RandomSource& rng);
/// Same, continuing an engine that is already in use.
[[nodiscard]] std::vector<double> brownian_increments(const TimeGrid& grid, std::size_t dim,
                                                      RandomSource::Engine& engine);

/// Squared Cameron-Martin norm sum_k |udot_k|^2 dt.
[[nodiscard]] double cm_norm_sq(const CameronMartinDrift& u) noexcept;

/// Left-endpoint Ito sum sum_k <vdot_k, dm_k>.
[[nodiscard]] double ito_integral(const CameronMartinDrift& v, std::span<const double> increments);

/// log of the Wick exponential: ito_integral(v, dm) - |v|_H^2 / 2, with the
/// integrator's quadratic variation taken as dt * I.
[[nodiscard]] double log_wick(const CameronMartinDrift& v, std::span<const double> increments);

}  // namespace pathvar
