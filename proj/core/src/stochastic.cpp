#include "pathvar/stochastic.hpp"

#include "pathvar/errors.hpp"

#include <cmath>

namespace pathvar {

std::vector<double> brownian_increments(const TimeGrid& grid, std::size_t dim,
                                        const RandomSource& rng) {
    auto engine = rng.engine();
    return brownian_increments(grid, dim, engine);
}

std::vector<double> brownian_increments(const TimeGrid& grid, std::size_t dim,
                                        RandomSource::Engine& engine) {
    if (dim == 0) throw InvalidArgument("brownian_increments: dim must be positive");
    std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
    std::vector<double> inc(grid.steps() * dim);
    for (double& v : inc) v = normal(engine);
    return inc;
}

double cm_norm_sq(const CameronMartinDrift& u) noexcept {
    double s = 0.0;
    for (double v : u.density()) s += v * v;
    return s * u.grid().dt();
}

double ito_integral(const CameronMartinDrift& v, std::span<const double> increments) {
    const auto d = v.density();
    if (increments.size() != d.size())
        throw InvalidArgument("ito_integral: integrand and increments do not share grid and dim");
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * increments[i];
    return s;
}

double log_wick(const CameronMartinDrift& v, std::span<const double> increments) {
    return ito_integral(v, increments) - 0.5 * cm_norm_sq(v);
}

}  // namespace pathvar
