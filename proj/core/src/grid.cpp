#include "pathvar/grid.hpp"

#include "pathvar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pathvar {

TimeGrid::TimeGrid(std::size_t steps) : steps_(steps) {
    if (steps == 0) throw InvalidArgument("TimeGrid: steps must be positive");
}

std::size_t TimeGrid::nearest_node(double t) const noexcept {
    const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(steps_);
    const double lo = std::floor(x);
    const auto k = static_cast<std::size_t>(lo);
    return (x - lo > 0.5 && k < steps_) ? k + 1 : k;
}

DiscretePath::DiscretePath(TimeGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim), values_(grid.nodes() * dim, 0.0) {
    if (dim == 0) throw InvalidArgument("DiscretePath: dim must be positive");
}

DiscretePath::DiscretePath(TimeGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
    if (dim == 0) throw InvalidArgument("DiscretePath: dim must be positive");
    if (values_.size() != grid_.nodes() * dim_)
        throw InvalidArgument("DiscretePath: expected " + std::to_string(grid_.nodes() * dim_) +
                              " values, got " + std::to_string(values_.size()));
}

bool DiscretePath::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double DiscretePath::sup_distance(const DiscretePath& other) const {
    return sup_distance(other, grid_.steps());
}

double DiscretePath::sup_distance(const DiscretePath& other, std::size_t last_node) const {
    if (!(grid_ == other.grid_) || dim_ != other.dim_)
        throw InvalidArgument("sup_distance: grid or dimension mismatch");
    const std::size_t end = (std::min(last_node, grid_.steps()) + 1) * dim_;
    double d = 0.0;
    for (std::size_t i = 0; i < end; ++i) d = std::max(d, std::abs(values_[i] - other.values_[i]));
    return d;
}

CameronMartinDrift::CameronMartinDrift(TimeGrid grid, std::size_t dim)
    : grid_(grid), dim_(dim), density_(grid.steps() * dim, 0.0) {
    if (dim == 0) throw InvalidArgument("CameronMartinDrift: dim must be positive");
}

CameronMartinDrift::CameronMartinDrift(TimeGrid grid, std::size_t dim, std::vector<double> density)
    : grid_(grid), dim_(dim), density_(std::move(density)) {
    if (dim == 0) throw InvalidArgument("CameronMartinDrift: dim must be positive");
    if (density_.size() != grid_.steps() * dim_)
        throw InvalidArgument("CameronMartinDrift: expected " +
                              std::to_string(grid_.steps() * dim_) + " density values, got " +
                              std::to_string(density_.size()));
    for (double v : density_)
        if (!std::isfinite(v)) throw InvalidArgument("CameronMartinDrift: non-finite density");
}

CameronMartinDrift CameronMartinDrift::constant(TimeGrid grid, std::size_t dim, double value) {
    return CameronMartinDrift(grid, dim, std::vector<double>(grid.steps() * dim, value));
}

DiscretePath CameronMartinDrift::induced_path() const {
    return path_from_increments(grid_, dim_, [&] {
        std::vector<double> inc(density_);
        const double dt = grid_.dt();
        for (double& v : inc) v *= dt;
        return inc;
    }());
}

bool CameronMartinDrift::is_zero() const noexcept {
    return std::all_of(density_.begin(), density_.end(), [](double v) { return v == 0.0; });
}

double CameronMartinDrift::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : density_) m = std::max(m, std::abs(v));
    return m;
}

CameronMartinDrift CameronMartinDrift::operator-() const { return -1.0 * *this; }

namespace {
void require_same_shape(const CameronMartinDrift& a, const CameronMartinDrift& b) {
    if (!(a.grid() == b.grid()) || a.dim() != b.dim())
        throw InvalidArgument("CameronMartinDrift: grid or dimension mismatch");
}
}  // namespace

CameronMartinDrift operator+(const CameronMartinDrift& a, const CameronMartinDrift& b) {
    require_same_shape(a, b);
    CameronMartinDrift r(a);
    for (std::size_t i = 0; i < r.density_.size(); ++i) r.density_[i] += b.density_[i];
    return r;
}

CameronMartinDrift operator-(const CameronMartinDrift& a, const CameronMartinDrift& b) {
    require_same_shape(a, b);
    CameronMartinDrift r(a);
    for (std::size_t i = 0; i < r.density_.size(); ++i) r.density_[i] -= b.density_[i];
    return r;
}

CameronMartinDrift operator*(double s, const CameronMartinDrift& a) {
    CameronMartinDrift r(a);
    for (double& v : r.density_) v *= s;
    return r;
}

std::vector<double> increments_of(const DiscretePath& path) {
    const std::size_t n = path.dim();
    const std::size_t steps = path.grid().steps();
    std::vector<double> inc(steps * n);
    const auto v = path.values();
    for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t i = 0; i < n; ++i) inc[k * n + i] = v[(k + 1) * n + i] - v[k * n + i];
    return inc;
}

DiscretePath path_from_increments(const TimeGrid& grid, std::size_t dim,
                                  std::span<const double> increments,
                                  std::span<const double> origin) {
    if (increments.size() != grid.steps() * dim)
        throw InvalidArgument("path_from_increments: increment count mismatch");
    if (!origin.empty() && origin.size() != dim)
        throw InvalidArgument("path_from_increments: origin dimension mismatch");
    DiscretePath p(grid, dim);
    if (!origin.empty())
        for (std::size_t i = 0; i < dim; ++i) p(0, i) = origin[i];
    for (std::size_t k = 0; k < grid.steps(); ++k)
        for (std::size_t i = 0; i < dim; ++i) p(k + 1, i) = p(k, i) + increments[k * dim + i];
    return p;
}

}  // namespace pathvar
