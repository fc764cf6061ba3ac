#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pathvar {

// ============================================================================
// TimeGrid: uniform partition t_k = k/N of [0, 1]
// ============================================================================

class TimeGrid {
public:
    explicit TimeGrid(std::size_t steps);

    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] std::size_t nodes() const noexcept { return steps_ + 1; }
    [[nodiscard]] double dt() const noexcept { return 1.0 / static_cast<double>(steps_); }
    [[nodiscard]] double time(std::size_t k) const noexcept {
        return k == steps_ ? 1.0 : static_cast<double>(k) / static_cast<double>(steps_);
    }

    /// Index of the node closest to t (ties round down).
    [[nodiscard]] std::size_t nearest_node(double t) const noexcept;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t steps_;
};

// ============================================================================
// DiscretePath: N+1 node values in R^n, row-major by node
// ============================================================================

class DiscretePath {
public:
    DiscretePath(TimeGrid grid, std::size_t dim);
    DiscretePath(TimeGrid grid, std::size_t dim, std::vector<double> values);

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    [[nodiscard]] std::span<const double> node(std::size_t k) const noexcept {
        return {values_.data() + k * dim_, dim_};
    }
    [[nodiscard]] std::span<double> node(std::size_t k) noexcept {
        return {values_.data() + k * dim_, dim_};
    }
    [[nodiscard]] double operator()(std::size_t k, std::size_t i) const noexcept {
        return values_[k * dim_ + i];
    }
    [[nodiscard]] double& operator()(std::size_t k, std::size_t i) noexcept {
        return values_[k * dim_ + i];
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }

    [[nodiscard]] bool all_finite() const noexcept;

    /// Node-wise sup-norm distance over nodes [0, last_node]; paths must share grid and dim.
    [[nodiscard]] double sup_distance(const DiscretePath& other) const;
    [[nodiscard]] double sup_distance(const DiscretePath& other, std::size_t last_node) const;

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> values_;
};

// ============================================================================
// CameronMartinDrift: piecewise-constant density on the N grid cells
// ============================================================================

class CameronMartinDrift {
public:
    CameronMartinDrift(TimeGrid grid, std::size_t dim);
    CameronMartinDrift(TimeGrid grid, std::size_t dim, std::vector<double> density);

    /// Density equal to `value` on every cell and component.
    static CameronMartinDrift constant(TimeGrid grid, std::size_t dim, double value);
    /// Density sampled from f(t_k) on each cell (left endpoint), all components equal.
    template <class F>
    static CameronMartinDrift from_function(TimeGrid grid, std::size_t dim, F&& f) {
        CameronMartinDrift d(grid, dim);
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            const double v = f(grid.time(k));
            for (std::size_t i = 0; i < dim; ++i) d(k, i) = v;
        }
        return d;
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    [[nodiscard]] std::span<const double> cell(std::size_t k) const noexcept {
        return {density_.data() + k * dim_, dim_};
    }
    [[nodiscard]] std::span<double> cell(std::size_t k) noexcept {
        return {density_.data() + k * dim_, dim_};
    }
    [[nodiscard]] double operator()(std::size_t k, std::size_t i) const noexcept {
        return density_[k * dim_ + i];
    }
    [[nodiscard]] double& operator()(std::size_t k, std::size_t i) noexcept {
        return density_[k * dim_ + i];
    }
    [[nodiscard]] std::span<const double> density() const noexcept { return density_; }

    /// Induced path u(t_k) = sum_{j<k} udot_j dt, starting at 0.
    [[nodiscard]] DiscretePath induced_path() const;

    [[nodiscard]] bool is_zero() const noexcept;
    [[nodiscard]] double sup_norm() const noexcept;

    [[nodiscard]] CameronMartinDrift operator-() const;
    friend CameronMartinDrift operator+(const CameronMartinDrift& a, const CameronMartinDrift& b);
    friend CameronMartinDrift operator-(const CameronMartinDrift& a, const CameronMartinDrift& b);
    friend CameronMartinDrift operator*(double s, const CameronMartinDrift& a);

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> density_;
};

/// Increments m(t_{k+1}) - m(t_k) of a path, as N rows of dim values.
[[nodiscard]] std::vector<double> increments_of(const DiscretePath& path);

/// Cumulative sums of N increment rows into a path starting at `origin`
/// (zero when empty).
[[nodiscard]] DiscretePath path_from_increments(const TimeGrid& grid, std::size_t dim,
                                                std::span<const double> increments,
                                                std::span<const double> origin = {});

}  // namespace pathvar
