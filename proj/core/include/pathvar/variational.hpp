#pragma once

#include "pathvar/drift.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/measures.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace pathvar {

struct DualityReport {
    EstimateWithError lhs;  // -log E[e^{-f}]
    EstimateWithError rhs;  // J at the reported drift
    double gap = 0.0;       // rhs - lhs
    double gap_std_error = 0.0;
    std::vector<std::pair<std::size_t, double>> optimizer_trace;  // (epoch, J estimate)
};

/// -log of the Monte Carlo mean of e^{-f}, jackknife bias-corrected, with a
/// delta-method standard error.
[[nodiscard]] EstimateWithError direct_log_laplace(const Functional& f, const MeasureSpec& spec,
                                                   const TimeGrid& grid, std::size_t samples,
                                                   const RandomSource& rng);

/// Same estimator applied to precomputed values f_i.
[[nodiscard]] EstimateWithError log_laplace_from_values(std::span<const double> f_values);

/// J(u) = E[f(W^u) + |u|_H^2 / 2].
[[nodiscard]] EstimateWithError evaluate_J(const Functional& f, const MeasureSpec& spec,
                                           const DriftSpec& u, const TimeGrid& grid,
                                           std::size_t samples, const RandomSource& rng);

/// lhs and rhs on independent streams; gap = rhs - lhs.
[[nodiscard]] DualityReport duality_gap(const Functional& f, const MeasureSpec& spec,
                                        const DriftSpec& u, const TimeGrid& grid,
                                        std::size_t samples, const RandomSource& rng);

// ============================================================================
// Drift families and the optimizer
// ============================================================================

/// A finite-dimensional family theta -> DriftSpec.
///
/// When `linear_basis` is set the family is open loop and linear in theta:
/// udot = sum_j theta_j e_j with the deterministic densities it returns.
struct DriftFamily {
    std::string name;
    std::vector<double> initial;
    std::function<DriftSpec(std::span<const double> theta)> make;
    std::function<std::vector<CameronMartinDrift>(const TimeGrid&)> linear_basis;
};

/// udot = theta (one parameter per component), open loop.
[[nodiscard]] DriftFamily constant_family(std::size_t dim);
/// udot_i = theta_0 x_i + theta_1, closed loop on the controlled state.
[[nodiscard]] DriftFamily affine_feedback_family(std::size_t dim);

struct OptimizerConfig {
    std::size_t epochs = 50;
    std::size_t pool_size = 10000;
    std::size_t batch_size = 1000;
    double learning_rate = 0.1;  // step at epoch e is learning_rate / sqrt(e)
    double fd_step = 1e-3;       // relative to max(1, |theta_j|)
    double clip_bound = 10.0;
    std::size_t final_samples = 100000;
};

struct OptimizationResult {
    std::vector<double> theta;
    DualityReport report;
};

/// Stochastic gradient descent over the clipped family with common random
/// numbers inside each epoch. Returns the epoch-best theta and a duality
/// report evaluated on an independent stream.
[[nodiscard]] OptimizationResult optimize_drift(const Functional& f, const MeasureSpec& spec,
                                                const DriftFamily& family, const TimeGrid& grid,
                                                const OptimizerConfig& config,
                                                const RandomSource& rng);

// ============================================================================
// Foellmer drift
// ============================================================================

/// Gauss-Hermite rule for int e^{-y^2} p(y) dy (Golub-Welsch).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] GaussHermite gauss_hermite(std::size_t n);

/// d/dx log E[e^{-g(x + sqrt(s) Z)}], Z standard normal, by 64-node
/// Gauss-Hermite quadrature in log space. Requires s > 0.
[[nodiscard]] double foellmer_gradient(const std::function<double(double)>& g, double s, double x);

/// Closed-loop drift udot(t, x) = d/dx log P_{1-t}[e^{-g}](x) on scalar Wiener space.
[[nodiscard]] DriftSpec foellmer_drift(std::function<double(double)> g);

/// Closed form of the Foellmer drift for g = lambda x^2:
/// udot(t, x) = -2 lambda x / (1 + 2 lambda (1 - t)).
[[nodiscard]] DriftSpec foellmer_quadratic(double lambda);

// ============================================================================
// Density transforms
// ============================================================================

/// min(L_i, n) renormalized to unit empirical mean.
[[nodiscard]] std::vector<double> truncate_density(std::span<const double> values, double bound);
/// (L_i + a) / (1 + a).
[[nodiscard]] std::vector<double> blend_density(std::span<const double> values, double a);

}  // namespace pathvar
