#pragma once

#include "pathvar/drift.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/measures.hpp"

#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace pathvar {

enum class Criterion { yes, no, unknown };

[[nodiscard]] const char* to_string(Criterion c) noexcept;

struct EntropyReport {
    EstimateWithError kinetic;             // E[|u|_H^2] / 2
    std::optional<double> entropy;         // H(W^u nu | nu), when an oracle applies
    std::optional<double> defect;          // kinetic - entropy
    Criterion criterion_met = Criterion::unknown;
    std::optional<double> inverse_residual;
};

/// Monte Carlo estimate of E[|u|_H^2] / 2 along base samples; a single exact
/// evaluation when u is deterministic.
[[nodiscard]] EstimateWithError kinetic_energy(const MeasureSpec& spec, const DriftSpec& u,
                                               const TimeGrid& grid, std::size_t samples,
                                               const RandomSource& rng);

/// |h|_H^2 / 2, the relative entropy of a deterministic Cameron-Martin shift.
[[nodiscard]] double entropy_deterministic_shift(const CameronMartinDrift& h);

/// Exact relative entropy of the discretized controlled path
/// X_{k+1} = X_k + dW_k + (a_k X_k + b_k) dt against the discretized Wiener law.
[[nodiscard]] double entropy_gaussian_linear(std::span<const double> slope,
                                             std::span<const double> offset,
                                             const TimeGrid& grid);

/// Realizes a deterministic drift on a grid.
[[nodiscard]] CameronMartinDrift realize_deterministic(const DriftSpec& u, const TimeGrid& grid);

/// Inverse of the scalar affine feedback u_k = a_k x_k + b_k: v reads the
/// state of the path it perturbs, so that u + v o W^u = 0.
[[nodiscard]] DriftSpec affine_inverse(std::span<const double> slope,
                                       std::span<const double> offset);

/// sup-norm of (W^v o W^u)(base) - W.
[[nodiscard]] double invert_check(const MeasureSpec& spec, const DriftSpec& u,
                                  const DriftSpec& v, const BasePair& base,
                                  const RandomSource& rng);

struct NoOracle {};
/// u deterministic: entropy = |u|_H^2 / 2.
struct ShiftOracle {};
/// Wiener family with scalar affine feedback u_k = slope_k x_k + offset_k.
struct GaussianLinearOracle {
    std::vector<double> slope;
    std::vector<double> offset;
};
using EntropyOracle = std::variant<NoOracle, ShiftOracle, GaussianLinearOracle>;

struct CriterionOptions {
    std::size_t samples = 100000;
    double relative_tolerance = 0.01;
    std::optional<DriftSpec> inverse;   // candidate v for invert_check
    std::size_t inverse_paths = 16;
    double inverse_tolerance = 1e-8;
};

/// Compares kinetic energy with the oracle entropy; criterion is unknown
/// without an oracle.
[[nodiscard]] EntropyReport criterion_report(const MeasureSpec& spec, const DriftSpec& u,
                                             const EntropyOracle& oracle, const TimeGrid& grid,
                                             const CriterionOptions& options,
                                             const RandomSource& rng);

}  // namespace pathvar
