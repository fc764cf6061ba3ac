#pragma once

#include "pathvar/grid.hpp"

#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace pathvar {

/// Which path a feedback drift reads its state from: the path being built
/// (W^u, "closed loop on the controlled state") or the base sample W.
enum class FeedbackPoint { controlled, base };

struct FeedbackInput {
    std::size_t cell;
    double time;
    std::span<const double> state;
};

/// One basis map (t, x) -> R^dim of a feedback drift; writes into `out`.
using FeedbackBasis = std::function<void(const FeedbackInput&, std::span<double> out)>;

// ============================================================================
// DriftSpec: drift policies admitted as perturbation directions
// ============================================================================

class DriftSpec {
public:
    /// Deterministic density fixed on a grid.
    struct OpenLoop {
        CameronMartinDrift density;
    };
    /// Deterministic constant density, independent of the grid.
    struct Constant {
        std::vector<double> value;
    };
    /// udot(t) = sum_b weights[b] * basis[b](t, state(t)).
    struct ClosedLoop {
        std::size_t dim;
        std::vector<FeedbackBasis> basis;
        std::vector<double> weights;
        FeedbackPoint point = FeedbackPoint::controlled;
    };
    /// udot(t) = inner_udot(t - lag) for t >= lag, zero before.
    struct Retarded {
        std::shared_ptr<const DriftSpec> inner;
        double lag;
    };
    /// Component-wise clamp of the inner density to [-bound, bound].
    struct Clipped {
        std::shared_ptr<const DriftSpec> inner;
        double bound;
    };
    using Variant = std::variant<OpenLoop, Constant, ClosedLoop, Retarded, Clipped>;

    DriftSpec(OpenLoop v);
    DriftSpec(Constant v);
    DriftSpec(ClosedLoop v);
    DriftSpec(Retarded v);
    DriftSpec(Clipped v);

    [[nodiscard]] static DriftSpec zero(std::size_t dim);
    [[nodiscard]] static DriftSpec constant(std::size_t dim, double value);
    [[nodiscard]] static DriftSpec open_loop(CameronMartinDrift density);

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }
    [[nodiscard]] std::size_t dim() const noexcept;
    /// True when the realized density does not depend on the sample.
    [[nodiscard]] bool is_deterministic() const noexcept;

private:
    Variant v_;
};

/// Clipped wrapper: max(min(udot, m), -m) per component. Requires m > 0.
[[nodiscard]] DriftSpec clip_drift(DriftSpec u, double bound);
/// Retarded wrapper: density at t is the inner density at t - lag, zero on
/// [0, lag). The lag must be a positive multiple of the grid step at
/// realization time; lag = 1 yields the zero drift.
[[nodiscard]] DriftSpec retard_drift(DriftSpec u, double lag);

/// udot_i = slope * x_i + offset for i < dim, x read at `point`.
[[nodiscard]] DriftSpec affine_feedback(std::size_t dim, double slope, double offset,
                                        FeedbackPoint point = FeedbackPoint::controlled);
/// Scalar affine feedback with per-cell coefficients: udot_k = a_k x_k + b_k.
[[nodiscard]] DriftSpec affine_feedback_cells(std::vector<double> slope,
                                              std::vector<double> offset,
                                              FeedbackPoint point = FeedbackPoint::controlled);

// ============================================================================
// DriftRealizer: evaluates a DriftSpec cell by cell along a path under construction
// ============================================================================

class DriftRealizer {
public:
    /// `spec` must outlive the realizer.
    DriftRealizer(const DriftSpec& spec, const TimeGrid& grid);
    ~DriftRealizer();
    DriftRealizer(DriftRealizer&&) noexcept;
    DriftRealizer& operator=(DriftRealizer&&) noexcept;

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

    /// Density on cell k given node-k states of the base and controlled paths.
    /// Cells must be visited in order 0, 1, ..., N-1.
    void next(std::size_t cell, std::span<const double> base_state,
              std::span<const double> controlled_state, std::span<double> out);

private:
    struct Node;
    void eval(std::size_t node, std::size_t cell, std::span<const double> base_state,
              std::span<const double> controlled_state, std::span<double> out);
    std::size_t compile(const DriftSpec& spec);

    TimeGrid grid_;
    std::size_t dim_;
    std::vector<Node> nodes_;
};

}  // namespace pathvar
