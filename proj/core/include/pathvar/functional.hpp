#pragma once

#include "pathvar/grid.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pathvar {

/// A path functional f: DiscretePath -> R with an optional node-wise gradient.
///
/// `integrability_note` records the caller's assertion about the moment
/// hypotheses f must satisfy; it is carried for reporting only.
struct Functional {
    using Evaluator = std::function<double(const DiscretePath&)>;
    /// Writes df/dx(k, i) into out[k * dim + i] (out has nodes * dim entries).
    using Gradient = std::function<void(const DiscretePath&, std::span<double> out)>;

    std::string name;
    Evaluator evaluate;
    std::string integrability_note;
    Gradient gradient;  // empty when not available

    [[nodiscard]] double operator()(const DiscretePath& path) const { return evaluate(path); }
    [[nodiscard]] bool has_gradient() const noexcept { return static_cast<bool>(gradient); }
};

/// f = value.
[[nodiscard]] Functional constant_functional(double value);
/// f = c * W(1)_component.
[[nodiscard]] Functional linear_endpoint(double c, std::size_t component = 0);
/// f = lambda * |W(1)|^2.
[[nodiscard]] Functional quadratic_endpoint(double lambda);
/// f = clamp(W(1)_0, lo, hi).
[[nodiscard]] Functional clamped_endpoint(double lo = -2.0, double hi = 2.0);
/// f = clamp(W(1/2)_0, lo, hi), with 1/2 taken at the nearest node.
[[nodiscard]] Functional clamped_midpoint(double lo = -2.0, double hi = 2.0);
/// f = min(W(1/2)_0^2, cap).
[[nodiscard]] Functional clamped_midpoint_square(double cap = 4.0);
/// f = clamp(max_k W(t_k)_0, lo, hi).
[[nodiscard]] Functional running_max_clamp(double lo = -2.0, double hi = 2.0);
/// f = exp(-c * W(1)_0); positive, used by the Prekopa-Leindler checks.
[[nodiscard]] Functional exp_linear_endpoint(double c);

/// The bounded statistics used for law-transport checks: clamped endpoint,
/// clamped midpoint square and running-max clamp.
[[nodiscard]] std::vector<Functional> standard_statistics();

}  // namespace pathvar
