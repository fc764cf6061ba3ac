#include "pathvar/functional.hpp"

#include "pathvar/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pathvar {

namespace {

double endpoint(const DiscretePath& p, std::size_t i) {
    if (i >= p.dim()) throw InvalidArgument("functional: component out of range");
    return p(p.grid().steps(), i);
}

std::size_t midpoint_node(const DiscretePath& p) { return p.grid().nearest_node(0.5); }

}  // namespace

Functional constant_functional(double value) {
    return {"constant",
            [value](const DiscretePath&) { return value; },
            "bounded",
            [](const DiscretePath&, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
            }};
}

Functional linear_endpoint(double c, std::size_t component) {
    return {"linear-endpoint",
            [c, component](const DiscretePath& p) { return c * endpoint(p, component); },
            "Gaussian tails under the tested families; e^{-f} has all moments",
            [c, component](const DiscretePath& p, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                out[p.grid().steps() * p.dim() + component] = c;
            }};
}

Functional quadratic_endpoint(double lambda) {
    return {"quadratic-endpoint",
            [lambda](const DiscretePath& p) {
                double s = 0.0;
                for (double x : p.node(p.grid().steps())) s += x * x;
                return lambda * s;
            },
            "requires 1 + 2 lambda > 0 for e^{-f} to be integrable",
            [lambda](const DiscretePath& p, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                const std::size_t k = p.grid().steps();
                for (std::size_t i = 0; i < p.dim(); ++i)
                    out[k * p.dim() + i] = 2.0 * lambda * p(k, i);
            }};
}

Functional clamped_endpoint(double lo, double hi) {
    return {"clamped-endpoint",
            [lo, hi](const DiscretePath& p) { return std::clamp(endpoint(p, 0), lo, hi); },
            "bounded",
            {}};
}

Functional clamped_midpoint(double lo, double hi) {
    return {"clamped-midpoint",
            [lo, hi](const DiscretePath& p) { return std::clamp(p(midpoint_node(p), 0), lo, hi); },
            "bounded",
            {}};
}

Functional clamped_midpoint_square(double cap) {
    return {"clamped-midpoint-square",
            [cap](const DiscretePath& p) {
                const double x = p(midpoint_node(p), 0);
                return std::min(x * x, cap);
            },
            "bounded",
            {}};
}

Functional running_max_clamp(double lo, double hi) {
    return {"running-max-clamp",
            [lo, hi](const DiscretePath& p) {
                double m = p(0, 0);
                for (std::size_t k = 1; k < p.grid().nodes(); ++k) m = std::max(m, p(k, 0));
                return std::clamp(m, lo, hi);
            },
            "bounded",
            {}};
}

Functional exp_linear_endpoint(double c) {
    return {"exp-linear-endpoint",
            [c](const DiscretePath& p) { return std::exp(-c * endpoint(p, 0)); },
            "positive with all moments under Gaussian tails",
            {}};
}

std::vector<Functional> standard_statistics() {
    return {clamped_endpoint(), clamped_midpoint_square(), running_max_clamp()};
}

}  // namespace pathvar
