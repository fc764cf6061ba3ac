#pragma once

#include "pathvar/drift.hpp"
#include "pathvar/grid.hpp"
#include "pathvar/random.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pathvar {

// ============================================================================
// Measure families
// ============================================================================

/// Standard Brownian motion on R^dim; beta = W.
struct WienerSpec {
    std::size_t dim = 1;
};

/// Brownian bridge pinned at W(1) = endpoint.
struct BridgeSpec {
    std::vector<double> endpoint;
};

struct LoopAtom {
    std::vector<double> endpoint;
    double weight;
};

/// Finite mixture of bridges; drift grad_x log h with h the mixture heat kernel.
struct LoopSpec {
    std::vector<LoopAtom> atoms;
};

struct ParticleScheme {
    double gap_floor = 1e-6;
    int max_halvings = 40;
    double drift_cap = 1e6;
};

/// Ordered particles dZ_i = sigma dB_i + (b Z_i + c + gamma sum_j 1/(Z_i - Z_j)) dt.
struct ParticlesSpec {
    double sigma = 1.0;
    double linear_drift = 0.0;    // b
    double constant_drift = 0.0;  // c
    double repulsion = 1.0;       // gamma
    std::vector<double> start;    // z(0), strictly increasing
    ParticleScheme scheme{};
};

/// Scalar coefficient function; `constant` is set when the function is known
/// to be constant (enables the additive shift representation).
struct Coefficient {
    std::function<double(double)> fn;
    std::optional<double> constant;

    [[nodiscard]] static Coefficient constant_value(double c);
    [[nodiscard]] double operator()(double x) const { return fn(x); }
};

/// Scalar diffusion dX = sigma(X) dbeta + b(X) dt, X(0) = start. The sampled
/// path stacks (X, beta) as two components; the drift acts on the single
/// noise component. The caller asserts sigma and b are bounded and Lipschitz.
struct DiffusionSpec {
    Coefficient volatility;
    Coefficient drift;
    double start = 0.0;
};

using MeasureSpec = std::variant<WienerSpec, BridgeSpec, LoopSpec, ParticlesSpec, DiffusionSpec>;

/// Throws InvalidArgument naming the violated invariant.
void validate(const MeasureSpec& spec);
[[nodiscard]] std::string family_name(const MeasureSpec& spec);
/// Dimension of sampled paths W.
[[nodiscard]] std::size_t path_dim(const MeasureSpec& spec);
/// Dimension of beta and of admissible drifts.
[[nodiscard]] std::size_t noise_dim(const MeasureSpec& spec);

// ============================================================================
// Coupled samples and controlled paths
// ============================================================================

struct BasePair {
    DiscretePath path;  // W
    DiscretePath beta;  // the nu-Brownian motion, beta(0) = 0
};

struct ControlledPath {
    DiscretePath path;                       // W^u
    CameronMartinDrift drift;                // u realized along this sample
    std::optional<CameronMartinDrift> shift; // w^u with W^u = W + w^u, when available
};

/// Draws (W, beta) under the family.
[[nodiscard]] BasePair sample_base(const MeasureSpec& spec, const TimeGrid& grid,
                                   const RandomSource& rng);

/// Builds W^u from the base pair with driving increments dbeta + udot dt.
/// `rng` feeds the particle sub-stepper only. A drift that realizes to zero
/// returns W itself.
[[nodiscard]] ControlledPath perturb(const MeasureSpec& spec, const BasePair& base,
                                     const DriftSpec& u, const RandomSource& rng);

/// Recovers beta from a path by the family's quadrature (identity for Wiener).
[[nodiscard]] DiscretePath beta_functional(const MeasureSpec& spec, const DiscretePath& path);

/// The family's forward scheme applied to driving noise beta with zero drift.
/// For loop measures this is the Euler path of the mixture SDE rather than
/// the atom-then-bridge sampler used by sample_base.
[[nodiscard]] DiscretePath scheme_path(const MeasureSpec& spec, const DiscretePath& beta,
                                       const RandomSource& rng);

/// Last node at which beta_functional inverts the sampler exactly: N - 1 for
/// bridges, whose last cell falls back to quadrature, and N otherwise.
[[nodiscard]] std::size_t beta_recovery_last_node(const MeasureSpec& spec, const TimeGrid& grid);

/// (W^u, beta + u): the base pair seen from a controlled path.
[[nodiscard]] BasePair as_base(const BasePair& base, const ControlledPath& controlled);

// ============================================================================
// Family internals exposed for checking
// ============================================================================

struct LoopKernelValue {
    double log_h;
    double h;
    std::vector<double> hgrad;     // grad_x h
    std::vector<double> grad_log;  // hgrad / h, computed in log space
};

/// Mixture heat kernel h(t, x) = sum_i alpha_i (2 pi (1 - t))^{-n/2}
/// exp(-|x - a_i|^2 / (2 (1 - t))) and its x-gradient, for t in [0, 1).
[[nodiscard]] LoopKernelValue loop_kernel(double t, std::span<const double> x,
                                          const std::vector<LoopAtom>& atoms);

/// Particle paths driven by the given Brownian increments (N rows of n) with
/// adaptive halving inside each cell; `rng` supplies Brownian bridge midpoints.
[[nodiscard]] DiscretePath integrate_particles(const ParticlesSpec& spec, const TimeGrid& grid,
                                               std::span<const double> increments,
                                               const RandomSource& rng);

/// sup-norm distance between W^u o W^v and W^{v + u o W^v} on one base pair.
[[nodiscard]] double compose_check(const MeasureSpec& spec, const DriftSpec& u,
                                   const DriftSpec& v, const BasePair& base,
                                   const RandomSource& rng);

/// sup_k |beta_functional(W^u) - (beta + u)| over the recoverable nodes.
[[nodiscard]] double beta_shift_residual(const MeasureSpec& spec, const BasePair& base,
                                         const DriftSpec& u, const RandomSource& rng);

}  // namespace pathvar
