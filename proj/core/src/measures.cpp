#include "pathvar/measures.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pathvar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Bridge scheme coefficients on cell k: V_{k+1} = r V_k + sqrt(r) (dbeta + udot dt)
// with r = (1 - t_{k+1}) / (1 - t_k). This reproduces the exact bridge transition
// law at the nodes and pins V_N = 0.
double bridge_ratio(const TimeGrid& grid, std::size_t k) {
    const double n = static_cast<double>(grid.steps());
    const double kk = static_cast<double>(k);
    return (n - kk - 1.0) / (n - kk);
}

DiscretePath bridge_path(const TimeGrid& grid, const std::vector<double>& endpoint,
                         std::span<const double> inc) {
    const std::size_t n = endpoint.size();
    DiscretePath w(grid, n);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double r = bridge_ratio(grid, k);
        const double sr = std::sqrt(r);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = endpoint[i];
            const double v = w(k, i) - a * grid.time(k);
            w(k + 1, i) = a * grid.time(k + 1) + r * v + sr * inc[k * n + i];
        }
    }
    return w;
}

double particle_drift(const ParticlesSpec& s, std::span<const double> z, std::size_t i) {
    double d = s.linear_drift * z[i] + s.constant_drift;
    for (std::size_t j = 0; j < z.size(); ++j)
        if (j != i) d += s.repulsion / (z[i] - z[j]);
    return d;
}

// Generic controlled-path driver: `step(k, x_k, dbeta_k, udot_k, x_{k+1})`.
template <class Step>
ControlledPath drive(const BasePair& base, const DriftSpec& u, std::size_t noise, bool reuse_base,
                     Step&& step) {
    const TimeGrid& grid = base.path.grid();
    if (u.dim() != noise)
        throw InvalidArgument("perturb: drift dimension " + std::to_string(u.dim()) +
                              " does not match noise dimension " + std::to_string(noise));
    if (!(base.beta.grid() == grid) || base.beta.dim() != noise)
        throw InvalidArgument("perturb: base pair has inconsistent beta");

    DriftRealizer realizer(u, grid);
    DiscretePath x(grid, base.path.dim());
    CameronMartinDrift realized(grid, noise);
    std::vector<double> dbeta(noise);
    const auto x0 = base.path.node(0);
    std::copy(x0.begin(), x0.end(), x.node(0).begin());

    for (std::size_t k = 0; k < grid.steps(); ++k) {
        auto udot = realized.cell(k);
        realizer.next(k, base.path.node(k), x.node(k), udot);
        if (!all_finite(udot))
            throw NumericalError("perturb: drift density is not finite on cell " +
                                 std::to_string(k));
        for (std::size_t i = 0; i < noise; ++i) dbeta[i] = base.beta(k + 1, i) - base.beta(k, i);
        step(k, std::span<const double>(x.node(k)), std::span<const double>(dbeta),
             std::span<const double>(udot), x.node(k + 1));
    }
    if (reuse_base && realized.is_zero())
        return ControlledPath{base.path, std::move(realized), std::nullopt};
    return ControlledPath{std::move(x), std::move(realized), std::nullopt};
}

CameronMartinDrift difference_density(const DiscretePath& from, const DiscretePath& to) {
    const TimeGrid& grid = from.grid();
    const std::size_t n = from.dim();
    CameronMartinDrift d(grid, n);
    const double inv_dt = static_cast<double>(grid.steps());
    for (std::size_t k = 0; k < grid.steps(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            d(k, i) = ((to(k + 1, i) - to(k, i)) - (from(k + 1, i) - from(k, i))) * inv_dt;
    return d;
}

// ----------------------------------------------------------------------------
// Loop score grad_x log h, evaluated without allocation
// ----------------------------------------------------------------------------

class LoopScore {
public:
    explicit LoopScore(const std::vector<LoopAtom>& atoms)
        : atoms_(atoms), log_weight_(atoms.size()), exponent_(atoms.size()) {
        for (std::size_t i = 0; i < atoms.size(); ++i) log_weight_[i] = std::log(atoms[i].weight);
    }

    // Fills grad_log and returns log sum_i alpha_i exp(-|x - a_i|^2 / (2 (1 - t))).
    double evaluate(double t, std::span<const double> x, std::span<double> grad_log) {
        const double tau = 1.0 - t;
        double emax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            double sq = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double d = x[j] - atoms_[i].endpoint[j];
                sq += d * d;
            }
            exponent_[i] = log_weight_[i] - sq / (2.0 * tau);
            emax = std::max(emax, exponent_[i]);
        }
        if (!std::isfinite(emax))
            throw NumericalError("loop_kernel: kernel underflow at t = " + std::to_string(t));
        double total = 0.0;
        std::fill(grad_log.begin(), grad_log.end(), 0.0);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const double w = std::exp(exponent_[i] - emax);
            total += w;
            for (std::size_t j = 0; j < x.size(); ++j)
                grad_log[j] += w * (atoms_[i].endpoint[j] - x[j]);
        }
        for (double& g : grad_log) g /= total * tau;
        return emax + std::log(total);
    }

private:
    const std::vector<LoopAtom>& atoms_;
    std::vector<double> log_weight_;
    std::vector<double> exponent_;
};

// ----------------------------------------------------------------------------
// Particles: Euler-Maruyama with Brownian-bridge halving inside a cell
// ----------------------------------------------------------------------------

class ParticleStepper {
public:
    // The engine is created on the first halving only.
    ParticleStepper(const ParticlesSpec& spec, const RandomSource& rng)
        : spec_(spec), rng_(rng), proposal_(spec.start.size()) {}

    // Advances z over one cell of length tau with Brownian increment db and
    // constant extra drift udot (already in Brownian units).
    void advance(std::vector<double>& z, std::span<const double> db,
                 std::span<const double> udot, double tau, std::size_t cell) {
        advance(z, db, udot, tau, 0, cell);
    }

private:
    void advance(std::vector<double>& z, std::span<const double> db,
                 std::span<const double> udot, double tau, int depth, std::size_t cell) {
        const std::size_t n = z.size();
        const double cap = spec_.scheme.drift_cap / tau;
        for (std::size_t i = 0; i < n; ++i) {
            const double drift = std::clamp(particle_drift(spec_, z, i), -cap, cap);
            proposal_[i] = z[i] + spec_.sigma * (db[i] + udot[i] * tau) + drift * tau;
        }
        if (acceptable(proposal_)) {
            std::copy(proposal_.begin(), proposal_.end(), z.begin());
            return;
        }
        if (depth >= spec_.scheme.max_halvings)
            throw IntegrationFailure(cell, "integrate_particles: ordering could not be preserved "
                                           "within the sub-step budget");
        if (!engine_) engine_.emplace(rng_.engine());
        std::normal_distribution<double> normal(0.0, std::sqrt(0.25 * tau));
        std::vector<double> first(n), second(n);
        for (std::size_t i = 0; i < n; ++i) {
            first[i] = 0.5 * db[i] + normal(*engine_);
            second[i] = db[i] - first[i];
        }
        advance(z, first, udot, 0.5 * tau, depth + 1, cell);
        advance(z, second, udot, 0.5 * tau, depth + 1, cell);
    }

    [[nodiscard]] bool acceptable(std::span<const double> p) const {
        if (!all_finite(p)) return false;
        for (std::size_t i = 1; i < p.size(); ++i)
            if (!(p[i] - p[i - 1] >= spec_.scheme.gap_floor)) return false;
        return true;
    }

    const ParticlesSpec& spec_;
    RandomSource rng_;
    std::optional<RandomSource::Engine> engine_;
    std::vector<double> proposal_;
};

// ----------------------------------------------------------------------------
// Per-family perturbation
// ----------------------------------------------------------------------------

ControlledPath perturb_wiener(const BasePair& base, const DriftSpec& u, std::size_t n,
                              bool reuse_base = true) {
    const double dt = base.path.grid().dt();
    std::vector<double> shift(n, 0.0);
    auto cp = drive(base, u, n, reuse_base,
                    [&](std::size_t k, auto, auto, auto udot, std::span<double> next) {
                        for (std::size_t i = 0; i < n; ++i) {
                            shift[i] += udot[i] * dt;
                            next[i] = base.path(k + 1, i) + shift[i];
                        }
                    });
    cp.shift = cp.drift;
    return cp;
}

ControlledPath perturb_bridge(const BridgeSpec& s, const BasePair& base, const DriftSpec& u,
                              bool reuse_base = true) {
    const TimeGrid& grid = base.path.grid();
    const std::size_t n = s.endpoint.size();
    const double dt = grid.dt();
    auto cp = drive(base, u, n, reuse_base,
                    [&](std::size_t k, auto x, auto dbeta, auto udot, std::span<double> next) {
                        const double r = bridge_ratio(grid, k);
                        const double sr = std::sqrt(r);
                        const double t0 = grid.time(k);
                        const double t1 = grid.time(k + 1);
                        for (std::size_t i = 0; i < n; ++i) {
                            const double a = s.endpoint[i];
                            const double v = x[i] - a * t0;
                            next[i] = a * t1 + r * v + sr * (dbeta[i] + udot[i] * dt);
                        }
                    });
    cp.shift = difference_density(base.path, cp.path);
    return cp;
}

ControlledPath perturb_loop(const LoopSpec& s, const BasePair& base, const DriftSpec& u,
                              bool reuse_base = true) {
    const TimeGrid& grid = base.path.grid();
    const std::size_t n = s.atoms.front().endpoint.size();
    const double dt = grid.dt();
    LoopScore score(s.atoms);
    std::vector<double> grad_log(n);
    auto cp = drive(base, u, n, reuse_base,
                    [&](std::size_t k, auto x, auto dbeta, auto udot, std::span<double> next) {
                        (void)score.evaluate(grid.time(k), x, grad_log);
                        for (std::size_t i = 0; i < n; ++i)
                            next[i] = x[i] + dbeta[i] + udot[i] * dt + grad_log[i] * dt;
                    });
    cp.shift = difference_density(base.path, cp.path);
    return cp;
}

ControlledPath perturb_particles(const ParticlesSpec& s, const BasePair& base, const DriftSpec& u,
                                 const RandomSource& rng, bool reuse_base = true) {
    const TimeGrid& grid = base.path.grid();
    const std::size_t n = s.start.size();
    ParticleStepper stepper(s, rng);
    std::vector<double> z(n);
    auto cp = drive(base, u, n, reuse_base,
                    [&](std::size_t k, auto x, auto dbeta, auto udot, std::span<double> next) {
                        std::copy(x.begin(), x.end(), z.begin());
                        stepper.advance(z, dbeta, udot, grid.dt(), k);
                        std::copy(z.begin(), z.end(), next.begin());
                    });
    cp.shift = difference_density(base.path, cp.path);
    return cp;
}

ControlledPath perturb_diffusion(const DiffusionSpec& s, const BasePair& base, const DriftSpec& u,
                              bool reuse_base = true) {
    const double dt = base.path.grid().dt();
    double shift = 0.0;
    auto cp = drive(base, u, 1, reuse_base,
                    [&](std::size_t k, auto x, auto dbeta, auto udot, std::span<double> next) {
                        const double xv = x[0];
                        next[0] = xv + s.volatility(xv) * (dbeta[0] + udot[0] * dt) +
                                  s.drift(xv) * dt;
                        shift += udot[0] * dt;
                        next[1] = base.beta(k + 1, 0) + shift;
                    });
    if (s.volatility.constant) cp.shift = difference_density(base.path, cp.path);
    return cp;
}

}  // namespace

// ============================================================================
// Spec helpers
// ============================================================================

Coefficient Coefficient::constant_value(double c) {
    return Coefficient{[c](double) { return c; }, c};
}

void validate(const MeasureSpec& spec) {
    std::visit(
        overloaded{
            [](const WienerSpec& s) {
                if (s.dim == 0) throw InvalidArgument("wiener: dim must be positive");
            },
            [](const BridgeSpec& s) {
                if (s.endpoint.empty()) throw InvalidArgument("bridge: endpoint must be non-empty");
                if (!all_finite(s.endpoint)) throw InvalidArgument("bridge: endpoint must be finite");
            },
            [](const LoopSpec& s) {
                if (s.atoms.empty()) throw InvalidArgument("loop: at least one atom required");
                const std::size_t n = s.atoms.front().endpoint.size();
                if (n == 0) throw InvalidArgument("loop: atom endpoints must be non-empty");
                double total = 0.0;
                for (std::size_t i = 0; i < s.atoms.size(); ++i) {
                    const auto& a = s.atoms[i];
                    if (a.endpoint.size() != n)
                        throw InvalidArgument("loop: atoms[" + std::to_string(i) +
                                              "] has a different dimension");
                    if (!all_finite(a.endpoint))
                        throw InvalidArgument("loop: atoms[" + std::to_string(i) +
                                              "] endpoint must be finite");
                    if (!(a.weight > 0.0))
                        throw InvalidArgument("loop: atoms[" + std::to_string(i) +
                                              "] weight must be positive");
                    total += a.weight;
                }
                if (std::abs(total - 1.0) > 1e-12)
                    throw InvalidArgument("loop: atom weights must sum to 1");
            },
            [](const ParticlesSpec& s) {
                if (s.start.empty()) throw InvalidArgument("particles: start must be non-empty");
                if (!(s.sigma > 0.0)) throw InvalidArgument("particles: sigma must be positive");
                if (!(s.sigma * s.sigma <= 2.0 * s.repulsion)) {
                    std::ostringstream msg;
                    msg << "particles: constraint sigma^2 <= 2*gamma violated (sigma^2 = "
                        << s.sigma * s.sigma << ", 2*gamma = " << 2.0 * s.repulsion << ")";
                    throw InvalidArgument(msg.str());
                }
                for (std::size_t i = 1; i < s.start.size(); ++i)
                    if (!(s.start[i] > s.start[i - 1]))
                        throw InvalidArgument("particles: start must be strictly increasing");
                if (!all_finite(s.start)) throw InvalidArgument("particles: start must be finite");
                if (!(s.scheme.gap_floor >= 0.0) || s.scheme.max_halvings < 0 ||
                    !(s.scheme.drift_cap > 0.0))
                    throw InvalidArgument("particles: invalid scheme parameters");
            },
            [](const DiffusionSpec& s) {
                if (!s.volatility.fn || !s.drift.fn)
                    throw InvalidArgument("diffusion: coefficient functions are required");
                if (!std::isfinite(s.start)) throw InvalidArgument("diffusion: start must be finite");
            },
        },
        spec);
}

std::string family_name(const MeasureSpec& spec) {
    return std::visit(overloaded{[](const WienerSpec&) { return std::string("wiener"); },
                                 [](const BridgeSpec&) { return std::string("bridge"); },
                                 [](const LoopSpec&) { return std::string("loop"); },
                                 [](const ParticlesSpec&) { return std::string("particles"); },
                                 [](const DiffusionSpec&) { return std::string("diffusion"); }},
                      spec);
}

std::size_t path_dim(const MeasureSpec& spec) {
    return std::visit(
        overloaded{[](const WienerSpec& s) { return s.dim; },
                   [](const BridgeSpec& s) { return s.endpoint.size(); },
                   [](const LoopSpec& s) { return s.atoms.front().endpoint.size(); },
                   [](const ParticlesSpec& s) { return s.start.size(); },
                   [](const DiffusionSpec&) { return std::size_t{2}; }},
        spec);
}

std::size_t noise_dim(const MeasureSpec& spec) {
    return std::holds_alternative<DiffusionSpec>(spec) ? 1 : path_dim(spec);
}

// ============================================================================
// Loop kernel
// ============================================================================

LoopKernelValue loop_kernel(double t, std::span<const double> x,
                            const std::vector<LoopAtom>& atoms) {
    if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("loop_kernel: t must lie in [0, 1)");
    if (atoms.empty()) throw InvalidArgument("loop_kernel: no atoms");
    const std::size_t n = x.size();
    for (const auto& a : atoms)
        if (a.endpoint.size() != n) throw InvalidArgument("loop_kernel: dimension mismatch");

    LoopScore score(atoms);
    std::vector<double> grad_log(n);
    const double log_sum = score.evaluate(t, x, grad_log);
    const double log_h =
        log_sum - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi * (1.0 - t));
    if (!std::isfinite(log_h)) throw NumericalError("loop_kernel: non-finite kernel value");
    const double h = std::exp(log_h);
    std::vector<double> hgrad(n);
    for (std::size_t j = 0; j < n; ++j) hgrad[j] = h * grad_log[j];
    return {log_h, h, std::move(hgrad), std::move(grad_log)};
}

// ============================================================================
// Sampling
// ============================================================================

DiscretePath integrate_particles(const ParticlesSpec& spec, const TimeGrid& grid,
                                 std::span<const double> increments, const RandomSource& rng) {
    validate(MeasureSpec{spec});
    const std::size_t n = spec.start.size();
    if (increments.size() != grid.steps() * n)
        throw InvalidArgument("integrate_particles: increment count mismatch");
    ParticleStepper stepper(spec, rng);
    DiscretePath path(grid, n, [&] {
        std::vector<double> v(grid.nodes() * n, 0.0);
        std::copy(spec.start.begin(), spec.start.end(), v.begin());
        return v;
    }());
    std::vector<double> z(spec.start);
    const std::vector<double> zero(n, 0.0);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        stepper.advance(z, increments.subspan(k * n, n), zero, grid.dt(), k);
        std::copy(z.begin(), z.end(), path.node(k + 1).begin());
    }
    return path;
}

BasePair sample_base(const MeasureSpec& spec, const TimeGrid& grid, const RandomSource& rng) {
    validate(spec);
    auto engine = rng.engine();
    return std::visit(
        overloaded{
            [&](const WienerSpec& s) {
                const auto inc = brownian_increments(grid, s.dim, engine);
                auto w = path_from_increments(grid, s.dim, inc);
                return BasePair{w, w};
            },
            [&](const BridgeSpec& s) {
                const std::size_t n = s.endpoint.size();
                const auto inc = brownian_increments(grid, n, engine);
                return BasePair{bridge_path(grid, s.endpoint, inc), path_from_increments(grid, n, inc)};
            },
            [&](const LoopSpec& s) {
                std::vector<double> weights;
                for (const auto& a : s.atoms) weights.push_back(a.weight);
                std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
                const auto& atom = s.atoms[pick(engine)];
                const std::size_t n = atom.endpoint.size();
                const auto inc = brownian_increments(grid, n, engine);
                auto w = bridge_path(grid, atom.endpoint, inc);
                auto beta = beta_functional(spec, w);
                return BasePair{std::move(w), std::move(beta)};
            },
            [&](const ParticlesSpec& s) {
                const std::size_t n = s.start.size();
                const auto inc = brownian_increments(grid, n, engine);
                auto w = integrate_particles(s, grid, inc, rng.derive(1));
                return BasePair{std::move(w), path_from_increments(grid, n, inc)};
            },
            [&](const DiffusionSpec& s) {
                const auto inc = brownian_increments(grid, 1, engine);
                auto beta = path_from_increments(grid, 1, inc);
                DiscretePath w(grid, 2);
                w(0, 0) = s.start;
                for (std::size_t k = 0; k < grid.steps(); ++k) {
                    const double x = w(k, 0);
                    w(k + 1, 0) = x + s.volatility(x) * inc[k] + s.drift(x) * grid.dt();
                    w(k + 1, 1) = beta(k + 1, 0);
                }
                return BasePair{std::move(w), std::move(beta)};
            },
        },
        spec);
}

ControlledPath perturb(const MeasureSpec& spec, const BasePair& base, const DriftSpec& u,
                       const RandomSource& rng) {
    if (base.path.dim() != path_dim(spec))
        throw InvalidArgument("perturb: base path dimension does not match the measure");
    return std::visit(
        overloaded{
            [&](const WienerSpec& s) { return perturb_wiener(base, u, s.dim); },
            [&](const BridgeSpec& s) { return perturb_bridge(s, base, u); },
            [&](const LoopSpec& s) { return perturb_loop(s, base, u); },
            [&](const ParticlesSpec& s) { return perturb_particles(s, base, u, rng); },
            [&](const DiffusionSpec& s) { return perturb_diffusion(s, base, u); },
        },
        spec);
}

// ============================================================================
// beta functionals
// ============================================================================

DiscretePath beta_functional(const MeasureSpec& spec, const DiscretePath& path) {
    if (path.dim() != path_dim(spec))
        throw InvalidArgument("beta_functional: path dimension does not match the measure");
    const TimeGrid& grid = path.grid();
    const double dt = grid.dt();
    const std::size_t steps = grid.steps();
    return std::visit(
        overloaded{
            [&](const WienerSpec&) { return path; },
            [&](const BridgeSpec& s) {
                // Exact inverse of the bridge scheme on cells whose right node is
                // below t = 1; the last cell falls back to left-endpoint quadrature
                // of (W(s) - a s) / (1 - s).
                const std::size_t n = s.endpoint.size();
                DiscretePath beta(grid, n);
                for (std::size_t k = 0; k < steps; ++k) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double a = s.endpoint[i];
                        const double v0 = path(k, i) - a * grid.time(k);
                        const double v1 = path(k + 1, i) - a * grid.time(k + 1);
                        double db;
                        if (k + 1 < steps) {
                            const double r = bridge_ratio(grid, k);
                            db = (v1 - r * v0) / std::sqrt(r);
                        } else {
                            db = (v1 - v0) + v0 / (1.0 - grid.time(k)) * dt;
                        }
                        beta(k + 1, i) = beta(k, i) + db;
                    }
                }
                return beta;
            },
            [&](const LoopSpec& s) {
                const std::size_t n = path.dim();
                DiscretePath beta(grid, n);
                LoopScore score(s.atoms);
                std::vector<double> grad_log(n);
                for (std::size_t k = 0; k < steps; ++k) {
                    (void)score.evaluate(grid.time(k), path.node(k), grad_log);
                    for (std::size_t i = 0; i < n; ++i)
                        beta(k + 1, i) =
                            beta(k, i) + (path(k + 1, i) - path(k, i)) - grad_log[i] * dt;
                }
                return beta;
            },
            [&](const ParticlesSpec& s) {
                const std::size_t n = path.dim();
                DiscretePath beta(grid, n);
                for (std::size_t k = 0; k < steps; ++k) {
                    const auto z = path.node(k);
                    for (std::size_t i = 0; i < n; ++i) {
                        const double m = (path(k + 1, i) - z[i]) - particle_drift(s, z, i) * dt;
                        beta(k + 1, i) = beta(k, i) + m / s.sigma;
                    }
                }
                return beta;
            },
            [&](const DiffusionSpec&) {
                DiscretePath beta(grid, 1);
                for (std::size_t k = 0; k < grid.nodes(); ++k) beta(k, 0) = path(k, 1);
                return beta;
            },
        },
        spec);
}

DiscretePath scheme_path(const MeasureSpec& spec, const DiscretePath& beta,
                         const RandomSource& rng) {
    validate(spec);
    if (beta.dim() != noise_dim(spec))
        throw InvalidArgument("scheme_path: noise dimension does not match the measure");
    const TimeGrid& grid = beta.grid();
    DiscretePath origin(grid, path_dim(spec));
    if (const auto* p = std::get_if<ParticlesSpec>(&spec))
        std::copy(p->start.begin(), p->start.end(), origin.node(0).begin());
    if (const auto* d = std::get_if<DiffusionSpec>(&spec)) origin(0, 0) = d->start;
    const BasePair seed{std::move(origin), beta};
    const DriftSpec zero = DriftSpec::zero(beta.dim());
    return std::visit(
        overloaded{
            [&](const WienerSpec&) { return beta; },
            [&](const BridgeSpec& s) { return perturb_bridge(s, seed, zero, false).path; },
            [&](const LoopSpec& s) { return perturb_loop(s, seed, zero, false).path; },
            [&](const ParticlesSpec& s) {
                return perturb_particles(s, seed, zero, rng, false).path;
            },
            [&](const DiffusionSpec& s) { return perturb_diffusion(s, seed, zero, false).path; },
        },
        spec);
}

std::size_t beta_recovery_last_node(const MeasureSpec& spec, const TimeGrid& grid) {
    return std::holds_alternative<BridgeSpec>(spec) ? grid.steps() - 1 : grid.steps();
}

BasePair as_base(const BasePair& base, const ControlledPath& controlled) {
    DiscretePath beta = base.beta;
    const auto u = controlled.drift.induced_path();
    for (std::size_t i = 0; i < beta.values().size(); ++i) beta.values()[i] += u.values()[i];
    return BasePair{controlled.path, std::move(beta)};
}

double compose_check(const MeasureSpec& spec, const DriftSpec& u, const DriftSpec& v,
                     const BasePair& base, const RandomSource& rng) {
    const auto wv = perturb(spec, base, v, rng);
    const auto lhs = perturb(spec, as_base(base, wv), u, rng);
    // v + u o W^v, with u o W^v the density u realized when started from W^v.
    const auto combined = DriftSpec::open_loop(wv.drift + lhs.drift);
    const auto rhs = perturb(spec, base, combined, rng);
    return lhs.path.sup_distance(rhs.path);
}

double beta_shift_residual(const MeasureSpec& spec, const BasePair& base, const DriftSpec& u,
                           const RandomSource& rng) {
    const auto cp = perturb(spec, base, u, rng);
    const auto recovered = beta_functional(spec, cp.path);
    const auto expected = as_base(base, cp).beta;
    return recovered.sup_distance(expected, beta_recovery_last_node(spec, base.path.grid()));
}

}  // namespace pathvar
