#include "pathvar/variational.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/stochastic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>

namespace pathvar {

namespace {

constexpr std::size_t kHermiteNodes = 64;

const GaussHermite& hermite64() {
    static const GaussHermite rule = gauss_hermite(kHermiteNodes);
    return rule;
}

bool supports_pathwise_gradient(const MeasureSpec& spec) {
    return std::holds_alternative<WienerSpec>(spec) || std::holds_alternative<BridgeSpec>(spec);
}

struct PoolSample {
    std::optional<BasePair> base;
    RandomSource rng{0};
};

class Objective {
public:
    Objective(const Functional& f, const MeasureSpec& spec, const DriftFamily& family,
              const TimeGrid& grid, const OptimizerConfig& config)
        : f_(f), spec_(spec), family_(family), grid_(grid), config_(config) {
        if (family.linear_basis && f.has_gradient() && supports_pathwise_gradient(spec))
            basis_ = family.linear_basis(grid);
    }

    [[nodiscard]] DriftSpec drift(std::span<const double> theta) const {
        return clip_drift(family_.make(theta), config_.clip_bound);
    }

    [[nodiscard]] double sample_J(const DriftSpec& u, const PoolSample& s) const {
        const auto cp = perturb(spec_, *s.base, u, s.rng);
        return f_(cp.path) + 0.5 * cm_norm_sq(cp.drift);
    }

    [[nodiscard]] double mean_J(std::span<const double> theta, const std::vector<PoolSample>& pool,
                                std::span<const std::size_t> indices) const {
        const DriftSpec u = drift(theta);
        const auto values = sample_map<double>(
            indices.size(), [&](std::size_t i) { return sample_J(u, pool[indices[i]]); });
        return estimate_mean(values, "optimize_drift").mean;
    }

    [[nodiscard]] std::vector<double> gradient(std::span<const double> theta,
                                               const std::vector<PoolSample>& pool,
                                               std::span<const std::size_t> indices) const {
        if (pathwise_applicable(theta)) return pathwise_gradient(theta, pool, indices);
        std::vector<double> grad(theta.size());
        std::vector<double> probe(theta.begin(), theta.end());
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double h = config_.fd_step * std::max(1.0, std::abs(theta[j]));
            probe[j] = theta[j] + h;
            const double up = mean_J(probe, pool, indices);
            probe[j] = theta[j] - h;
            const double down = mean_J(probe, pool, indices);
            probe[j] = theta[j];
            grad[j] = (up - down) / (2.0 * h);
        }
        return grad;
    }

private:
    [[nodiscard]] CameronMartinDrift combine(std::span<const double> theta) const {
        CameronMartinDrift u(grid_, basis_.front().dim());
        for (std::size_t j = 0; j < theta.size(); ++j) u = u + theta[j] * basis_[j];
        return u;
    }

    [[nodiscard]] bool pathwise_applicable(std::span<const double> theta) const {
        return !basis_.empty() && combine(theta).sup_norm() < config_.clip_bound;
    }

    // W^u is affine in u for these families, so dW^u/dtheta_j = W^{e_j} - W.
    [[nodiscard]] std::vector<double> pathwise_gradient(std::span<const double> theta,
                                                        const std::vector<PoolSample>& pool,
                                                        std::span<const std::size_t> indices) const {
        const std::size_t p = theta.size();
        const auto u = combine(theta);
        const DriftSpec spec_u = DriftSpec::open_loop(u);
        const double dt = grid_.dt();
        const auto per_sample = sample_map<std::vector<double>>(indices.size(), [&](std::size_t i) {
            const PoolSample& s = pool[indices[i]];
            const auto cp = perturb(spec_, *s.base, spec_u, s.rng);
            std::vector<double> df(cp.path.values().size());
            f_.gradient(cp.path, df);
            std::vector<double> g(p, 0.0);
            for (std::size_t j = 0; j < p; ++j) {
                const auto ej = perturb(spec_, *s.base, DriftSpec::open_loop(basis_[j]), s.rng);
                const auto base_values = s.base->path.values();
                const auto shifted = ej.path.values();
                double acc = 0.0;
                for (std::size_t q = 0; q < df.size(); ++q)
                    acc += df[q] * (shifted[q] - base_values[q]);
                const auto ud = u.density();
                const auto ed = basis_[j].density();
                for (std::size_t q = 0; q < ud.size(); ++q) acc += ud[q] * ed[q] * dt;
                g[j] = acc;
            }
            return g;
        });
        std::vector<double> grad(p, 0.0);
        for (const auto& g : per_sample)
            for (std::size_t j = 0; j < p; ++j) grad[j] += g[j];
        for (double& g : grad) g /= static_cast<double>(indices.size());
        return grad;
    }

    const Functional& f_;
    const MeasureSpec& spec_;
    const DriftFamily& family_;
    TimeGrid grid_;
    const OptimizerConfig& config_;
    std::vector<CameronMartinDrift> basis_;
};

}  // namespace

// ============================================================================
// Estimators
// ============================================================================

EstimateWithError log_laplace_from_values(std::span<const double> f) {
    const std::size_t m = f.size();
    if (m < 2) throw InvalidArgument("direct_log_laplace: at least 2 samples required");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < m; ++i)
        if (!std::isfinite(f[i])) bad.push_back(i);
    if (!bad.empty()) throw EstimationFailure(std::move(bad), "direct_log_laplace");

    const double shift = *std::min_element(f.begin(), f.end());
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = std::exp(-(f[i] - shift));
    const double total = std::accumulate(y.begin(), y.end(), 0.0);
    const double md = static_cast<double>(m);
    const double mean = total / md;
    if (!(mean > 0.0)) throw NumericalError("direct_log_laplace: e^{-f} underflows on every sample");
    const double plain = shift - std::log(mean);

    double loo_sum = 0.0;
    bool jackknife = true;
    for (std::size_t i = 0; i < m && jackknife; ++i) {
        const double rest = (total - y[i]) / (md - 1.0);
        if (!(rest > 0.0)) jackknife = false;
        else loo_sum += shift - std::log(rest);
    }
    const double corrected = jackknife ? md * plain - (md - 1.0) * (loo_sum / md) : plain;

    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (md - 1.0));
    return {corrected, sd / (std::sqrt(md) * mean), m};
}

EstimateWithError direct_log_laplace(const Functional& f, const MeasureSpec& spec,
                                     const TimeGrid& grid, std::size_t samples,
                                     const RandomSource& rng) {
    if (samples < 100) throw InvalidArgument("direct_log_laplace: at least 100 samples required");
    const auto values = sample_map<double>(samples, [&](std::size_t i) {
        return f(sample_base(spec, grid, rng.derive(i).derive(0)).path);
    });
    return log_laplace_from_values(values);
}

EstimateWithError evaluate_J(const Functional& f, const MeasureSpec& spec, const DriftSpec& u,
                             const TimeGrid& grid, std::size_t samples, const RandomSource& rng) {
    if (samples < 2) throw InvalidArgument("evaluate_J: at least 2 samples required");
    const auto values = sample_map<double>(samples, [&](std::size_t i) {
        const RandomSource r = rng.derive(i);
        const auto base = sample_base(spec, grid, r.derive(0));
        const auto cp = perturb(spec, base, u, r.derive(1));
        return f(cp.path) + 0.5 * cm_norm_sq(cp.drift);
    });
    return estimate_mean(values, "evaluate_J");
}

DualityReport duality_gap(const Functional& f, const MeasureSpec& spec, const DriftSpec& u,
                          const TimeGrid& grid, std::size_t samples, const RandomSource& rng) {
    DualityReport r;
    r.lhs = direct_log_laplace(f, spec, grid, samples, rng.derive(1));
    r.rhs = evaluate_J(f, spec, u, grid, samples, rng.derive(2));
    r.gap = r.rhs.mean - r.lhs.mean;
    r.gap_std_error = std::hypot(r.lhs.std_error, r.rhs.std_error);
    return r;
}

// ============================================================================
// Families and optimizer
// ============================================================================

DriftFamily constant_family(std::size_t dim) {
    DriftFamily fam;
    fam.name = "constant";
    fam.initial.assign(dim, 0.0);
    fam.make = [](std::span<const double> theta) {
        return DriftSpec(DriftSpec::Constant{std::vector<double>(theta.begin(), theta.end())});
    };
    fam.linear_basis = [dim](const TimeGrid& grid) {
        std::vector<CameronMartinDrift> basis;
        for (std::size_t j = 0; j < dim; ++j) {
            CameronMartinDrift e(grid, dim);
            for (std::size_t k = 0; k < grid.steps(); ++k) e(k, j) = 1.0;
            basis.push_back(std::move(e));
        }
        return basis;
    };
    return fam;
}

DriftFamily affine_feedback_family(std::size_t dim) {
    DriftFamily fam;
    fam.name = "affine-feedback";
    fam.initial = {0.0, 0.0};
    fam.make = [dim](std::span<const double> theta) {
        return affine_feedback(dim, theta[0], theta[1]);
    };
    return fam;
}

OptimizationResult optimize_drift(const Functional& f, const MeasureSpec& spec,
                                  const DriftFamily& family, const TimeGrid& grid,
                                  const OptimizerConfig& config, const RandomSource& rng) {
    if (family.initial.empty() || !family.make)
        throw InvalidArgument("optimize_drift: family needs a parameter vector and a constructor");
    if (config.epochs == 0 || config.pool_size < 2 || config.batch_size == 0 ||
        !(config.learning_rate > 0.0) || !(config.fd_step > 0.0) || !(config.clip_bound > 0.0))
        throw InvalidArgument("optimize_drift: invalid optimizer configuration");

    const Objective objective(f, spec, family, grid, config);
    std::vector<double> theta = family.initial;
    std::vector<double> best = theta;
    double best_J = 0.0;
    double initial_J = 0.0;
    std::vector<std::pair<std::size_t, double>> trace;

    std::vector<PoolSample> pool(config.pool_size);
    std::vector<std::size_t> order(config.pool_size);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const RandomSource pool_rng = rng.derive(1).derive(epoch);
        parallel_for(config.pool_size, [&](std::size_t i) {
            const RandomSource r = pool_rng.derive(i);
            pool[i].base = sample_base(spec, grid, r.derive(0));
            pool[i].rng = r.derive(1);
        });
        std::iota(order.begin(), order.end(), std::size_t{0});

        if (epoch == 1) {
            initial_J = objective.mean_J(theta, pool, order);
            best_J = initial_J;
            trace.emplace_back(0, initial_J);
        }

        auto engine = rng.derive(3).derive(epoch).engine();
        std::shuffle(order.begin(), order.end(), engine);

        const double step = config.learning_rate / std::sqrt(static_cast<double>(epoch));
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, order.size() - start);
            const auto grad =
                objective.gradient(theta, pool, std::span(order).subspan(start, len));
            for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= step * grad[j];
        }

        const double J = objective.mean_J(theta, pool, order);
        trace.emplace_back(epoch, J);
        if (!std::isfinite(J) || J > initial_J + 9.0 * std::max(std::abs(initial_J), 1.0))
            throw NumericalError("optimize_drift: diverged at epoch " + std::to_string(epoch));
        if (J < best_J) {
            best_J = J;
            best = theta;
        }
    }

    OptimizationResult result;
    result.theta = best;
    result.report = duality_gap(f, spec, objective.drift(best), grid, config.final_samples,
                                rng.derive(2));
    result.report.optimizer_trace = std::move(trace);
    return result;
}

// ============================================================================
// Foellmer drift
// ============================================================================

GaussHermite gauss_hermite(std::size_t n) {
    if (n == 0) throw InvalidArgument("gauss_hermite: need at least one node");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const double off = std::sqrt(static_cast<double>(k) / 2.0);
        const auto kk = static_cast<Eigen::Index>(k);
        jacobi(kk, kk - 1) = off;
        jacobi(kk - 1, kk) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success) throw NumericalError("gauss_hermite: eigensolver failed");
    GaussHermite rule;
    const double mass = std::sqrt(std::numbers::pi);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        rule.nodes.push_back(solver.eigenvalues()(i));
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights.push_back(mass * v0 * v0);
    }
    return rule;
}

double foellmer_gradient(const std::function<double(double)>& g, double s, double x) {
    if (!(s > 0.0)) throw InvalidArgument("foellmer_gradient: smoothing time must be positive");
    const GaussHermite& rule = hermite64();
    const double spread = std::sqrt(2.0 * s);
    std::array<double, kHermiteNodes> e{};
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kHermiteNodes; ++i) {
        e[i] = std::log(rule.weights[i]) - g(x + spread * rule.nodes[i]);
        if (std::isnan(e[i])) throw NumericalError("foellmer_gradient: g is not finite");
        emax = std::max(emax, e[i]);
    }
    if (!std::isfinite(emax))
        throw NumericalError("foellmer_gradient: quadrature underflow at x = " + std::to_string(x));
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < kHermiteNodes; ++i) {
        const double w = std::exp(e[i] - emax);
        num += w * std::numbers::sqrt2 * rule.nodes[i];
        den += w;
    }
    return num / (den * std::sqrt(s));
}

DriftSpec foellmer_drift(std::function<double(double)> g) {
    DriftSpec::ClosedLoop c{1, {}, {1.0}, FeedbackPoint::controlled};
    c.basis.emplace_back([g = std::move(g)](const FeedbackInput& in, std::span<double> out) {
        out[0] = foellmer_gradient(g, 1.0 - in.time, in.state[0]);
    });
    return DriftSpec(std::move(c));
}

DriftSpec foellmer_quadratic(double lambda) {
    DriftSpec::ClosedLoop c{1, {}, {1.0}, FeedbackPoint::controlled};
    c.basis.emplace_back([lambda](const FeedbackInput& in, std::span<double> out) {
        out[0] = -2.0 * lambda * in.state[0] / (1.0 + 2.0 * lambda * (1.0 - in.time));
    });
    return DriftSpec(std::move(c));
}

// ============================================================================
// Density transforms
// ============================================================================

std::vector<double> truncate_density(std::span<const double> values, double bound) {
    if (values.empty()) throw InvalidArgument("truncate_density: no values");
    if (!(bound > 0.0)) throw InvalidArgument("truncate_density: bound must be positive");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw InvalidArgument("truncate_density: values must be positive and finite");
        out[i] = std::min(values[i], bound);
    }
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) /
                        static_cast<double>(out.size());
    for (double& v : out) v /= mean;
    return out;
}

std::vector<double> blend_density(std::span<const double> values, double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("blend_density: a must lie in [0, 1]");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] + a) / (1.0 + a);
    return out;
}

}  // namespace pathvar
