#include "pathvar/entropy.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/stochastic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pathvar {

const char* to_string(Criterion c) noexcept {
    switch (c) {
    case Criterion::yes: return "yes";
    case Criterion::no: return "no";
    case Criterion::unknown: break;
    }
    return "unknown";
}

CameronMartinDrift realize_deterministic(const DriftSpec& u, const TimeGrid& grid) {
    if (!u.is_deterministic())
        throw InvalidArgument("realize_deterministic: drift depends on the path");
    DriftRealizer realizer(u, grid);
    CameronMartinDrift h(grid, u.dim());
    const std::vector<double> state(u.dim(), 0.0);
    for (std::size_t k = 0; k < grid.steps(); ++k) realizer.next(k, state, state, h.cell(k));
    return h;
}

EstimateWithError kinetic_energy(const MeasureSpec& spec, const DriftSpec& u,
                                 const TimeGrid& grid, std::size_t samples,
                                 const RandomSource& rng) {
    if (u.is_deterministic())
        return exact_estimate(0.5 * cm_norm_sq(realize_deterministic(u, grid)));
    if (samples < 2) throw InvalidArgument("kinetic_energy: at least 2 samples required");
    const auto values = sample_map<double>(samples, [&](std::size_t i) {
        const RandomSource r = rng.derive(i);
        const auto base = sample_base(spec, grid, r.derive(0));
        return 0.5 * cm_norm_sq(perturb(spec, base, u, r.derive(1)).drift);
    });
    return estimate_mean(values, "kinetic_energy");
}

double entropy_deterministic_shift(const CameronMartinDrift& h) { return 0.5 * cm_norm_sq(h); }

double entropy_gaussian_linear(std::span<const double> slope, std::span<const double> offset,
                               const TimeGrid& grid) {
    const std::size_t n = grid.steps();
    if (slope.size() != n || offset.size() != n)
        throw InvalidArgument("entropy_gaussian_linear: coefficients must have one value per cell");
    const double dt = grid.dt();

    // Increments dX = A dW + m with A lower triangular; X_k = c_k . dW + mu_k.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    Eigen::VectorXd m(static_cast<Eigen::Index>(n));
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    double mu = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        Eigen::VectorXd row = slope[k] * dt * c;
        row(kk) += 1.0;
        a.row(kk) = row.transpose();
        m(kk) = (slope[k] * mu + offset[k]) * dt;
        c += row;
        mu += m(kk);
    }

    const Eigen::MatrixXd sigma = dt * a * a.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        std::size_t bad = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            if (Eigen::LLT<Eigen::MatrixXd>(sigma.topLeftCorner(kk, kk)).info() != Eigen::Success) {
                bad = k - 1;
                break;
            }
        }
        throw NumericalError("entropy_gaussian_linear: covariance is not positive definite at cell " +
                             std::to_string(bad));
    }
    const Eigen::MatrixXd l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index k = 0; k < l.rows(); ++k) logdet += 2.0 * std::log(l(k, k));

    const double nn = static_cast<double>(n);
    return 0.5 * (sigma.trace() / dt - nn - logdet + nn * std::log(dt) + m.squaredNorm() / dt);
}

DriftSpec affine_inverse(std::span<const double> slope, std::span<const double> offset) {
    std::vector<double> a(slope.size()), b(offset.size());
    std::transform(slope.begin(), slope.end(), a.begin(), [](double x) { return -x; });
    std::transform(offset.begin(), offset.end(), b.begin(), [](double x) { return -x; });
    return affine_feedback_cells(std::move(a), std::move(b), FeedbackPoint::base);
}

double invert_check(const MeasureSpec& spec, const DriftSpec& u, const DriftSpec& v,
                    const BasePair& base, const RandomSource& rng) {
    const auto wu = perturb(spec, base, u, rng);
    const auto back = perturb(spec, as_base(base, wu), v, rng);
    return back.path.sup_distance(base.path);
}

EntropyReport criterion_report(const MeasureSpec& spec, const DriftSpec& u,
                               const EntropyOracle& oracle, const TimeGrid& grid,
                               const CriterionOptions& options, const RandomSource& rng) {
    EntropyReport report;
    report.kinetic = kinetic_energy(spec, u, grid, options.samples, rng.derive(1));

    if (std::holds_alternative<ShiftOracle>(oracle)) {
        report.entropy = entropy_deterministic_shift(realize_deterministic(u, grid));
    } else if (const auto* g = std::get_if<GaussianLinearOracle>(&oracle)) {
        if (!std::holds_alternative<WienerSpec>(spec) || path_dim(spec) != 1)
            throw InvalidArgument("criterion_report: Gaussian-linear oracle needs scalar wiener");
        report.entropy = entropy_gaussian_linear(g->slope, g->offset, grid);
    }

    if (options.inverse) {
        std::vector<double> residuals(options.inverse_paths);
        parallel_for(options.inverse_paths, [&](std::size_t i) {
            const RandomSource r = rng.derive(2).derive(i);
            const auto base = sample_base(spec, grid, r.derive(0));
            residuals[i] = invert_check(spec, u, *options.inverse, base, r.derive(1));
        });
        report.inverse_residual = *std::max_element(residuals.begin(), residuals.end());
    }

    if (!report.entropy) return report;
    report.defect = report.kinetic.mean - *report.entropy;
    const double tolerance = std::max(3.0 * report.kinetic.std_error,
                                      options.relative_tolerance * std::abs(report.kinetic.mean));
    const bool equal = std::abs(*report.defect) <= tolerance;
    const bool inverted =
        !report.inverse_residual || *report.inverse_residual <= options.inverse_tolerance;
    report.criterion_met = equal && inverted ? Criterion::yes : Criterion::no;
    return report;
}

}  // namespace pathvar
