#include "pathvar/prekopa.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pathvar {

namespace {

constexpr double kRelativeSlack = 1e-9;

bool violates(double lhs, double rhs) {
    if (std::isnan(lhs) || std::isnan(rhs)) return true;
    return lhs < rhs - kRelativeSlack * std::max(1.0, std::abs(rhs));
}

void check_drifts(const MeasureSpec& spec, const CameronMartinDrift& h,
                  const CameronMartinDrift& k) {
    if (!(h.grid() == k.grid()) || h.dim() != k.dim() || h.dim() != noise_dim(spec))
        throw InvalidArgument("prekopa: test drifts must share grid and noise dimension");
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

}  // namespace

double pl_hypothesis_probe(const PLInstance& inst, const MeasureSpec& spec,
                           const CameronMartinDrift& h, const CameronMartinDrift& k,
                           std::size_t samples, const RandomSource& rng) {
    check_drifts(spec, h, k);
    if (!(inst.t >= 0.0 && inst.t <= 1.0)) throw InvalidArgument("prekopa: t must lie in [0, 1]");
    if (samples == 0) throw InvalidArgument("pl_hypothesis_probe: no samples");
    const double t = inst.t;
    const CameronMartinDrift mix = t * h + (1.0 - t) * k;
    const DriftSpec uh = DriftSpec::open_loop(h);
    const DriftSpec uk = DriftSpec::open_loop(k);
    const DriftSpec um = DriftSpec::open_loop(mix);
    const double eh = 0.5 * cm_norm_sq(h);
    const double ek = 0.5 * cm_norm_sq(k);
    const double em = 0.5 * cm_norm_sq(mix);
    const TimeGrid& grid = h.grid();

    const auto flags = sample_map<int>(samples, [&](std::size_t i) {
        const RandomSource r = rng.derive(i);
        const auto base = sample_base(spec, grid, r.derive(0));
        const double la = safe_log(inst.a(perturb(spec, base, um, r.derive(1)).path)) - em;
        const double lb = safe_log(inst.b(perturb(spec, base, uh, r.derive(1)).path)) - eh;
        const double lc = safe_log(inst.c(perturb(spec, base, uk, r.derive(1)).path)) - ek;
        double rhs = 0.0;
        if (t > 0.0) rhs += t * lb;
        if (t < 1.0) rhs += (1.0 - t) * lc;
        return violates(la, rhs) ? 1 : 0;
    });
    const auto count = std::count(flags.begin(), flags.end(), 1);
    return static_cast<double>(count) / static_cast<double>(samples);
}

double density_concavity_probe(const Functional& d, const MeasureSpec& spec,
                               const CameronMartinDrift& h, const CameronMartinDrift& k,
                               std::size_t samples, const RandomSource& rng) {
    check_drifts(spec, h, k);
    if (samples == 0) throw InvalidArgument("density_concavity_probe: no samples");
    const DriftSpec uh = DriftSpec::open_loop(h);
    const DriftSpec uk = DriftSpec::open_loop(k);
    const DriftSpec um = DriftSpec::open_loop(0.5 * h + 0.5 * k);
    const TimeGrid& grid = h.grid();
    const auto flags = sample_map<int>(samples, [&](std::size_t i) {
        const RandomSource r = rng.derive(i);
        const auto base = sample_base(spec, grid, r.derive(0));
        const double ph = -safe_log(d(perturb(spec, base, uh, r.derive(1)).path));
        const double pk = -safe_log(d(perturb(spec, base, uk, r.derive(1)).path));
        const double pm = -safe_log(d(perturb(spec, base, um, r.derive(1)).path));
        return violates(pm, 0.5 * (ph + pk)) ? 1 : 0;
    });
    const auto count = std::count(flags.begin(), flags.end(), 1);
    return static_cast<double>(count) / static_cast<double>(samples);
}

PLCheck pl_check(const PLInstance& inst, const MeasureSpec& spec, const TimeGrid& grid,
                 std::size_t samples, const RandomSource& rng) {
    if (!(inst.t >= 0.0 && inst.t <= 1.0)) throw InvalidArgument("prekopa: t must lie in [0, 1]");
    if (samples < 2) throw InvalidArgument("pl_check: at least 2 samples required");

    auto expectation = [&](const Functional& f, std::uint64_t stream) {
        const RandomSource r = rng.derive(stream);
        const auto values = sample_map<double>(samples, [&](std::size_t i) {
            const auto base = sample_base(spec, grid, r.derive(i).derive(0));
            const double w = inst.theta_density ? (*inst.theta_density)(base.path) : 1.0;
            return f(base.path) * w;
        });
        const auto e = estimate_mean(values, "pl_check");
        if (!(e.mean > 0.0)) throw NumericalError("pl_check: expectation of " + f.name +
                                                  " is not positive");
        return e;
    };
    const auto ea = expectation(inst.a, 1);
    const auto eb = expectation(inst.b, 2);
    const auto ec = expectation(inst.c, 3);
    const double t = inst.t;

    PLCheck out{};
    out.margin = std::log(ea.mean) - t * std::log(eb.mean) - (1.0 - t) * std::log(ec.mean);
    const double ra = ea.std_error / ea.mean;
    const double rb = t * eb.std_error / eb.mean;
    const double rc = (1.0 - t) * ec.std_error / ec.mean;
    out.std_error = std::sqrt(ra * ra + rb * rb + rc * rc);
    if (out.std_error > 0.0) out.z = out.margin / out.std_error;
    else out.z = out.margin == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                        out.margin);
    return out;
}

PLCertificate certify(const PLInstance& inst, const MeasureSpec& spec, const TimeGrid& grid,
                      std::size_t probe_samples, std::size_t check_samples,
                      const RandomSource& rng) {
    PLCertificate cert;
    cert.drift_levels = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const std::size_t n = noise_dim(spec);
    const std::size_t levels = cert.drift_levels.size();
    for (std::size_t i = 0; i < levels; ++i) {
        const auto h = CameronMartinDrift::constant(grid, n, cert.drift_levels[i]);
        for (std::size_t j = 0; j < levels; ++j) {
            const auto k = CameronMartinDrift::constant(grid, n, cert.drift_levels[j]);
            const RandomSource r = rng.derive(1).derive(i * levels + j);
            cert.max_violation_rate = std::max(
                cert.max_violation_rate, pl_hypothesis_probe(inst, spec, h, k, probe_samples, r));
            if (inst.theta_density)
                cert.max_concavity_violation =
                    std::max(cert.max_concavity_violation,
                             density_concavity_probe(*inst.theta_density, spec, h, k,
                                                     probe_samples, r.derive(1)));
        }
    }
    cert.hypothesis_clear = cert.max_violation_rate == 0.0 && cert.max_concavity_violation == 0.0;
    cert.check = pl_check(inst, spec, grid, check_samples, rng.derive(2));
    return cert;
}

}  // namespace pathvar
