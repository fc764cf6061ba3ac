// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "support/oracles.hpp"

#include "config.hpp"
#include "experiments.hpp"
#include "pathvar/pathvar.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pathvar;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const LoopSpec symmetric_loop{{{{-1.0}, 0.5}, {{1.0}, 0.5}}};

ParticlesSpec particles(std::vector<double> start, double gamma) {
    ParticlesSpec p;
    p.sigma = 1.0;
    p.repulsion = gamma;
    p.start = std::move(start);
    return p;
}

// ----------------------------------------------------------------------------

void girsanov_identity() {
    const TimeGrid grid(256);
    const std::size_t m = 100000;
    const RandomSource rng(1001);
    const std::vector<std::pair<const char*, MeasureSpec>> families{
        {"wiener", WienerSpec{1}},
        {"bridge", BridgeSpec{{0.0}}},
        {"loop", symmetric_loop},
        {"particles", particles({0.0, 1.0}, 1.0)}};
    const auto stats = standard_statistics();

    double worst = 0.0;
    std::string worst_case;
    double weakest_control = INFINITY;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const auto& [name, spec] = families[fi];
        const std::size_t n = noise_dim(spec);
        const RandomSource r = rng.derive(fi);
        const auto plain = plain_expectations(stats, spec, grid, m, r.derive(0));
        const std::vector<std::pair<const char*, DriftSpec>> drifts{
            {"zero", DriftSpec::zero(n)},
            {"constant 0.5", DriftSpec::constant(n, 0.5)},
            {"clipped affine feedback", clip_drift(affine_feedback(n, -0.5, 0.5), 1.0)}};
        for (std::size_t di = 0; di < drifts.size(); ++di) {
            const auto rw =
                reweighted_expectations(stats, spec, drifts[di].second, grid, m, r.derive(1 + di));
            for (std::size_t j = 0; j < stats.size(); ++j) {
                const double z = z_score(plain[j], rw[j]);
                if (z > worst) {
                    worst = z;
                    worst_case = std::string(name) + ", " + drifts[di].first + ", " + stats[j].name;
                }
            }
        }
        const auto bad = reweighted_expectations(stats, spec, DriftSpec::constant(n, 0.5), grid, m,
                                                 r.derive(9), WeightCorruption::drop_energy);
        double control = 0.0;
        for (std::size_t j = 0; j < stats.size(); ++j)
            control = std::max(control, z_score(plain[j], bad[j]));
        weakest_control = std::min(weakest_control, control);
    }
    report(1, "Girsanov identity", worst < 3.0 && weakest_control > 5.0,
           fmt("max |z| = %.3f over 36 cases (at %s); corrupted-weight z >= %.1f in every family",
               worst, worst_case.c_str(), weakest_control));
}

void duality_linear() {
    const auto f = linear_endpoint(1.0);
    const auto lhs = direct_log_laplace(f, WienerSpec{1}, TimeGrid(256), 100000, RandomSource(2001));
    OptimizerConfig cfg;
    const auto opt =
        optimize_drift(f, WienerSpec{1}, constant_family(1), TimeGrid(64), cfg, RandomSource(2002));
    const double target = oracle::gaussian_log_laplace_linear(1.0);
    const bool ok = std::abs(lhs.mean - target) <= 0.02 &&
                    std::abs(opt.report.rhs.mean - target) <= 0.02 &&
                    std::abs(opt.theta[0] + 1.0) <= 0.05;
    report(2, "duality, linear functional", ok,
           fmt("-log E e^{-W(1)} = %.4f +- %.4f (target -0.5); optimizer J = %.4f, theta = %.4f",
               lhs.mean, lhs.std_error, opt.report.rhs.mean, opt.theta[0]));
}

void duality_quadratic() {
    const auto f = quadratic_endpoint(0.5);
    const TimeGrid grid(256);
    const auto r = duality_gap(f, WienerSpec{1}, foellmer_quadratic(0.5), grid, 100000,
                               RandomSource(3001));
    const double target = oracle::gaussian_log_laplace_quadratic(0.5);
    const bool ok = std::abs(r.lhs.mean - target) <= 0.02 && r.gap < 0.02 &&
                    r.gap >= -3.0 * r.gap_std_error;
    report(3, "duality, quadratic functional", ok,
           fmt("lhs = %.4f (target %.5f), J(Foellmer) = %.4f, gap = %.4f +- %.4f", r.lhs.mean,
               target, r.rhs.mean, r.gap, r.gap_std_error));
}

struct OracleCase {
    std::string name;
    EntropyReport report;
};

std::vector<OracleCase> entropy_cases;

void entropy_criterion() {
    const RandomSource rng(4001);
    bool ok = true;
    std::string detail;

    {
        const TimeGrid grid(256);
        const auto r = criterion_report(WienerSpec{1}, DriftSpec::constant(1, 1.0), ShiftOracle{},
                                        grid, CriterionOptions{}, rng.derive(0));
        ok = ok && r.entropy && *r.entropy == 0.5 && r.kinetic.mean == 0.5 &&
             r.criterion_met == Criterion::yes;
        detail += fmt("shift: H = %.17g, kinetic = %.17g", r.entropy.value_or(NAN), r.kinetic.mean);
        entropy_cases.push_back({"shift hdot = 1", r});
    }

    std::vector<double> residuals;
    for (std::size_t n : {128u, 256u, 512u}) {
        const TimeGrid grid(n);
        const std::vector<double> slope(n, -1.0), offset(n, 0.0);
        CriterionOptions opts;
        opts.samples = 100000;
        opts.relative_tolerance = 0.01;
        opts.inverse = affine_inverse(slope, offset);
        const auto r = criterion_report(WienerSpec{1}, affine_feedback_cells(slope, offset),
                                        GaussianLinearOracle{slope, offset}, grid, opts,
                                        rng.derive(n));
        residuals.push_back(r.inverse_residual.value_or(INFINITY));
        entropy_cases.push_back({fmt("affine a = -1, N = %zu", n), r});
        if (n == 512) {
            const double rel = std::abs(r.kinetic.mean - *r.entropy) / *r.entropy;
            ok = ok && rel <= 0.01 && r.criterion_met == Criterion::yes;
            detail += fmt("; affine N=512: H = %.5f, kinetic = %.5f +- %.5f (rel %.4f)", *r.entropy,
                          r.kinetic.mean, r.kinetic.std_error, rel);
        }
    }
    // The discrete inverse is exact, so residuals sit at round-off; a floor
    // of 1e-12 stands in for the refinement ratio there.
    for (std::size_t i = 1; i < residuals.size(); ++i)
        ok = ok && residuals[i] <= std::max(residuals[i - 1] / 1.8, 1e-12);
    detail += fmt("; invert residual %.2e, %.2e, %.2e at N = 128, 256, 512", residuals[0],
                  residuals[1], residuals[2]);
    report(4, "entropy criterion", ok, detail);
}

void entropy_inequality() {
    const RandomSource rng(5001);
    {
        const TimeGrid grid(256);
        const auto h = CameronMartinDrift::from_function(grid, 1, [](double t) {
            return std::sin(6.0 * t) + 0.5;
        });
        entropy_cases.push_back({"shift sin", criterion_report(WienerSpec{1}, DriftSpec::open_loop(h),
                                                               ShiftOracle{}, grid,
                                                               CriterionOptions{}, rng.derive(1))});
    }
    for (auto [a, b] : {std::pair{0.5, 0.3}, std::pair{-2.0, 1.0}}) {
        const TimeGrid grid(256);
        const std::vector<double> slope(256, a), offset(256, b);
        CriterionOptions opts;
        opts.samples = 100000;
        entropy_cases.push_back(
            {fmt("affine a = %g, b = %g", a, b),
             criterion_report(WienerSpec{1}, affine_feedback_cells(slope, offset),
                              GaussianLinearOracle{slope, offset}, grid, opts, rng.derive(2))});
    }
    bool ok = true;
    double worst = -INFINITY;
    std::string worst_name;
    for (const auto& c : entropy_cases) {
        const double excess = *c.report.entropy - c.report.kinetic.mean -
                              3.0 * c.report.kinetic.std_error;
        ok = ok && excess <= 0.0;
        if (excess > worst) {
            worst = excess;
            worst_name = c.name;
        }
    }
    report(5, "entropy inequality", ok,
           fmt("%zu oracle cases, max of H - kinetic - 3 SE = %.3e (%s)", entropy_cases.size(), worst,
               worst_name.c_str()));
}

double mean_shift_residual(const MeasureSpec& spec, std::size_t n, std::size_t paths,
                           const RandomSource& rng, double* worst = nullptr) {
    const TimeGrid grid(n);
    const auto u = DriftSpec::constant(noise_dim(spec), 0.5);
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < paths; ++i) {
        try {
            const auto base = sample_base(spec, grid, rng.derive(i).derive(0));
            const double r = beta_shift_residual(spec, base, u, rng.derive(i).derive(1));
            total += r;
            ++used;
            if (worst) *worst = std::max(*worst, r);
        } catch (const IntegrationFailure&) {
        }
    }
    return total / static_cast<double>(used);
}

void beta_shift() {
    const RandomSource rng(6001);
    double exact = 0.0;
    for (const MeasureSpec& spec : {MeasureSpec{WienerSpec{1}}, MeasureSpec{BridgeSpec{{0.5}}}})
        (void)mean_shift_residual(spec, 256, 1000, rng.derive(0), &exact);
    bool ok = exact <= 1e-12;
    std::string detail = fmt("wiener/bridge max residual %.2e", exact);
    for (const auto& [name, spec] : std::vector<std::pair<const char*, MeasureSpec>>{
             {"loop", symmetric_loop}, {"particles", particles({0.0, 1.0}, 1.0)}}) {
        std::vector<double> c;
        for (std::size_t n : {128u, 256u, 512u})
            c.push_back(mean_shift_residual(spec, n, 4000, rng.derive(n)) * static_cast<double>(n));
        const double hi = *std::max_element(c.begin(), c.end());
        ok = ok && hi <= 1.0;
        detail += fmt("; %s N*mean residual = %.3g, %.3g, %.3g", name, c[0], c[1], c[2]);
    }
    report(6, "beta o W^u = beta + u", ok, detail);
}

void composition() {
    const RandomSource rng(7001);
    auto worst = [&](const MeasureSpec& spec, std::size_t n, std::size_t paths) {
        const TimeGrid grid(n);
        const auto u = DriftSpec::constant(1, 0.5);
        const auto v = DriftSpec::open_loop(
            CameronMartinDrift::from_function(grid, 1, [](double t) { return std::sin(3.0 * t); }));
        double w = 0.0;
        for (std::size_t i = 0; i < paths; ++i) {
            const auto base = sample_base(spec, grid, rng.derive(n).derive(i));
            w = std::max(w, compose_check(spec, u, v, base, rng.derive(n).derive(i).derive(1)));
        }
        return w;
    };
    const double wiener = worst(WienerSpec{1}, 256, 1000);
    const double bridge = worst(BridgeSpec{{0.5}}, 256, 1000);
    std::vector<double> loop;
    for (std::size_t n : {128u, 256u, 512u}) loop.push_back(worst(symmetric_loop, n, 500));
    bool ok = wiener <= 1e-14 && bridge <= 1e-10;
    for (std::size_t i = 1; i < loop.size(); ++i)
        ok = ok && loop[i] <= std::max(loop[i - 1] / 1.8, 1e-12);
    report(7, "composition law", ok,
           fmt("wiener %.2e, bridge %.2e, loop %.2e / %.2e / %.2e at N = 128/256/512", wiener,
               bridge, loop[0], loop[1], loop[2]));
}

void bridge_law() {
    const TimeGrid grid(256);
    const double a = 0.7;
    const std::size_t m = 100000;
    const std::vector<std::pair<double, double>> pairs{
        {0.25, 0.5}, {0.5, 0.5}, {0.1, 0.9}, {0.75, 0.75}, {0.3, 0.6}};
    std::vector<std::vector<double>> prods(pairs.size(), std::vector<double>(m));
    std::vector<int> pinned(m);
    parallel_for(m, [&](std::size_t i) {
        const auto b = sample_base(BridgeSpec{{a}}, grid, RandomSource(8001).derive(i));
        pinned[i] = b.path(grid.steps(), 0) == a;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const std::size_t ks = grid.nearest_node(pairs[p].first);
            const std::size_t kt = grid.nearest_node(pairs[p].second);
            prods[p][i] = (b.path(ks, 0) - a * grid.time(ks)) * (b.path(kt, 0) - a * grid.time(kt));
        }
    });
    const auto exact = std::count(pinned.begin(), pinned.end(), 1);
    double worst = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto e = estimate_mean(prods[p], "covariance");
        const double s = grid.time(grid.nearest_node(pairs[p].first));
        const double t = grid.time(grid.nearest_node(pairs[p].second));
        worst = std::max(worst, std::abs(e.mean - oracle::bridge_covariance(s, t)) / e.std_error);
    }
    report(8, "bridge law", exact == static_cast<long>(m) && worst < 3.0,
           fmt("W(1) = a on %ld / %zu samples; covariance max |z| = %.3f over 5 node pairs", exact,
               m, worst));
}

void loop_bridge_degeneracy() {
    const double a = 1.0;
    const std::vector<LoopAtom> atoms{{{a}, 1.0}};
    double identity = 0.0;
    for (int ti = 0; ti < 10; ++ti)
        for (int xi = 0; xi < 10; ++xi) {
            const double t = 0.1 * ti;
            const double x = -2.0 + 4.0 * xi / 9.0;
            const auto kv = loop_kernel(t, std::span<const double>(&x, 1), atoms);
            const double ref = (a - x) / (1.0 - t);
            identity = std::max(identity, std::abs(kv.hgrad[0] / kv.h - ref) / std::max(std::abs(ref), 1e-300));
        }

    const TimeGrid grid(256);
    const std::size_t m = 20000;
    const MeasureSpec bridge = BridgeSpec{{a}};
    const MeasureSpec loop = LoopSpec{atoms};
    const std::vector<double> times{0.25, 0.5, 0.75};
    std::vector<std::vector<double>> xb(times.size(), std::vector<double>(m)), xl = xb;
    parallel_for(m, [&](std::size_t i) {
        const auto b = sample_base(bridge, grid, RandomSource(9001).derive(i));
        const RandomSource r = RandomSource(9002).derive(i);
        const auto noise = path_from_increments(grid, 1, brownian_increments(grid, 1, r));
        const auto l = scheme_path(loop, noise, r.derive(1));
        for (std::size_t j = 0; j < times.size(); ++j) {
            xb[j][i] = b.path(grid.nearest_node(times[j]), 0);
            xl[j][i] = l(grid.nearest_node(times[j]), 0);
        }
    });
    double min_p = 1.0;
    for (std::size_t j = 0; j < times.size(); ++j)
        min_p = std::min(min_p, ks_two_sample(xb[j], xl[j]).p_value);
    report(9, "loop/bridge degeneracy", identity <= 1e-10 && min_p > 0.01,
           fmt("max relative error of hgrad/h vs (a-x)/(1-t) = %.2e; KS min p = %.3f at t = 0.25/0.5/0.75",
               identity, min_p));
}

void particle_law() {
    const TimeGrid grid(256);
    const std::size_t m = 10000;
    const auto three = particles({-1.0, 0.0, 1.0}, 1.0);
    std::vector<int> status(m);
    parallel_for(m, [&](std::size_t i) {
        try {
            const auto b = sample_base(three, grid, RandomSource(10001).derive(i));
            int ordered = 1;
            for (std::size_t k = 0; k < grid.nodes(); ++k)
                if (!(b.path(k, 0) < b.path(k, 1) && b.path(k, 1) < b.path(k, 2))) ordered = 0;
            status[i] = ordered;
        } catch (const IntegrationFailure&) {
            status[i] = -1;
        }
    });
    const auto ordered = std::count(status.begin(), status.end(), 1);
    const auto rejected = std::count(status.begin(), status.end(), -1);
    const auto accepted = static_cast<long>(m) - rejected;

    const double d0 = 1.0;
    const auto two = particles({0.0, d0}, 1.0);
    std::vector<double> gap_sq(m);
    parallel_for(m, [&](std::size_t i) {
        const auto b = sample_base(two, grid, RandomSource(10002).derive(i));
        const double d = b.path(grid.steps(), 1) - b.path(grid.steps(), 0);
        gap_sq[i] = d * d;
    });
    const auto e = estimate_mean(gap_sq, "gap");
    const double target = oracle::particle_gap_second_moment(d0, 1.0, 1.0);
    const double rel = std::abs(e.mean - target) / target;
    report(10, "particles", ordered == accepted && rejected * 1000 <= static_cast<long>(m) && rel <= 0.05,
           fmt("n=3 ordered on %ld / %ld accepted paths (%ld rejected); n=2 E[D(1)^2] = %.4f +- %.4f "
               "vs %.1f (rel %.4f)",
               ordered, accepted, rejected, e.mean, e.std_error, target, rel));
}

void prekopa_leindler() {
    const TimeGrid grid(128);
    const PLInstance eq{exp_linear_endpoint(1.0), exp_linear_endpoint(1.0), exp_linear_endpoint(1.0),
                        0.5, {}};
    const auto cert = certify(eq, WienerSpec{1}, grid, 1000, 100000, RandomSource(11001));
    bool ok = cert.hypothesis_clear && cert.max_violation_rate == 0.0 &&
              std::abs(cert.check.margin) <= 3.0 * cert.check.std_error;

    const double a = 2.0, b = 3.0, c = 5.0, t = 0.3;
    const PLInstance consts{constant_functional(a), constant_functional(b), constant_functional(c), t,
                            {}};
    const auto cc = pl_check(consts, WienerSpec{1}, grid, 100, RandomSource(11002));
    const double exact = std::log(a) - t * std::log(b) - (1.0 - t) * std::log(c);
    const auto zero = CameronMartinDrift(grid, 1);
    const double rate = pl_hypothesis_probe(consts, WienerSpec{1}, zero, zero, 100, RandomSource(11003));
    const PLInstance equal{constant_functional(2.0), constant_functional(2.0), constant_functional(2.0),
                           t, {}};
    const auto ce = certify(equal, WienerSpec{1}, grid, 100, 100, RandomSource(11004));
    ok = ok && std::abs(cc.margin - exact) <= 1e-14 && cc.std_error == 0.0 && rate == 1.0 &&
         ce.hypothesis_clear && ce.check.margin == 0.0;
    report(11, "Prekopa-Leindler", ok,
           fmt("exp(-W(1)) family: violation rate %.0f, margin %.4f +- %.4f; constants margin error "
               "%.1e, equal constants margin %.1g",
               cert.max_violation_rate, cert.check.margin, cert.check.std_error,
               std::abs(cc.margin - exact), ce.check.margin));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "pathvar_acceptance";
    fs::remove_all(root);
    std::size_t files = 0;
    std::vector<std::string> differing;
    std::ostringstream log;
    for (const auto& entry : fs::directory_iterator(PATHVAR_CONFIG_DIR)) {
        std::ifstream in(entry.path());
        auto doc = cli::Json::parse(in);
        if (doc.value("samples_M", 10000) > 2000) doc["samples_M"] = 2000;
        if (doc.contains("optimizer")) doc["optimizer"]["epochs"] = 5;
        const std::string stem = entry.path().stem().string();
        std::optional<cli::ExperimentConfig> cfg;
        try {
            cfg = cli::parse_config(doc);
            (void)cli::run_experiment(*cfg);
        } catch (const std::exception&) {
            continue;  // configs that are rejected by design
        }
        for (int run = 0; run < 2; ++run) {
            set_thread_count(run == 0 ? 1 : 3);
            cfg->output_dir = root / stem / std::to_string(run);
            (void)cli::execute(*cfg, log);
        }
        set_thread_count(1);
        for (const auto& f : fs::directory_iterator(root / stem / "0")) {
            if (f.path().extension() != ".csv") continue;
            ++files;
            if (slurp(f.path()) != slurp(root / stem / "1" / f.path().filename()))
                differing.push_back(stem + "/" + f.path().filename().string());
        }
    }
    report(12, "determinism", files > 0 && differing.empty(),
           fmt("%zu CSV files byte-identical across reruns (1 vs 3 threads), %zu differ", files,
               differing.size()));
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    girsanov_identity();
    duality_linear();
    duality_quadratic();
    entropy_criterion();
    entropy_inequality();
    beta_shift();
    composition();
    bridge_law();
    loop_bridge_degeneracy();
    particle_law();
    prekopa_leindler();
    determinism();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 12 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
