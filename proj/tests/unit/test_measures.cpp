#include "doctest.h"
#include "support/oracles.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/measures.hpp"
#include "pathvar/stochastic.hpp"

#include <cmath>
#include <string>

using namespace pathvar;

namespace {

const LoopSpec two_atoms{{{{-1.0}, 0.5}, {{1.0}, 0.5}}};

ParticlesSpec two_particles(double gamma = 1.0) {
    ParticlesSpec p;
    p.sigma = 1.0;
    p.repulsion = gamma;
    p.start = {0.0, 1.0};
    return p;
}

DiffusionSpec ou_diffusion() {
    return DiffusionSpec{Coefficient::constant_value(1.0), Coefficient{[](double x) { return -x; }, {}},
                         0.0};
}

std::string message_of(const MeasureSpec& spec) {
    try {
        validate(spec);
    } catch (const InvalidArgument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("validate names the broken invariant") {
    CHECK(message_of(WienerSpec{0}).find("dim") != std::string::npos);
    CHECK(message_of(BridgeSpec{{}}).find("endpoint") != std::string::npos);
    CHECK(message_of(LoopSpec{{{{1.0}, 0.3}}}).find("sum to 1") != std::string::npos);
    CHECK(message_of(LoopSpec{{{{1.0}, 0.5}, {{1.0, 2.0}, 0.5}}}) != "");
    auto p = two_particles(0.4);
    CHECK(message_of(p).find("sigma^2 <= 2*gamma") != std::string::npos);
    p = two_particles();
    p.start = {1.0, 0.0};
    CHECK(message_of(p).find("increasing") != std::string::npos);
    CHECK(message_of(two_particles(0.5)).empty());
    CHECK(message_of(two_atoms).empty());
}

TEST_CASE("family dimensions") {
    CHECK(path_dim(WienerSpec{3}) == 3);
    CHECK(noise_dim(BridgeSpec{{0.0, 1.0}}) == 2);
    CHECK(path_dim(ou_diffusion()) == 2);
    CHECK(noise_dim(ou_diffusion()) == 1);
    CHECK(family_name(two_atoms) == "loop");
    CHECK(family_name(two_particles()) == "particles");
}

TEST_CASE("wiener base pair") {
    const TimeGrid g(32);
    const auto b = sample_base(WienerSpec{2}, g, RandomSource(1));
    CHECK(b.path.sup_distance(b.beta) == 0.0);
    CHECK(b.path(0, 0) == 0.0);
    const auto again = sample_base(WienerSpec{2}, g, RandomSource(1));
    CHECK(b.path.sup_distance(again.path) == 0.0);
    CHECK(beta_functional(WienerSpec{2}, b.path).sup_distance(b.beta) == 0.0);
}

TEST_CASE("perturbation adds the induced path on wiener space") {
    const TimeGrid g(16);
    const WienerSpec w{1};
    const auto base = sample_base(w, g, RandomSource(2));
    const auto cp = perturb(w, base, DriftSpec::constant(1, 0.5), RandomSource(3));
    for (std::size_t k = 0; k < g.nodes(); ++k)
        CHECK(cp.path(k, 0) == doctest::Approx(base.path(k, 0) + 0.5 * g.time(k)));
    REQUIRE(cp.shift.has_value());
    CHECK(cp.shift->sup_norm() == doctest::Approx(0.5));
    const auto z = perturb(w, base, DriftSpec::zero(1), RandomSource(3));
    CHECK(z.path.sup_distance(base.path) == 0.0);
    CHECK_THROWS_AS(perturb(w, base, DriftSpec::zero(2), RandomSource(3)), InvalidArgument);
}

TEST_CASE("bridge samples are pinned and recover beta") {
    const TimeGrid g(64);
    const BridgeSpec s{{0.7}};
    for (std::size_t i = 0; i < 50; ++i) {
        const auto b = sample_base(s, g, RandomSource(4).derive(i));
        CHECK(b.path(0, 0) == 0.0);
        CHECK(b.path(g.steps(), 0) == 0.7);
        const auto beta = beta_functional(s, b.path);
        CHECK(beta.sup_distance(b.beta, g.steps() - 1) < 1e-12);
        CHECK(beta_shift_residual(s, b, DriftSpec::constant(1, 0.5), RandomSource(5)) < 1e-12);
    }
    CHECK(beta_recovery_last_node(s, g) == 63);
    CHECK(beta_recovery_last_node(WienerSpec{1}, g) == 64);
}

TEST_CASE("bridge covariance at node times") {
    const TimeGrid g(32);
    const BridgeSpec s{{0.0}};
    const std::size_t m = 20000;
    const std::size_t ks = g.nearest_node(0.25);
    const std::size_t kt = g.nearest_node(0.6);
    std::vector<double> prod(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto b = sample_base(s, g, RandomSource(6).derive(i));
        prod[i] = b.path(ks, 0) * b.path(kt, 0);
    }
    const auto e = estimate_mean(prod, "cov");
    const double expect = oracle::bridge_covariance(g.time(ks), g.time(kt));
    CHECK(std::abs(e.mean - expect) < 4.0 * e.std_error);
}

TEST_CASE("loop kernel matches direct evaluation") {
    const std::vector<double> a{-1.0, 1.0};
    const std::vector<double> w{0.25, 0.75};
    const std::vector<LoopAtom> atoms{{{-1.0}, 0.25}, {{1.0}, 0.75}};
    for (double t : {0.0, 0.3, 0.9}) {
        for (double x : {-2.0, -0.1, 0.4, 1.5}) {
            const auto kv = loop_kernel(t, std::span<const double>(&x, 1), atoms);
            CHECK(kv.log_h == doctest::Approx(oracle::mixture_log_h(t, x, a, w)).epsilon(1e-12));
            CHECK(kv.grad_log[0] ==
                  doctest::Approx(oracle::mixture_grad_log(t, x, a, w)).epsilon(1e-12));
            CHECK(kv.hgrad[0] / kv.h == doctest::Approx(kv.grad_log[0]).epsilon(1e-12));
        }
    }
    SUBCASE("far from every atom the gradient stays finite") {
        const double x = 40.0;
        const auto kv = loop_kernel(0.999, std::span<const double>(&x, 1), atoms);
        CHECK(std::isfinite(kv.grad_log[0]));
        CHECK(kv.grad_log[0] == doctest::Approx((1.0 - 40.0) / 0.001).epsilon(1e-9));
    }
    CHECK_THROWS_AS(loop_kernel(1.0, std::vector<double>{0.0}, atoms), InvalidArgument);
}

TEST_CASE("loop base samples end on an atom") {
    const TimeGrid g(64);
    int left = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        const auto b = sample_base(two_atoms, g, RandomSource(7).derive(i));
        const double end = b.path(g.steps(), 0);
        CHECK((end == 1.0 || end == -1.0));
        left += end < 0.0;
        CHECK(beta_functional(two_atoms, b.path).sup_distance(b.beta) == 0.0);
    }
    CHECK(left > 70);
    CHECK(left < 130);
}

TEST_CASE("particles stay ordered and match the driving noise") {
    const TimeGrid g(128);
    const auto spec = two_particles();
    for (std::size_t i = 0; i < 100; ++i) {
        const auto b = sample_base(spec, g, RandomSource(8).derive(i));
        for (std::size_t k = 0; k < g.nodes(); ++k) CHECK(b.path(k, 1) > b.path(k, 0));
        CHECK(b.path(0, 0) == 0.0);
        CHECK(b.path(0, 1) == 1.0);
    }
    const auto inc = brownian_increments(g, 2, RandomSource(9));
    const auto p1 = integrate_particles(spec, g, inc, RandomSource(10));
    const auto p2 = integrate_particles(spec, g, inc, RandomSource(10));
    CHECK(p1.sup_distance(p2) == 0.0);
    CHECK_THROWS_AS(integrate_particles(spec, g, std::vector<double>(3), RandomSource(1)),
                    InvalidArgument);
}

TEST_CASE("diffusion shift exists only for constant volatility") {
    const TimeGrid g(32);
    const auto ou = ou_diffusion();
    const auto b = sample_base(ou, g, RandomSource(11));
    CHECK(b.path(0, 0) == 0.0);
    for (std::size_t k = 0; k < g.nodes(); ++k) CHECK(b.path(k, 1) == b.beta(k, 0));
    const auto cp = perturb(ou, b, DriftSpec::constant(1, 0.3), RandomSource(12));
    CHECK(cp.shift.has_value());

    DiffusionSpec vol = ou;
    vol.volatility = Coefficient{[](double x) { return 1.0 + 0.5 * std::tanh(x); }, {}};
    const auto bv = sample_base(vol, g, RandomSource(11));
    const auto cv = perturb(vol, bv, DriftSpec::constant(1, 0.3), RandomSource(12));
    CHECK_FALSE(cv.shift.has_value());
    CHECK(beta_shift_residual(vol, bv, DriftSpec::constant(1, 0.3), RandomSource(12)) < 1e-12);
}

TEST_CASE("scheme path reproduces the sampler from its noise") {
    const TimeGrid g(64);
    const BridgeSpec s{{0.4}};
    const auto b = sample_base(s, g, RandomSource(13));
    CHECK(scheme_path(s, b.beta, RandomSource(1)).sup_distance(b.path) < 1e-12);
    const auto w = sample_base(WienerSpec{1}, g, RandomSource(13));
    CHECK(scheme_path(WienerSpec{1}, w.beta, RandomSource(1)).sup_distance(w.path) == 0.0);
    const auto p = sample_base(two_particles(), g, RandomSource(14));
    CHECK(scheme_path(two_particles(), p.beta, RandomSource(14).derive(1)).sup_distance(p.path) <
          1e-12);
}

TEST_CASE("composition of perturbations") {
    const TimeGrid g(64);
    const auto u = DriftSpec::constant(1, 0.5);
    const auto v = DriftSpec::open_loop(
        CameronMartinDrift::from_function(g, 1, [](double t) { return std::sin(3.0 * t); }));
    const auto w = sample_base(WienerSpec{1}, g, RandomSource(15));
    CHECK(compose_check(WienerSpec{1}, u, v, w, RandomSource(1)) < 1e-14);
    const BridgeSpec s{{0.5}};
    const auto b = sample_base(s, g, RandomSource(15));
    CHECK(compose_check(s, u, v, b, RandomSource(1)) <= 1e-10);
    const auto fb = clip_drift(affine_feedback(1, -0.5, 0.25), 1.0);
    CHECK(compose_check(WienerSpec{1}, fb, v, w, RandomSource(1)) < 1e-12);
}

TEST_CASE("functional catalog") {
    const TimeGrid g(4);
    DiscretePath p(g, 1, {0.0, 1.0, 3.0, -1.0, 0.5});
    CHECK(linear_endpoint(2.0)(p) == 1.0);
    CHECK(quadratic_endpoint(0.5)(p) == 0.125);
    CHECK(clamped_endpoint(-2.0, 0.25)(p) == 0.25);
    CHECK(clamped_midpoint(-2.0, 2.0)(p) == 2.0);
    CHECK(clamped_midpoint_square(4.0)(p) == 4.0);
    CHECK(running_max_clamp(-2.0, 10.0)(p) == 3.0);
    CHECK(exp_linear_endpoint(2.0)(p) == doctest::Approx(std::exp(-1.0)));
    CHECK(constant_functional(1.5)(p) == 1.5);
    CHECK(standard_statistics().size() == 3);
    CHECK_THROWS_AS(linear_endpoint(1.0, 3)(p), InvalidArgument);

    REQUIRE(linear_endpoint(2.0).has_gradient());
    std::vector<double> grad(5, -1.0);
    quadratic_endpoint(0.5).gradient(p, grad);
    CHECK(grad[4] == doctest::Approx(0.5));
    CHECK(grad[0] == 0.0);
}
