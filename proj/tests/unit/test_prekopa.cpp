#include "doctest.h"

#include "pathvar/errors.hpp"
#include "pathvar/functional.hpp"
#include "pathvar/prekopa.hpp"

#include <cmath>

using namespace pathvar;

namespace {

PLInstance constants(double a, double b, double c, double t) {
    return {constant_functional(a), constant_functional(b), constant_functional(c), t, {}};
}

PLInstance exp_family(double t) {
    return {exp_linear_endpoint(1.0), exp_linear_endpoint(1.0), exp_linear_endpoint(1.0), t, {}};
}

}  // namespace

TEST_CASE("hypothesis probe on constant functionals") {
    const TimeGrid g(16);
    const WienerSpec w{1};
    const auto h = CameronMartinDrift::constant(g, 1, 0.8);
    const auto k = CameronMartinDrift::constant(g, 1, -0.3);
    CHECK(pl_hypothesis_probe(constants(1, 1, 1, 0.3), w, h, k, 200, RandomSource(1)) == 0.0);
    CHECK(pl_hypothesis_probe(constants(1, 1, 1, 0.5), w, h, h, 200, RandomSource(1)) == 0.0);
    const auto zero = CameronMartinDrift(g, 1);
    CHECK(pl_hypothesis_probe(constants(0.5, 1, 1, 0.5), w, zero, zero, 200, RandomSource(1)) == 1.0);
    CHECK_THROWS_AS(pl_hypothesis_probe(constants(1, 1, 1, 1.5), w, h, k, 10, RandomSource(1)),
                    InvalidArgument);
    CHECK_THROWS_AS(pl_hypothesis_probe(constants(1, 1, 1, 0.5), WienerSpec{2}, h, k, 10,
                                        RandomSource(1)),
                    InvalidArgument);
}

TEST_CASE("exponential family meets the hypothesis with equality") {
    const TimeGrid g(16);
    const auto h = CameronMartinDrift::constant(g, 1, 1.0);
    const auto k = CameronMartinDrift::constant(g, 1, -0.5);
    CHECK(pl_hypothesis_probe(exp_family(0.4), WienerSpec{1}, h, k, 500, RandomSource(2)) == 0.0);
}

TEST_CASE("margin of the constant and equality families") {
    const TimeGrid g(16);
    const auto c = pl_check(constants(2.0, 2.0, 2.0, 0.5), WienerSpec{1}, g, 100, RandomSource(3));
    CHECK(c.margin == doctest::Approx(0.0));
    CHECK(c.std_error == 0.0);
    CHECK(c.z == 0.0);
    const auto e = pl_check(exp_family(0.5), WienerSpec{1}, g, 20000, RandomSource(4));
    CHECK(std::abs(e.margin) < 3.0 * e.std_error);
}

TEST_CASE("margin shifts by log lambda when a is scaled") {
    const TimeGrid g(16);
    auto inst = exp_family(0.3);
    const auto base = pl_check(inst, WienerSpec{1}, g, 2000, RandomSource(5));
    const auto a = inst.a;
    inst.a.evaluate = [a](const DiscretePath& p) { return 3.0 * a(p); };
    const auto scaled = pl_check(inst, WienerSpec{1}, g, 2000, RandomSource(5));
    CHECK(scaled.margin - base.margin == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("density concavity probe") {
    const TimeGrid g(16);
    const auto h = CameronMartinDrift::constant(g, 1, 1.0);
    const auto k = CameronMartinDrift::constant(g, 1, -1.0);
    // -log d linear in the path passes with equality; -log x^2 is strictly convex.
    CHECK(density_concavity_probe(exp_linear_endpoint(1.0), WienerSpec{1}, h, k, 200,
                                  RandomSource(6)) == 0.0);
    CHECK(density_concavity_probe(quadratic_endpoint(1.0), WienerSpec{1}, h, k, 200,
                                  RandomSource(6)) > 0.5);
}

TEST_CASE("certificate") {
    const TimeGrid g(16);
    const auto cert = certify(exp_family(0.5), WienerSpec{1}, g, 200, 5000, RandomSource(7));
    CHECK(cert.drift_levels.size() == 5);
    CHECK(cert.hypothesis_clear);
    CHECK(cert.max_violation_rate == 0.0);
    CHECK(cert.check.margin >= -3.0 * cert.check.std_error);

    const auto bad = certify(constants(0.5, 1, 1, 0.5), WienerSpec{1}, g, 50, 100, RandomSource(7));
    CHECK_FALSE(bad.hypothesis_clear);
    CHECK(bad.max_violation_rate == 1.0);
    CHECK(bad.check.margin == doctest::Approx(std::log(0.5)));
}
