#include "doctest.h"
#include "support/oracles.hpp"

#include "pathvar/errors.hpp"
#include "pathvar/estimate.hpp"
#include "pathvar/grid.hpp"
#include "pathvar/parallel.hpp"
#include "pathvar/random.hpp"
#include "pathvar/stochastic.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

using namespace pathvar;

TEST_CASE("time grid nodes") {
    const TimeGrid g(8);
    CHECK(g.steps() == 8);
    CHECK(g.nodes() == 9);
    CHECK(g.dt() == 0.125);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(8) == 1.0);
    CHECK(g.nearest_node(0.5) == 4);
    CHECK(g.nearest_node(0.0) == 0);
    CHECK(g.nearest_node(1.0) == 8);
    CHECK_THROWS_AS(TimeGrid(0), InvalidArgument);
}

TEST_CASE("discrete path shape and distance") {
    const TimeGrid g(4);
    DiscretePath a(g, 2);
    DiscretePath b(g, 2);
    CHECK(a.values().size() == 10);
    b(3, 1) = -0.75;
    b(4, 0) = 2.0;
    CHECK(a.sup_distance(b) == 2.0);
    CHECK(a.sup_distance(b, 3) == 0.75);
    CHECK_THROWS_AS(a.sup_distance(DiscretePath(g, 1)), InvalidArgument);
    CHECK_THROWS_AS(DiscretePath(g, 1, {1.0, 2.0}), InvalidArgument);
    b(2, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(b.all_finite());
}

TEST_CASE("cameron-martin drift algebra") {
    const TimeGrid g(4);
    const auto u = CameronMartinDrift::from_function(g, 1, [](double t) { return 1.0 + t; });
    const auto path = u.induced_path();
    // u(t_k) = sum_{j<k} (1 + j/4) / 4
    CHECK(path(0, 0) == 0.0);
    CHECK(path(2, 0) == doctest::Approx((1.0 + 1.25) / 4.0));
    CHECK(path(4, 0) == doctest::Approx((1.0 + 1.25 + 1.5 + 1.75) / 4.0));
    CHECK(cm_norm_sq(u) == doctest::Approx((1.0 + 1.5625 + 2.25 + 3.0625) / 4.0));
    const auto z = u - u;
    CHECK(z.is_zero());
    CHECK((2.0 * u)(3, 0) == 3.5);
    CHECK((-u).sup_norm() == 1.75);
    CHECK_THROWS_AS(u + CameronMartinDrift(TimeGrid(5), 1), InvalidArgument);
    CHECK_THROWS_AS(CameronMartinDrift(g, 1, {1.0, 2.0, std::nan(""), 0.0}), InvalidArgument);
}

TEST_CASE("increments round trip") {
    const TimeGrid g(16);
    const auto inc = brownian_increments(g, 2, RandomSource(3));
    const std::vector<double> origin{1.0, -1.0};
    const auto path = path_from_increments(g, 2, inc, origin);
    CHECK(path(0, 0) == 1.0);
    CHECK(path(0, 1) == -1.0);
    const auto back = increments_of(path);
    for (std::size_t i = 0; i < inc.size(); ++i) CHECK(back[i] == doctest::Approx(inc[i]));
}

TEST_CASE("random streams are reproducible and distinct") {
    const RandomSource r(11);
    CHECK(r.derive(4) == r.derive(4));
    CHECK_FALSE(r.derive(4) == r.derive(5));
    auto e1 = r.derive(4).engine();
    auto e2 = r.derive(4).engine();
    CHECK(e1() == e2());
    CHECK(r.derive(4).engine()() != r.derive(5).engine()());
    CHECK(RandomSource(11).engine()() != RandomSource(12).engine()());
}

TEST_CASE("brownian increments have variance dt") {
    const TimeGrid g(50);
    double ss = 0.0;
    const std::size_t reps = 2000;
    for (std::size_t i = 0; i < reps; ++i)
        for (double x : brownian_increments(g, 1, RandomSource(1).derive(i))) ss += x * x;
    const double var = ss / static_cast<double>(reps * g.steps());
    // sd of the sample variance is dt * sqrt(2 / (reps * N)) ~ 2e-4 * dt
    CHECK(var == doctest::Approx(g.dt()).epsilon(0.02));
}

TEST_CASE("ito sum uses left endpoints") {
    const TimeGrid g(4);
    CameronMartinDrift v(g, 1, {1.0, 2.0, 3.0, 4.0});
    const std::vector<double> dm{0.5, -0.5, 1.0, 0.25};
    CHECK(ito_integral(v, dm) == doctest::Approx(0.5 - 1.0 + 3.0 + 1.0));
    CHECK(log_wick(v, dm) == doctest::Approx(3.5 - 0.5 * (1 + 4 + 9 + 16) / 4.0));
    CHECK_THROWS_AS(ito_integral(v, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("estimates") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto e = estimate_mean(x, "t");
    CHECK(e.mean == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0)));
    CHECK(e.samples == 4);

    SUBCASE("weights survive a large common shift") {
        const std::vector<double> lw{700.0, 700.0 + std::log(3.0), 700.0, 700.0};
        const std::vector<double> lw0{0.0, std::log(3.0), 0.0, 0.0};
        const auto big = estimate_weighted_mean(x, lw, "t");
        const auto ref = estimate_weighted_mean(x, lw0, "t");
        CHECK(std::isfinite(big.mean));
        CHECK(ref.mean == doctest::Approx((1 + 6 + 3 + 4) / 4.0));
        CHECK(big.mean / std::exp(700.0) == doctest::Approx(ref.mean));
    }
    SUBCASE("non-finite samples are named") {
        std::vector<double> bad{1.0, std::nan(""), 2.0};
        try {
            (void)estimate_mean(bad, "t");
            FAIL("expected EstimationFailure");
        } catch (const EstimationFailure& err) {
            REQUIRE(err.samples().size() == 1);
            CHECK(err.samples()[0] == 1);
        }
        CHECK_THROWS_AS(estimate_mean(std::vector<double>{}, "t"), InvalidArgument);
    }
    SUBCASE("z score") {
        CHECK(z_score({1.0, 0.3, 10}, {1.5, 0.4, 10}) == doctest::Approx(1.0));
        CHECK(z_score({1.0, 0.0, 1}, {1.0, 0.0, 1}) == 0.0);
        CHECK(std::isinf(z_score({1.0, 0.0, 1}, {2.0, 0.0, 1})));
    }
}

TEST_CASE("two-sample KS") {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> n01;
    std::vector<double> a(400), b(300), c(300);
    for (double& v : a) v = n01(eng);
    for (double& v : b) v = n01(eng);
    for (double& v : c) v = n01(eng) + 0.5;
    const auto same = ks_two_sample(a, b);
    const auto shifted = ks_two_sample(a, c);
    CHECK(same.statistic == doctest::Approx(oracle::ks_statistic_bruteforce(a, b)));
    CHECK(shifted.statistic == doctest::Approx(oracle::ks_statistic_bruteforce(a, c)));
    CHECK(same.p_value > 0.01);
    CHECK(shifted.p_value < 1e-6);
    CHECK(ks_two_sample(a, a).p_value == 1.0);
    CHECK_THROWS_AS(ks_two_sample(a, std::vector<double>{}), InvalidArgument);
}

TEST_CASE("parallel_for is schedule independent") {
    auto f = [](std::size_t i) {
        auto e = RandomSource(9).derive(i).engine();
        return std::normal_distribution<double>()(e);
    };
    set_thread_count(1);
    const auto serial = sample_map<double>(1000, f);
    set_thread_count(4);
    const auto threaded = sample_map<double>(1000, f);
    CHECK(serial == threaded);
    CHECK_THROWS_AS(parallel_for(100,
                                 [](std::size_t i) {
                                     if (i == 57) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
    set_thread_count(0);
    CHECK(thread_count() == 1);
}
