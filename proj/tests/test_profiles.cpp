#include <doctest.h>

#include <cmath>
#include <random>

#include "phl/errors.hpp"
#include "phl/profiles.hpp"

using namespace phl;

TEST_CASE("pucci extremal operators") {
    const std::vector<double> zero{0.0, 0.0};
    CHECK(pucci_minus(zero, 1.0, 2.0) == 0.0);

    const std::vector<double> mixed{1.0, -1.0};
    CHECK(pucci_minus(mixed, 1.0, 2.0) == doctest::Approx(-1.0).epsilon(1e-15));

    // Single eigenvalue: brute force over the sign split.
    const std::vector<double> single{3.0};
    const double expected = 3.0 >= 0.0 ? -4.0 * 3.0 : -0.5 * 3.0;
    CHECK(pucci_minus(single, 0.5, 4.0) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == -12.0);

    CHECK_THROWS_AS(pucci_minus(single, 0.0, 1.0), bad_ellipticity);
    CHECK_THROWS_AS(pucci_minus(single, 2.0, 1.0), bad_ellipticity);
}

TEST_CASE("pucci_minus is degenerate elliptic") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::uniform_real_distribution<double> bump(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> ev(4);
        for (double& e : ev) e = dist(rng);
        const double before = pucci_minus(ev, 0.7, 2.5);
        ev[trial % 4] += bump(rng);
        CHECK(pucci_minus(ev, 0.7, 2.5) <= before + 1e-12);
    }
}

namespace {

PointEval make_point(std::vector<double> xs, std::vector<double> gs, double tp, double tm) {
    PointEval pt;
    pt.x = Eigen::Map<Vec>(xs.data(), xs.size());
    pt.grad = Eigen::Map<Vec>(gs.data(), gs.size());
    pt.hess_plus_trace = tp;
    pt.hess_minus_trace = tm;
    return pt;
}

}  // namespace

TEST_CASE("structure_bound") {
    const Ellipticity unit = Ellipticity::uniform(1.0, 1.0);

    // Zero profile: only the trace terms survive.
    auto pt = make_point({0.3, 1.0}, {5.0, -2.0}, 2.0, 3.0);
    CHECK(structure_bound(GrowthProfile::zero(), unit, pt) == doctest::Approx(-1.0));

    // Pure gradient term.
    pt = make_point({1.0, 0.0}, {0.0, 2.0}, 0.0, 0.0);
    CHECK(structure_bound(GrowthProfile::power(2.0), unit, pt) == doctest::Approx(4.0));

    // Every term at once.
    const Ellipticity wide = Ellipticity::uniform(1.0, 2.0);
    pt = make_point({0.0, 1.0}, {std::exp(1.0), 0.0}, 1.0, 1.0);
    const double e = std::exp(1.0);
    CHECK(structure_bound(GrowthProfile::log_pos(1.0), wide, pt) ==
          doctest::Approx(e + 2.0 - 1.0).epsilon(1e-14));
}

TEST_CASE("structure_bound trace monotonicity") {
    const Ellipticity ell = Ellipticity::uniform(0.5, 3.0);
    const GrowthProfile phi = GrowthProfile::power(1.5, 2.0);
    auto pt = make_point({0.5, 0.5, 1.0}, {1.0, 0.0, 0.0}, 1.0, 1.0);
    const double base = structure_bound(phi, ell, pt);
    pt.hess_plus_trace += 0.7;
    CHECK(structure_bound(phi, ell, pt) >= base);
    pt.hess_minus_trace += 0.9;
    CHECK(structure_bound(phi, ell, pt) <= base + 3.0 * 0.7 + 1e-12);
}

TEST_CASE("osgood_check on the catalog") {
    CHECK(osgood_check(GrowthProfile::power(1.0), 1.0, 1.0) == OsgoodResult::Holds);
    CHECK(osgood_check(GrowthProfile::log_pos(1.0), 1.0, 0.5) == OsgoodResult::Holds);
    CHECK(osgood_check(GrowthProfile::log_neg(), 1.0, 0.5) == OsgoodResult::Holds);
    for (double k : {1.0, 1.5, 2.0, 3.0, 10.0})
        CHECK(osgood_check(GrowthProfile::power(k), 1.0, 1.0) == OsgoodResult::Holds);

    const auto root = [](double a) {
        return GrowthProfile::custom([a](double, double s) { return std::pow(s, a); },
                                     GrowthProfile::Sign::nonnegative);
    };
    CHECK(osgood_check(root(0.5), 1.0, 1.0) == OsgoodResult::Fails);
    for (double a : {0.3, 0.5, 0.9}) CHECK(osgood_check(root(a), 1.0, 1.0) == OsgoodResult::Fails);
}

TEST_CASE("osgood_check reports an infinite integrand") {
    // s |log s| vanishes at s = 1, inside (0, eps) for eps > 1.
    CHECK_THROWS_AS(osgood_check(GrowthProfile::log_pos(1.0), 1.0, 2.0), nonfinite_integrand);
    try {
        osgood_check(GrowthProfile::log_pos(1.0), 1.0, 2.0);
    } catch (const nonfinite_integrand& e) {
        CHECK(e.s == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK_THROWS_AS(osgood_check(GrowthProfile::zero(), 1.0, 1.0), nonfinite_integrand);
}

TEST_CASE("profile invariants") {
    const GrowthProfile phi = GrowthProfile::power(
        2.0, RealFn::of([](double t) { return 1.0 / (1.0 + t); }));
    CHECK(phi.eval(3.0, 0.0) == 0.0);
    CHECK(check_profile(phi, 0.0, 10.0, 0.0, 5.0));
    CHECK(check_profile(GrowthProfile::log_neg(), 0.0, 10.0, 0.0, 5.0));

    const GrowthProfile increasing = GrowthProfile::custom(
        [](double t, double s) { return t * s; }, GrowthProfile::Sign::nonnegative);
    CHECK_FALSE(check_profile(increasing, 0.1, 10.0, 0.1, 5.0));

    CHECK(check_ellipticity(Ellipticity::uniform(0.5, 2.0), 0.0, 10.0));
    const Ellipticity bad = Ellipticity::of(
        RealFn::of([](double t) { return 1.0 + t; }), RealFn::constant(2.0));
    CHECK_FALSE(check_ellipticity(bad, 0.1, 10.0));
}

TEST_CASE("geometry") {
    const Geometry g = Geometry::proportional(3, 2.0);
    CHECK(g.K(5.0) == doctest::Approx(0.3));
    CHECK_THROWS_AS(Geometry::proportional(0, 1.0), param_error);
}
