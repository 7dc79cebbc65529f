#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "phl/errors.hpp"
#include "phl/growth.hpp"

using namespace phl;

TEST_CASE("limit_ratio: zero profile analytic values") {
    const auto phi = GrowthProfile::zero();
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    const int n = 2;
    // gamma = n R makes K int Lambda/lambda = 1, so the ratio is exp(-1).
    const Geometry geom = Geometry::proportional(n, static_cast<double>(n));
    const auto sweep = limit_ratio(phi, ell, geom, 1.0, geomspace(1.0, 1e3, 16));
    for (const auto& pt : sweep.points)
        CHECK(oracles::rel_dev(pt.ratio, std::exp(-1.0)) < 1e-12);
    CHECK(oracles::rel_dev(sweep.liminf_estimate, std::exp(-1.0)) < 1e-12);

    // gamma = R^2: the exponent n/R vanishes and the ratio tends to 1.
    const Geometry wide = Geometry::of(n, RealFn::of([](double R) { return R * R; }));
    const auto sweep2 = limit_ratio(phi, ell, wide, 1.0, geomspace(1.0, 1e3, 16));
    for (std::size_t i = 1; i < sweep2.points.size(); ++i)
        CHECK(sweep2.points[i].ratio >= sweep2.points[i - 1].ratio);
    CHECK(sweep2.points.back().ratio > 0.99);
}

TEST_CASE("limit_ratio: sublinear family matches the display formula") {
    const double k = 2.0, nu = 1.0, R = 10.0;
    const int n = 2;
    const auto phi = GrowthProfile::power(k, 1.0);
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    const Geometry geom = Geometry::proportional(n, 1.0);
    const auto sweep = limit_ratio(phi, ell, geom, nu, {R});
    const double Kt = (n / R) * 1.0 / 1.0;  // K Lambda(R) / C(R)
    const double I = R;                     // int_0^R A with A = 1
    const double expected = std::pow(
        (Kt * (k - 1.0) * I + Kt * std::pow(nu, 1.0 - k)) /
            (std::exp(Kt * (k - 1.0) * I) * (Kt * std::pow(nu, 1.0 - k) + 1.0) - 1.0),
        1.0 / (k - 1.0));
    CHECK(oracles::rel_dev(sweep.points.front().ratio, expected) < 1e-8);
}

TEST_CASE("limit_ratio falls back to the solver for custom profiles") {
    const auto phi = GrowthProfile::custom(
        [](double, double s) { return s * s / (1.0 + s); }, GrowthProfile::Sign::nonnegative);
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    const Geometry geom = Geometry::proportional(1, 1.0);
    const auto sweep = limit_ratio(phi, ell, geom, 1.0, {2.0});
    CHECK(sweep.points.front().ratio > 0.0);
    CHECK(sweep.points.front().ratio < 1.0);
}

TEST_CASE("select_gamma rules") {
    const auto at = [](const GammaRule& rule, double R) { return rule.gamma(R); };

    for (double c : {1.0, 3.0}) {
        const auto rule = select_gamma(GrowthProfile::zero(), Ellipticity::uniform(1.0, c));
        CHECK(at(rule, 5.0) == doctest::Approx(c * 5.0));
    }
    const auto power_rule = select_gamma(GrowthProfile::power(2.0, 1.0),
                                         Ellipticity::uniform(1.0, 1.0));
    CHECK(at(power_rule, 7.0) == doctest::Approx(7.0));

    const auto log_rule =
        select_gamma(GrowthProfile::log_pos(1.0), Ellipticity::uniform(1.0, 1.0));
    CHECK(at(log_rule, 3.0) == doctest::Approx(std::exp(3.0)));

    const auto neg_rule =
        select_gamma(GrowthProfile::log_neg(), Ellipticity::uniform(1.0, 1.0), 1, 0.5);
    CHECK(at(neg_rule, 2.0) == doctest::Approx(1.0 / std::abs(std::log(0.5))));

    CHECK_THROWS_AS(select_gamma(GrowthProfile::custom([](double, double s) { return s; },
                                                       GrowthProfile::Sign::nonnegative),
                                 Ellipticity::uniform(1.0, 1.0)),
                    unknown_family);
}

TEST_CASE("limit with the selected gamma stays above the analytic floor") {
    for (double c : {1.0, 2.0}) {
        const int n = 2;
        const auto ell = Ellipticity::uniform(1.0, c);
        const auto rule = select_gamma(GrowthProfile::zero(), ell, n);
        const Geometry geom = Geometry::of(n, rule.gamma);
        const auto sweep =
            limit_ratio(GrowthProfile::zero(), ell, geom, 1.0, geomspace(1.0, 100.0, 8));
        CHECK(sweep.liminf_estimate >= std::exp(-n * c) - 1e-12);
    }
}

TEST_CASE("classify: power family catalog") {
    const auto ell = Ellipticity::uniform(1.0, 1.0);

    const GrowthReport log_report = classify(GrowthProfile::power(2.0, 1.0), ell, 5.0);
    CHECK(log_report.boundedness == GrowthReport::Boundedness::Unbounded);
    CHECK(log_report.law.tag == GrowthLaw::Tag::Log);

    const GrowthReport mid = classify(GrowthProfile::power(1.5, 1.0), ell, 5.0);
    CHECK(mid.boundedness == GrowthReport::Boundedness::BoundedPossible);
    CHECK(mid.law.tag == GrowthLaw::Tag::Power);
    CHECK(mid.law.target == GrowthLaw::Target::Mprime);
    CHECK(mid.law.exponent == doctest::Approx(-2.0));

    // Borderline flip at k = 2.
    const GrowthReport below = classify(GrowthProfile::power(2.0 - 1e-2, 1.0), ell, 5.0);
    CHECK(below.boundedness == GrowthReport::Boundedness::BoundedPossible);
    const GrowthReport at = classify(GrowthProfile::power(2.0, 1.0), ell, 5.0);
    CHECK(at.boundedness == GrowthReport::Boundedness::Unbounded);
}

TEST_CASE("classify: log families") {
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    const GrowthReport unit = classify(GrowthProfile::log_pos(1.0), ell, 1.0);
    CHECK(unit.boundedness == GrowthReport::Boundedness::Unbounded);
    CHECK(unit.law.tag == GrowthLaw::Tag::Linear);

    const GrowthReport small = classify(GrowthProfile::log_pos(1.0), ell, 0.5);
    CHECK(small.boundedness == GrowthReport::Boundedness::BoundedPossible);
    CHECK(small.law.tag == GrowthLaw::Tag::SubExponentialDecayRate);

    const GrowthReport neg_small = classify(GrowthProfile::log_neg(), ell, 0.5);
    CHECK(neg_small.boundedness == GrowthReport::Boundedness::Unbounded);
    CHECK(neg_small.law.tag == GrowthLaw::Tag::Linear);

    const GrowthReport neg_big = classify(GrowthProfile::log_neg(), ell, 2.0);
    CHECK(neg_big.boundedness == GrowthReport::Boundedness::Unbounded);
    CHECK(neg_big.law.tag == GrowthLaw::Tag::ExpIntegral);

    CHECK_THROWS_AS(classify(GrowthProfile::custom([](double, double s) { return s; },
                                                   GrowthProfile::Sign::nonnegative),
                             ell, 1.0),
                    unknown_family);
}

TEST_CASE("classify evidence is positive and finite") {
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    for (int which = 0; which < 4; ++which) {
        const GrowthProfile phi = which == 0   ? GrowthProfile::zero()
                                  : which == 1 ? GrowthProfile::power(3.0, 1.0)
                                  : which == 2 ? GrowthProfile::log_pos(1.0)
                                               : GrowthProfile::log_neg();
        for (double nu : {0.5, 2.0}) {
            const GrowthReport report = classify(phi, ell, nu);
            CHECK(report.evidence.size() > 4);
            for (const auto& e : report.evidence) {
                CHECK(std::isfinite(e.ratio));
                CHECK(e.ratio > 0.0);
            }
            CHECK(report.notes.empty());
        }
    }
}

TEST_CASE("classify of a zero profile is linear with positive limit") {
    const GrowthReport report =
        classify(GrowthProfile::zero(), Ellipticity::uniform(1.0, 1.0), 1.0);
    CHECK(report.law.tag == GrowthLaw::Tag::Linear);
    CHECK(report.boundedness == GrowthReport::Boundedness::Unbounded);
    CHECK(report.limit_estimate > 0.0);
    const std::string json = report.to_json();
    CHECK(json.find("\"growth_law\"") != std::string::npos);
    CHECK(report.to_table().find("growth law") != std::string::npos);
}

TEST_CASE("divergence certificate matches the families") {
    const auto ell = Ellipticity::uniform(1.0, 1.0);
    const auto cert = [&](GrowthProfile phi, double nu) {
        OdeProblem p;
        p.phi = std::move(phi);
        p.ell = ell;
        p.nu = nu;
        p.R = 1e4;
        p.variant = p.phi.is_zero() ? OdeVariant::AsWritten : OdeVariant::SeparableMajorant;
        const auto cf = ClosedFormSolution::try_build(p);
        REQUIRE(cf.has_value());
        return integral_divergence_test(*cf).outcome;
    };
    CHECK(cert(GrowthProfile::zero(), 1.0) == DivergenceTest::Outcome::DivergenceCertified);
    CHECK(cert(GrowthProfile::power(1.0, 1.0), 5.0) ==
          DivergenceTest::Outcome::ConvergenceCertified);
    CHECK(cert(GrowthProfile::power(2.0, 1.0), 5.0) ==
          DivergenceTest::Outcome::DivergenceCertified);
    CHECK(cert(GrowthProfile::power(10.0, 1.0), 5.0) ==
          DivergenceTest::Outcome::DivergenceCertified);
    CHECK(cert(GrowthProfile::log_neg(), 2.0) == DivergenceTest::Outcome::DivergenceCertified);
    CHECK(cert(GrowthProfile::log_pos(1.0), 0.5) ==
          DivergenceTest::Outcome::ConvergenceCertified);
    // k just below 2 converges but the tail is too fat to certify by T = 1e4.
    CHECK(cert(GrowthProfile::power(2.0 - 1e-2, 1.0), 5.0) !=
          DivergenceTest::Outcome::DivergenceCertified);
}
