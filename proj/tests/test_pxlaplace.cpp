#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "phl/errors.hpp"
#include "phl/pxlaplace.hpp"

using namespace phl;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
    Vec v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Exponent constant_exponent(int n, double p_value) {
    Exponent e;
    e.ambient_dim = n;
    e.p = [p_value](const Vec&) { return p_value; };
    e.Dp = [n](const Vec&) { return Vec::Zero(n); };
    return e;
}

}  // namespace

TEST_CASE("px_operator catalog") {
    // Linear solutions of the sharp family vanish identically.
    const Exponent sharp = sharp_exponent(3, 3.0, {1.0, 1.0});
    for (double c : {1.0, 2.0, 5.0}) {
        Vec grad = make_vec({0.0, 0.0, c});
        CHECK(px_operator(sharp, make_vec({0.4, -0.7, 1.2}), grad, Mat::Zero(3, 3)) == 0.0);
    }

    // p = 2 reduces to the Laplacian; harmonic polynomial.
    const Exponent two = constant_exponent(2, 2.0);
    Mat hess(2, 2);
    hess << 2.0, 0.0, 0.0, -2.0;
    CHECK(px_operator(two, make_vec({1.0, 1.0}), make_vec({2.0, -2.0}), hess) ==
          doctest::Approx(0.0));

    // u = |x|^2/2 with p = 4 at (1, 0): n + 2.
    const int n = 2;
    const Exponent four = constant_exponent(n, 4.0);
    CHECK(px_operator(four, make_vec({1.0, 0.0}), make_vec({1.0, 0.0}), Mat::Identity(n, n)) ==
          doctest::Approx(n + 2.0));

    CHECK_THROWS_AS(px_operator(four, make_vec({1.0, 0.0}), Vec::Zero(2), Mat::Zero(2, 2)),
                    zero_gradient);
}

TEST_CASE("viscosity majorant") {
    // p = 2: the majorant collapses to the Laplacian.
    const Exponent two = constant_exponent(2, 2.0);
    Mat hess(2, 2);
    hess << 1.5, 0.3, 0.3, -0.8;
    const Vec g = make_vec({0.7, 0.1});
    CHECK(viscosity_majorant(two, make_vec({0.2, 0.4}), g, hess) ==
          doctest::Approx(px_operator(two, make_vec({0.2, 0.4}), g, hess)).epsilon(1e-12));

    // Sharp family at a linear solution: |Dp| c |log c| >= 0.
    const Exponent sharp = sharp_exponent(2, 3.0, {1.0});
    const Vec x = make_vec({0.5, 1.0});
    const Vec grad = make_vec({0.0, 2.0});
    const double expected = sharp.Dp(x).norm() * 2.0 * std::abs(std::log(2.0));
    CHECK(viscosity_majorant(sharp, x, grad, Mat::Zero(2, 2)) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(px_operator(sharp, x, grad, Mat::Zero(2, 2)) == 0.0);
}

TEST_CASE("majorant dominates the operator") {
    std::mt19937 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 4;
    Exponent expo;
    expo.ambient_dim = n;
    expo.p = [](const Vec& x) { return 1.5 + 0.8 / (1.0 + x.squaredNorm()); };
    expo.Dp = [](const Vec& x) {
        const double d = 1.0 + x.squaredNorm();
        return Vec(-1.6 / (d * d) * x);
    };
    for (int trial = 0; trial < 2000; ++trial) {
        Vec x(n), g(n);
        Mat m(n, n);
        for (int i = 0; i < n; ++i) {
            x[i] = gauss(rng);
            g[i] = gauss(rng);
            for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
        }
        if (g.norm() < 1e-8) continue;
        m = ((m + m.transpose()) / 2.0).eval();
        CHECK(viscosity_majorant(expo, x, g, m) - px_operator(expo, x, g, m) >= -1e-12);
    }
}

TEST_CASE("trace split against the Jacobi oracle") {
    std::mt19937 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
        m = ((m + m.transpose()) / 2.0).eval();
        const auto [tp, tm] = trace_split_psd(m);
        double otp = 0.0, otm = 0.0;
        for (double e : oracles::jacobi_eigenvalues(m)) (e >= 0.0 ? otp : otm) += std::abs(e);
        CHECK(tp == doctest::Approx(otp).epsilon(1e-10));
        CHECK(tm == doctest::Approx(otm).epsilon(1e-10));
    }
}

TEST_CASE("verify_1d_solution") {
    // nu = 1: the pair is (x, any M); residual vanishes.
    Params1D unit{1.0, 0.5, 1.0};
    const auto flat = verify_1d_solution(Solution1D::LogPosCheck, unit,
                                         linspace(0.01, 5.0, 64));
    CHECK(flat.pass);
    CHECK(flat.max_residual < 1e-12);

    Params1D half{0.5, 0.5, 1.0};
    const auto mid = verify_1d_solution(Solution1D::LogPosCheck, half,
                                        linspace(0.01, 5.0, 128));
    CHECK(mid.pass);
    CHECK(mid.max_residual <= 1e-7);
    REQUIRE(mid.lambda_equality_error.has_value());
    CHECK(*mid.lambda_equality_error <= 1e-10);

    Params1D two{2.0, 0.5, 1.0};
    const auto sista2 = verify_1d_solution(Solution1D::Sista2, two, linspace(0.01, 5.0, 128));
    CHECK(sista2.pass);
    CHECK(sista2.max_residual <= 1e-7);
    for (double x : linspace(0.01, 5.0, 16))
        CHECK(solution_1d_derivative(Solution1D::Sista2, two, x) > 1.0);

    // Equality check insists on M <= 1.
    Params1D big_m{0.5, 2.0, 1.0};
    CHECK_THROWS_AS(verify_1d_solution(Solution1D::LogPosCheck, big_m, linspace(0.1, 1.0, 8)),
                    param_error);
    Params1D bad_nu{-1.0, 0.5, 1.0};
    CHECK_THROWS_AS(verify_1d_solution(Solution1D::Sista1, bad_nu, linspace(0.1, 1.0, 8)),
                    param_error);
}

TEST_CASE("exponent drift equation") {
    // p' = -/+ (p - 1) A, exactly.
    for (auto family : {Solution1D::LogPosCheck, Solution1D::Sista2}) {
        Params1D params{family == Solution1D::LogPosCheck ? 0.5 : 2.0, 0.7, 1.3};
        for (double x : linspace(0.0, 4.0, 17)) {
            const double p = solution_1d_exponent(family, params, x);
            const double dp = solution_1d_exponent_deriv(family, params, x);
            const bool up = family == Solution1D::LogPosCheck;  // nu < 1: decreasing exponent
            const double expected = (up ? -1.0 : 1.0) * (p - 1.0) * params.A;
            CHECK(std::abs(dp - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("envelope rate identity") {
    // u'(R) = nu^(exp(A R)) for the drifting-down pairing.
    for (double nu : {0.3, 0.7, 1.0}) {
        Params1D params{nu, 0.5, 1.0};
        for (double R : {0.5, 1.0, 2.5}) {
            const double lhs = solution_1d_derivative(Solution1D::LogPosCheck, params, R);
            const double rhs = std::pow(nu, std::exp(params.A * R));
            CHECK(oracles::rel_dev(lhs, rhs) < 1e-10);
        }
    }
}

TEST_CASE("cor34 gate") {
    const Exponent rising = Exponent::one_dim([](double x) { return 2.0 + 0.5 * x; },
                                              [](double) { return 0.5; });
    ScalarField slow{[](const Vec& x) { return 0.5 * x[0]; },
                     [](const Vec&) { return make_vec({0.5}); }};
    const auto gate = cor34_gate(rising, slow, make_vec({1.0}));
    CHECK(gate.applicable);
    CHECK(gate.theta == doctest::Approx(0.0));
    CHECK(gate.log_grad_norm < 0.0);

    const Exponent falling = Exponent::one_dim([](double x) { return 3.0 - 0.5 * x; },
                                               [](double) { return -0.5; });
    ScalarField steep{[](const Vec& x) { return 2.0 * x[0]; },
                      [](const Vec&) { return make_vec({2.0}); }};
    const auto gate2 = cor34_gate(falling, steep, make_vec({1.0}));
    CHECK(gate2.applicable);
    CHECK(gate2.theta == doctest::Approx(std::acos(-1.0)));

    // Perpendicular gradients are rejected.
    Exponent planar;
    planar.ambient_dim = 2;
    planar.p = [](const Vec& x) { return 2.0 + x[0]; };
    planar.Dp = [](const Vec&) { return make_vec({1.0, 0.0}); };
    ScalarField vertical{[](const Vec& x) { return x[1]; },
                         [](const Vec&) { return make_vec({0.0, 1.0}); }};
    const auto gate3 = cor34_gate(planar, vertical, make_vec({0.5, 0.5}));
    CHECK_FALSE(gate3.applicable);

    // Rising exponent with steep solution: cos(theta) log|Du| > 0.
    const auto gate4 = cor34_gate(rising, steep, make_vec({1.0}));
    CHECK_FALSE(gate4.applicable);

    ScalarField flat{[](const Vec&) { return 1.0; }, [](const Vec&) { return make_vec({0.0}); }};
    CHECK_THROWS_AS(cor34_gate(rising, flat, make_vec({1.0})), zero_gradient);
    const Exponent constant = Exponent::one_dim([](double) { return 2.0; },
                                                [](double) { return 0.0; });
    CHECK_THROWS_AS(cor34_gate(constant, steep, make_vec({1.0})), zero_exponent_gradient);
}

TEST_CASE("sharp family divergence-form residual") {
    const int n = 3;
    const Exponent expo = sharp_exponent(n, 3.0, {1.0, 1.0});
    const double c = 2.0;
    const auto grad_fn = [n, c](const Vec&) {
        Vec g = Vec::Zero(n);
        g[n - 1] = c;
        return g;
    };
    for (const auto& xs : {make_vec({0.3, -0.4, 0.8}), make_vec({0.9, 0.1, 1.5})})
        CHECK(std::abs(divergence_form_residual(expo, grad_fn, xs)) <= 1e-8);
}

TEST_CASE("sampled exponent bounds") {
    Exponent expo;
    expo.ambient_dim = 2;
    expo.p = [](const Vec& x) { return 2.0 + 1.0 / (1.0 + x.squaredNorm()); };
    expo.Dp = [](const Vec& x) {
        const double d = 1.0 + x.squaredNorm();
        return Vec(-2.0 / (d * d) * x);
    };
    expo.truncation_radius = 50.0;
    CHECK(expo.p_lambda(2.0) == doctest::Approx(1.0));  // min(1, p-1) = 1 everywhere
    CHECK(expo.p_Lambda(2.0) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(expo.used_sampled_fallback());

    Exponent bounded = expo;
    bounded.p_Lambda_bound = RealFn::constant(2.0);
    CHECK(bounded.p_Lambda(2.0) == 2.0);
}
