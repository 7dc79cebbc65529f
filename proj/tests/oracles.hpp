#pragma once

// Test-side oracles, independent of the library implementation paths they
// check: Romberg quadrature for Ei, cyclic Jacobi for eigenvalues, plain
// finite-difference stencils.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "phl/closed_forms.hpp"
#include "phl/numerics.hpp"
#include "phl/ode.hpp"

namespace oracles {

inline double romberg(const std::function<double(double)>& f, double a, double b,
                      double rel_tol = 1e-13, int max_k = 22) {
    std::vector<std::vector<double>> r(1);
    double h = b - a;
    r[0].push_back(0.5 * h * (f(a) + f(b)));
    for (int k = 1; k < max_k; ++k) {
        h *= 0.5;
        double sum = 0.0;
        const long n = 1L << (k - 1);
        for (long i = 0; i < n; ++i) sum += f(a + (2 * i + 1) * h);
        r.emplace_back();
        r[k].push_back(0.5 * r[k - 1][0] + h * sum);
        for (int j = 1; j <= k; ++j) {
            const double factor = std::pow(4.0, j);
            r[k].push_back(r[k][j - 1] + (r[k][j - 1] - r[k - 1][j - 1]) / (factor - 1.0));
        }
        if (k > 3 && std::abs(r[k][k] - r[k - 1][k - 1]) <=
                         rel_tol * std::max(1e-300, std::abs(r[k][k])))
            return r[k][k];
    }
    return r.back().back();
}

// Ei by quadrature of its defining integrals.
inline double ei_quadrature(double x) {
    if (x >= -0.5) {
        // gamma + log|x| + int_0^x (e^t - 1)/t dt; the integrand is entire.
        const auto g = [](double t) { return t == 0.0 ? 1.0 : std::expm1(t) / t; };
        return phl::euler_gamma + std::log(std::abs(x)) + romberg(g, 0.0, x);
    }
    // Ei(x) = -int_{-x}^inf e^-t / t dt, truncated far past all precision.
    const double y = -x;
    const auto g = [](double t) { return std::exp(-t) / t; };
    return -romberg(g, y, y + 60.0);
}

// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
inline std::vector<double> jacobi_eigenvalues(phl::Mat m, int sweeps = 64) {
    const int n = static_cast<int>(m.rows());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(m(p, q)) < 1e-300) continue;
                const double theta = 0.5 * (m(q, q) - m(p, p)) / m(p, q);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double mip = m(i, p), miq = m(i, q);
                    m(i, p) = c * mip - s * miq;
                    m(i, q) = s * mip + c * miq;
                }
                for (int i = 0; i < n; ++i) {
                    const double mpi = m(p, i), mqi = m(q, i);
                    m(p, i) = c * mpi - s * mqi;
                    m(q, i) = s * mpi + c * mqi;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// 5-point first derivative with one Richardson refinement, step scaled by
// the local timescale of f.
inline double fd5_richardson(const std::function<double(double)>& f, double x, double h) {
    const auto stencil = [&](double hh) {
        return (-f(x + 2 * hh) + 8 * f(x + hh) - 8 * f(x - hh) + f(x - 2 * hh)) / (12 * hh);
    };
    const double d1 = stencil(h), d2 = stencil(h / 2);
    return (16.0 * d2 - d1) / 15.0;
}

inline double rel_dev(double value, double reference, double floor = 1e-300) {
    return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

// Max |f'_fd(t) - rhs(t, f(t))| / (1 + |rhs|) of a closed form on a grid,
// stencils kept clear of the f = 1 branch kinks.
inline double closed_form_ode_residual(const phl::OdeProblem& problem,
                                       const phl::ClosedFormSolution& cf,
                                       const std::vector<double>& grid) {
    double worst = 0.0;
    for (double t : grid) {
        const double f = cf.eval_f(t);
        if (!(f > 1e-250)) continue;
        const double r = phl::rhs(problem, t, f);
        double h = 1e-3 * (1.0 + std::abs(t));
        if (std::abs(r) > f) h *= f / std::abs(r);
        if (t - 2.0 * h < 0.0) continue;
        // Branch kink of the log families: skip stencils straddling f = 1.
        const double f_lo = cf.eval_f(t - 2.0 * h);
        const double f_hi = cf.eval_f(t + 2.0 * h);
        if ((f_lo - 1.0) * (f_hi - 1.0) < 0.0) continue;
        const double fd = fd5_richardson([&cf](double s) { return cf.eval_f(s); }, t, h);
        worst = std::max(worst, std::abs(fd - r) / (1.0 + std::abs(r)));
    }
    return worst;
}

struct SweepCase {
    phl::OdeProblem problem;
    double t_max;
    std::string label;
};

// Parameter sweep across the four families: k x nu x A x coupling.
inline std::vector<SweepCase> oracle_sweep_cases() {
    using namespace phl;
    std::vector<SweepCase> cases;
    const std::vector<double> nus{0.2, 1.0, 5.0};
    const std::vector<double> As{0.5, 1.0};
    const std::vector<double> Ks{0.0, 0.1};

    // gamma is chosen so that the effective coupling (K, Ktilde or Khat)
    // equals the requested value.
    const auto add = [&cases](GrowthProfile phi, Ellipticity ell, double nu, double gamma,
                              double t_max, std::string label) {
        OdeProblem p;
        p.phi = std::move(phi);
        p.ell = std::move(ell);
        p.nu = nu;
        p.R = t_max;
        p.variant = p.phi.is_zero() ? OdeVariant::AsWritten : OdeVariant::SeparableMajorant;
        if (gamma > 0.0) p.geom = Geometry::of(1, RealFn::constant(gamma));
        cases.push_back({std::move(p), t_max, std::move(label)});
    };

    for (double nu : nus)
        for (double K : Ks)
            add(GrowthProfile::zero(), Ellipticity::uniform(1.0, 1.0), nu,
                K > 0.0 ? 1.0 / K : 0.0, 10.0, "zero nu=" + phl::print_g17(nu));
    for (double k : {1.0, 1.5, 2.0, 3.0, 10.0})
        for (double nu : nus)
            for (double A : As)
                for (double K : Ks)
                    add(GrowthProfile::power(k, A), Ellipticity::uniform(1.0, 1.0), nu,
                        K > 0.0 ? 1.0 / (K * A) : 0.0, 10.0, "power k=" + phl::print_g17(k));
    for (double nu : nus)
        for (double A : As)
            for (double K : Ks)
                add(GrowthProfile::log_pos(A), Ellipticity::uniform(1.0, 1.0), nu,
                    K > 0.0 ? 1.0 / (K * A) : 0.0, 10.0, "log-pos nu=" + phl::print_g17(nu));
    for (double nu : nus)
        for (double A : As)
            for (double K : Ks) {
                // Lambda = 1/A; the exploding branch is capped where log f
                // stays within double range.
                const double Lam = 1.0 / A;
                double t_max = 10.0;
                if (nu > 1.0) t_max = std::min(10.0, std::log(200.0 / std::log(nu)) / A);
                add(GrowthProfile::log_neg(), Ellipticity::uniform(1.0, Lam), nu,
                    K > 0.0 ? 1.0 / (K * A) : 0.0, t_max, "log-neg nu=" + phl::print_g17(nu));
            }
    return cases;
}

}  // namespace oracles
