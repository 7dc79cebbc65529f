#include "phl/profiles.hpp"

#include <cmath>
#include <vector>

#include "phl/errors.hpp"

namespace phl {

namespace {

double s_abs_log(double s) {
    if (s <= 0.0) return 0.0;
    return s * std::abs(std::log(s));
}

}  // namespace

double GrowthProfile::eval(double t, double s) const {
    if (s == 0.0) return 0.0;
    if (const auto* z = std::get_if<Zero>(&family)) {
        (void)z;
        return 0.0;
    }
    if (const auto* p = std::get_if<PowerK>(&family)) return p->C(t) * std::pow(s, p->k);
    if (const auto* lp = std::get_if<LogPos>(&family)) return lp->C(t) * s_abs_log(s);
    if (std::holds_alternative<LogNeg>(family)) return -s_abs_log(s);
    return std::get<Custom>(family).eval(t, s);
}

std::string GrowthProfile::family_name() const {
    if (is_zero()) return "zero";
    if (is_power()) return "power";
    if (is_log_pos()) return "log-pos";
    if (is_log_neg()) return "log-neg";
    return "custom";
}

GrowthProfile GrowthProfile::zero() { return {Zero{}, Sign::nonnegative}; }

GrowthProfile GrowthProfile::power(double k, double C) { return power(k, RealFn::constant(C)); }

GrowthProfile GrowthProfile::power(double k, RealFn C) {
    if (k < 1.0) throw param_error("power profile requires k >= 1");
    return {PowerK{k, std::move(C)}, Sign::nonnegative};
}

GrowthProfile GrowthProfile::log_pos(double C) { return log_pos(RealFn::constant(C)); }

GrowthProfile GrowthProfile::log_pos(RealFn C) {
    return {LogPos{std::move(C)}, Sign::nonnegative};
}

GrowthProfile GrowthProfile::log_neg() { return {LogNeg{}, Sign::nonpositive}; }

GrowthProfile GrowthProfile::custom(std::function<double(double, double)> eval, Sign sign) {
    return {Custom{std::move(eval)}, sign};
}

Ellipticity Ellipticity::uniform(double lam, double Lam) {
    if (!(0.0 < lam && lam <= Lam)) throw bad_ellipticity("need 0 < lambda <= Lambda");
    return {RealFn::constant(lam), RealFn::constant(Lam)};
}

Ellipticity Ellipticity::of(RealFn lam, RealFn Lam) { return {std::move(lam), std::move(Lam)}; }

Geometry Geometry::of(int n, RealFn gamma) {
    if (n < 1) throw param_error("dimension must be >= 1");
    return {n, std::move(gamma)};
}

Geometry Geometry::proportional(int n, double c) {
    if (c <= 0.0) throw param_error("gamma slope must be positive");
    return of(n, RealFn::of([c](double R) { return c * R; }));
}

OsgoodResult osgood_check(const GrowthProfile& phi, double t, double eps,
                          const OsgoodTolerance& tol) {
    if (eps <= 0.0) throw param_error("osgood_check requires eps > 0");

    const auto integrand = [&](double s) {
        const double v = std::abs(phi.eval(t, s));
        if (!(v > 0.0) || !std::isfinite(v)) throw nonfinite_integrand(s);
        return 1.0 / v;
    };

    // Composite Simpson on one dyadic interval [a, b].
    const auto panel_integral = [&](double a, double b) {
        const int n = tol.panels;  // even
        const double h = (b - a) / n;
        double acc = integrand(a) + integrand(b);
        for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
        return acc * h / 3.0;
    };

    std::vector<double> increments;
    increments.reserve(tol.steps);
    double total = 0.0;
    double upper = eps;
    for (int i = 1; i <= tol.steps; ++i) {
        const double lower = eps * std::ldexp(1.0, -i);
        const double inc = panel_integral(lower, upper);
        increments.push_back(inc);
        total += inc;
        if (total > tol.divergence_total) return OsgoodResult::Holds;
        upper = lower;
    }

    // Geometric mean of increment ratios over the trailing window.
    const int w = std::min<int>(tol.window, static_cast<int>(increments.size()) - 1);
    if (w < 1) return OsgoodResult::Inconclusive;
    double log_ratio_sum = 0.0;
    const std::size_t m = increments.size();
    for (int j = 0; j < w; ++j) {
        const double hi = increments[m - 1 - j];
        const double lo = increments[m - 2 - j];
        if (!(hi > 0.0) || !(lo > 0.0)) return OsgoodResult::Inconclusive;
        log_ratio_sum += std::log(hi / lo);
    }
    const double mean_ratio = std::exp(log_ratio_sum / w);
    if (mean_ratio >= tol.hold_ratio) return OsgoodResult::Holds;
    if (mean_ratio <= tol.fail_ratio) return OsgoodResult::Fails;
    return OsgoodResult::Inconclusive;
}

double pucci_minus(std::span<const double> eigvals, double lam, double Lam) {
    if (!(0.0 < lam && lam <= Lam)) throw bad_ellipticity("need 0 < lambda <= Lambda");
    double acc = 0.0;
    for (double e : eigvals) acc -= (e >= 0.0 ? Lam : lam) * e;
    return acc;
}

double pucci_plus(std::span<const double> eigvals, double lam, double Lam) {
    if (!(0.0 < lam && lam <= Lam)) throw bad_ellipticity("need 0 < lambda <= Lambda");
    double acc = 0.0;
    for (double e : eigvals) acc -= (e >= 0.0 ? lam : Lam) * e;
    return acc;
}

double structure_bound(const GrowthProfile& phi, const Ellipticity& ell, const PointEval& pt) {
    const double xn = pt.x[pt.x.size() - 1];
    return phi.eval(pt.x.norm(), pt.grad.norm()) + ell.Lambda(xn) * pt.hess_plus_trace -
           ell.lambda(xn) * pt.hess_minus_trace;
}

bool check_profile(const GrowthProfile& phi, double t_lo, double t_hi, double s_lo, double s_hi) {
    for (double t : geomspace(std::max(t_lo, 1e-6), t_hi, 9)) {
        if (phi.eval(t, 0.0) != 0.0) return false;
        for (double s : geomspace(std::max(s_lo, 1e-9), s_hi, 33)) {
            const double v = phi.eval(t, s);
            if (phi.sign == GrowthProfile::Sign::nonnegative && v < 0.0) return false;
            if (phi.sign == GrowthProfile::Sign::nonpositive && v > 0.0) return false;
        }
    }
    for (double s : geomspace(std::max(s_lo, 1e-9), s_hi, 9)) {
        const auto slice = [&](double t) { return std::abs(phi.eval(t, s)); };
        if (!sampled_nonincreasing(slice, std::max(t_lo, 1e-6), t_hi)) return false;
    }
    return true;
}

bool check_ellipticity(const Ellipticity& ell, double t_lo, double t_hi) {
    const double lo = std::max(t_lo, 1e-6);
    for (double t : geomspace(lo, t_hi, 65)) {
        if (!(ell.lambda(t) > 0.0) || ell.lambda(t) > ell.Lambda(t)) return false;
    }
    return sampled_nonincreasing([&](double t) { return ell.lambda(t); }, lo, t_hi) &&
           sampled_nondecreasing([&](double t) { return ell.Lambda(t); }, lo, t_hi) &&
           sampled_nonincreasing([&](double t) { return ell.lambda(t) / ell.Lambda(t); }, lo, t_hi);
}

}  // namespace phl
