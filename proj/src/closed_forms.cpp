#include "phl/closed_forms.hpp"

#include <cmath>
#include <limits>

#include "phl/errors.hpp"

namespace phl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Power series around 0: Ei(x) = gamma + log|x| + sum x^n / (n * n!).
// Safe for x in [-1, 40]; positive terms cause no cancellation for x > 0.
double ei_series(double x) {
    double sum = 0.0;
    double term = 1.0;
    for (int n = 1; n < 400; ++n) {
        term *= x / n;
        const double add = term / n;
        sum += add;
        if (std::abs(add) < kEps * std::abs(sum)) break;
    }
    return euler_gamma + std::log(std::abs(x)) + sum;
}

// Asymptotic expansion Ei(x) ~ e^x/x * sum n!/x^n for large |x|; truncated
// at the smallest term.
double ei_asymptotic_factor(double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int n = 1; n < 200; ++n) {
        const double next = term * n / x;
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < kEps * std::abs(sum)) break;
    }
    return sum;
}

// E1(y) for y > 1 by the standard continued fraction (modified Lentz).
double e1_continued_fraction(double y) {
    const double tiny = 1e-300;
    double b = y + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 300; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return h * std::exp(-y);
}

}  // namespace

double expint_ei(double x) {
    if (x == 0.0) throw pole_at_zero{};
    if (x < 0.0) {
        const double y = -x;
        if (y <= 1.0) return ei_series(x);
        return -e1_continued_fraction(y);
    }
    if (x <= 40.0) return ei_series(x);
    return std::exp(x) / x * ei_asymptotic_factor(x);
}

double log_expint_ei(double x) {
    if (x < 50.0) return std::log(expint_ei(x));
    return x - std::log(x) + std::log(ei_asymptotic_factor(x));
}

double log_f_power(double t, double k, const std::function<double(double)>& intA, double nu,
                   double Ktilde) {
    if (k < 1.0) throw param_error("f_power requires k >= 1");
    if (!(nu > 0.0)) throw param_error("f_power requires nu > 0");
    if (Ktilde < 0.0) throw param_error("f_power requires Ktilde >= 0");
    const double I = intA(t);
    if (k == 1.0) return std::log(nu) - (1.0 + Ktilde) * I;
    // The Ktilde > 0 formula has a removable 0/0 as Ktilde -> 0.
    if (Ktilde < 1e-12) return std::log((k - 1.0) * I + std::pow(nu, 1.0 - k)) / (1.0 - k);
    const double E = (k - 1.0) * Ktilde * I;
    const double a = Ktilde * std::pow(nu, 1.0 - k);
    double log_inner;
    if (E > 700.0) {
        log_inner = E + std::log1p(a);
    } else {
        log_inner = std::log(std::expm1(E) * (a + 1.0) + a);
    }
    return std::log(Ktilde) / (k - 1.0) + log_inner / (1.0 - k);
}

double f_power(double t, double k, const std::function<double(double)>& intA, double nu,
               double Ktilde) {
    return std::exp(log_f_power(t, k, intA, nu, Ktilde));
}

double log_f_logpos(double t, const std::function<double(double)>& intA, double nu,
                    double Ktilde) {
    if (!(nu > 0.0)) throw param_error("f_logpos requires nu > 0");
    if (Ktilde < 0.0) throw param_error("f_logpos requires Ktilde >= 0");
    const double I = intA(t);
    const double log_nu = std::log(nu);
    if (nu <= 1.0) return Ktilde + std::exp(I) * (log_nu - Ktilde);
    if (Ktilde == 0.0) return std::exp(-I) * log_nu;
    // Decreasing from nu > 1: above 1 until exp(-I) = Ktilde/(Ktilde+log nu),
    // after which the level-1 branch restarts.
    const double I_cross = std::log1p(log_nu / Ktilde);
    if (I < I_cross) return -Ktilde + std::exp(-I) * (Ktilde + log_nu);
    return Ktilde * (1.0 - std::exp(I - I_cross));
}

double f_logpos(double t, const std::function<double(double)>& intA, double nu, double Ktilde) {
    return std::exp(log_f_logpos(t, intA, nu, Ktilde));
}

double log_f_logneg(double t, const std::function<double(double)>& intLinv, double nu,
                    double Khat) {
    if (!(nu > 0.0)) throw param_error("f_logneg requires nu > 0");
    if (Khat < 0.0) throw param_error("f_logneg requires Khat >= 0");
    const double J = intLinv(t);
    const double log_nu = std::log(nu);
    if (nu <= 1.0) return -Khat + std::exp(-J) * (Khat + log_nu);
    // Stays above 1 iff (log nu - Khat) e^J > -Khat for all J, i.e. log nu >= Khat.
    if (log_nu >= Khat) return Khat + std::exp(J) * (log_nu - Khat);
    const double J_cross = std::log(Khat / (Khat - log_nu));
    if (J < J_cross) return Khat + std::exp(J) * (log_nu - Khat);
    return -Khat * (1.0 - std::exp(-(J - J_cross)));
}

double f_logneg(double t, const std::function<double(double)>& intLinv, double nu, double Khat) {
    return std::exp(log_f_logneg(t, intLinv, nu, Khat));
}

double u_power(double x, double k, double A, double nu) {
    if (k < 1.0 || !(nu > 0.0) || !(A > 0.0)) throw param_error("u_power parameter out of range");
    if (x == 0.0) return 0.0;
    if (k == 1.0) return nu * (-std::expm1(-A * x)) / A;
    if (std::abs(k - 2.0) < 1e-12) return std::log1p(A * x * nu) / A;
    const double q = (2.0 - k) / (1.0 - k);
    const double w = (k - 1.0) * A * x * std::pow(nu, k - 1.0);
    return -std::pow(nu, 2.0 - k) / (2.0 - k) * std::expm1(q * std::log1p(w)) / A;
}

namespace {

// Ei(y) with the small-argument asymptote gamma + log|y| substituted once
// |y| underflows the series range.
double ei_or_log(double y) {
    if (std::abs(y) < 1e-280) return euler_gamma + std::log(std::abs(y));
    return expint_ei(y);
}

}  // namespace

double u_log_up(double x, double A, double nu) {
    if (!(nu > 0.0) || !(A > 0.0)) throw param_error("u_log_up parameter out of range");
    if (x == 0.0) return 0.0;
    if (nu == 1.0) return x;
    const double L = std::log(nu);
    return (expint_ei(std::exp(A * x) * L) - expint_ei(L)) / A;
}

double u_log_down(double x, double A, double nu) {
    if (!(nu > 0.0) || !(A > 0.0)) throw param_error("u_log_down parameter out of range");
    if (x == 0.0) return 0.0;
    if (nu == 1.0) return x;
    const double L = std::log(nu);
    return (expint_ei(L) - ei_or_log(std::exp(-A * x) * L)) / A;
}

double u_antiderivative(const GrowthProfile& phi, double A, double nu, double x) {
    if (phi.is_zero()) return nu * x;
    if (const auto* p = phi.as_power()) return u_power(x, p->k, A, nu);
    if (phi.is_log_pos()) return nu <= 1.0 ? u_log_up(x, A, nu) : u_log_down(x, A, nu);
    if (phi.is_log_neg()) return nu <= 1.0 ? u_log_down(x, A, nu) : u_log_up(x, A, nu);
    throw closed_form_unavailable("no antiderivative catalog entry for custom profiles");
}

std::optional<ClosedFormSolution> ClosedFormSolution::try_build(const OdeProblem& problem) {
    ClosedFormSolution cf;
    cf.nu_ = problem.nu;
    const auto& ell = problem.ell;
    const bool ell_const = ell.lambda.is_constant() && ell.Lambda.is_constant();

    const auto linear_fn = [](double slope) {
        return std::function<double(double)>([slope](double t) { return slope * t; });
    };

    if (problem.phi.is_zero()) {
        cf.tag_ = Tag::Zero;
        cf.coupling_ = problem.K();
        if (ell_const) {
            const double r = *ell.Lambda.const_value / *ell.lambda.const_value;
            cf.int_fn_ = linear_fn(r);
            cf.rate_const_ = r;
        } else if (problem.int_Lambda_over_lam) {
            cf.int_fn_ = [fn = *problem.int_Lambda_over_lam](double t) { return fn(t); };
        } else {
            return std::nullopt;
        }
        return cf;
    }

    if (problem.phi.is_power() || problem.phi.is_log_pos()) {
        const RealFn& C = problem.phi.is_power() ? problem.phi.as_power()->C
                                                 : problem.phi.as_log_pos()->C;
        const bool A_const = C.is_constant() && ell.lambda.is_constant();
        // As written, the equation coincides with the separable replacement
        // only when every coefficient is constant.
        if (problem.variant == OdeVariant::AsWritten && !(A_const && ell.Lambda.is_constant()))
            return std::nullopt;
        if (A_const) {
            const double a = *C.const_value / *ell.lambda.const_value;
            cf.int_fn_ = linear_fn(a);
            cf.rate_const_ = a;
        } else if (problem.int_A) {
            cf.int_fn_ = [fn = *problem.int_A](double t) { return fn(t); };
        } else {
            return std::nullopt;
        }
        cf.coupling_ = problem.Ktilde();
        if (problem.phi.is_power()) {
            cf.tag_ = Tag::Power;
            cf.k_ = problem.phi.as_power()->k;
        } else {
            cf.tag_ = Tag::LogPos;
        }
        return cf;
    }

    if (problem.phi.is_log_neg()) {
        cf.tag_ = Tag::LogNeg;
        if (problem.variant == OdeVariant::AsWritten && !ell_const) return std::nullopt;
        if (ell.Lambda.is_constant()) {
            const double linv = 1.0 / *ell.Lambda.const_value;
            cf.int_fn_ = linear_fn(linv);
            cf.rate_const_ = linv;
        } else if (problem.int_Lambda_inv) {
            cf.int_fn_ = [fn = *problem.int_Lambda_inv](double t) { return fn(t); };
        } else {
            return std::nullopt;
        }
        cf.coupling_ = problem.variant == OdeVariant::AsWritten
                           ? problem.K() * ell.Lambda(problem.R) * ell.Lambda(problem.R) /
                                 ell.lambda(problem.R)
                           : problem.Khat();
        return cf;
    }

    return std::nullopt;
}

double ClosedFormSolution::log_f(double t) const {
    switch (tag_) {
        case Tag::Zero:
            return std::log(nu_) - coupling_ * int_fn_(t);
        case Tag::Power:
            return log_f_power(t, k_, int_fn_, nu_, coupling_);
        case Tag::LogPos:
            return log_f_logpos(t, int_fn_, nu_, coupling_);
        case Tag::LogNeg:
            return log_f_logneg(t, int_fn_, nu_, coupling_);
    }
    return 0.0;
}

double ClosedFormSolution::eval_f(double t) const {
    if (tag_ == Tag::Zero && nu_ == 0.0) return 0.0;
    return std::exp(log_f(t));
}

std::optional<double> ClosedFormSolution::eval_u(double x) const {
    if (coupling_ != 0.0 || !rate_const_) return std::nullopt;
    const double a = *rate_const_;
    switch (tag_) {
        case Tag::Zero:
            return nu_ * x;
        case Tag::Power:
            return u_power(x, k_, a, nu_);
        case Tag::LogPos:
            return nu_ <= 1.0 ? u_log_up(x, a, nu_) : u_log_down(x, a, nu_);
        case Tag::LogNeg:
            return nu_ <= 1.0 ? u_log_down(x, a, nu_) : u_log_up(x, a, nu_);
    }
    return std::nullopt;
}

SolutionCurve ClosedFormSolution::sample(double R, int points) const {
    std::vector<double> grid = linspace(0.0, R, points);
    const double h = 1e-6 * std::max(1.0, R / points);
    const auto f = [this](double t) { return eval_f(t); };
    const auto fp = [&](double t) {
        const double lo = std::max(0.0, t - h);
        const double hi = std::min(R, t + h);
        return (eval_f(hi) - eval_f(lo)) / (hi - lo);
    };
    return SolutionCurve::from_function(f, fp, grid, nu_, coupling_);
}

}  // namespace phl
