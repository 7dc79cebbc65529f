#include "phl/pxlaplace.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "phl/closed_forms.hpp"
#include "phl/errors.hpp"

namespace phl {

double Exponent::p_lambda(double t) const {
    if (p_lambda_bound) return (*p_lambda_bound)(t);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->p_lambda.find(t);
    if (it != cache_->p_lambda.end()) return it->second;
    const double v = sampled_extremum(t, true);
    cache_->p_lambda[t] = v;
    return v;
}

double Exponent::p_Lambda(double t) const {
    if (p_Lambda_bound) return (*p_Lambda_bound)(t);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->p_Lambda.find(t);
    if (it != cache_->p_Lambda.end()) return it->second;
    const double v = sampled_extremum(t, false);
    cache_->p_Lambda[t] = v;
    return v;
}

double Exponent::norm_tail(double t) const {
    if (norm_tail_bound) return (*norm_tail_bound)(t);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->norm_tail.find(t);
    if (it != cache_->norm_tail.end()) return it->second;
    const double v = sampled_norm_tail(t);
    cache_->norm_tail[t] = v;
    return v;
}

bool Exponent::used_sampled_fallback() const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->sampled;
}

double Exponent::sampled_extremum(double t, bool lambda_side) const {
    cache_->sampled = true;
    const int n = ambient_dim;
    const double r = truncation_radius;
    double best = lambda_side ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
    constexpr std::size_t samples = 4096;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec h = halton_point(i, n);
        Vec y(n);
        for (int d = 0; d + 1 < n; ++d) y[d] = (2.0 * h[d] - 1.0) * r;
        y[n - 1] = h[n - 1] * t;  // slab 0 < y_n <= t
        const double clipped = lambda_side ? std::min(1.0, p(y) - 1.0)
                                           : std::max(1.0, p(y) - 1.0);
        best = lambda_side ? std::min(best, clipped) : std::max(best, clipped);
    }
    return best;
}

double Exponent::sampled_norm_tail(double t) const {
    cache_->sampled = true;
    const int n = ambient_dim;
    const double r = truncation_radius;
    double best = 0.0;
    constexpr std::size_t samples = 4096;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec h = halton_point(i, n);
        Vec y(n);
        if (variant == NormVariant::Slice) {
            for (int d = 0; d + 1 < n; ++d) y[d] = (2.0 * h[d] - 1.0) * r;
            y[n - 1] = t;
        } else {
            for (int d = 0; d + 1 < n; ++d) y[d] = (2.0 * h[d] - 1.0) * r;
            y[n - 1] = h[n - 1] * r;
            if (y.norm() < t) continue;
        }
        best = std::max(best, Dp(y).norm());
    }
    return best;
}

Exponent Exponent::one_dim(std::function<double(double)> p, std::function<double(double)> dp) {
    Exponent e;
    e.ambient_dim = 1;
    e.p = [p](const Vec& x) { return p(x[0]); };
    e.Dp = [dp](const Vec& x) {
        Vec g(1);
        g[0] = dp(x[0]);
        return g;
    };
    return e;
}

double px_operator(const Exponent& expo, const Vec& x, const Vec& grad, const Mat& hess) {
    const double g = grad.norm();
    if (g == 0.0) throw zero_gradient{};
    const Vec unit = grad / g;
    const double delta_inf = unit.dot(hess * unit);
    return hess.trace() + (expo.p(x) - 2.0) * delta_inf + std::log(g) * expo.Dp(x).dot(grad);
}

double viscosity_majorant(const Exponent& expo, const Vec& x, const Vec& grad, const Mat& hess) {
    const double g = grad.norm();
    if (g == 0.0) throw zero_gradient{};
    const double pv = expo.p(x);
    const double lam = std::min(1.0, pv - 1.0);
    const double Lam = std::max(1.0, pv - 1.0);
    const auto [tp, tm] = trace_split_psd(hess);
    return Lam * tp - lam * tm + expo.Dp(x).norm() * g * std::abs(std::log(g));
}

Vec ScalarField::gradient(const Vec& x) const {
    if (grad) return (*grad)(x);
    const int n = static_cast<int>(x.size());
    Vec g(n);
    for (int i = 0; i < n; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (value(xp) - value(xm)) / (2.0 * h);
    }
    return g;
}

namespace {

// up: u' = nu^(exp(A x)) paired with p = 1 + M exp(-A x).
// down: u' = nu^(exp(-A x)) paired with p = 1 + M exp(A x).
bool is_up_shape(Solution1D family, double nu) {
    switch (family) {
        case Solution1D::LogPosCheck: return nu <= 1.0;
        case Solution1D::LogNegCheck: return nu > 1.0;
        case Solution1D::Sista1: return true;
        case Solution1D::Sista2: return false;
    }
    return true;
}

const char* family_name(Solution1D family) {
    switch (family) {
        case Solution1D::LogPosCheck: return "log-pos";
        case Solution1D::LogNegCheck: return "log-neg";
        case Solution1D::Sista1: return "sista1";
        case Solution1D::Sista2: return "sista2";
    }
    return "?";
}

void check_params(const Params1D& p) {
    if (!(p.nu > 0.0)) throw param_error("1D solution needs nu > 0");
    if (!(p.M > 0.0)) throw param_error("1D solution needs M > 0");
    if (!(p.A > 0.0)) throw param_error("1D solution needs A > 0");
}

// Richardson-refined 5-point first and second derivatives.
double fd_deriv1(const std::function<double(double)>& f, double x, double h) {
    const auto stencil = [&](double hh) {
        return (-f(x + 2 * hh) + 8 * f(x + hh) - 8 * f(x - hh) + f(x - 2 * hh)) / (12 * hh);
    };
    const double d1 = stencil(h), d2 = stencil(h / 2);
    return (16.0 * d2 - d1) / 15.0;
}

double fd_deriv2(const std::function<double(double)>& f, double x, double h) {
    const auto stencil = [&](double hh) {
        return (-f(x + 2 * hh) + 16 * f(x + hh) - 30 * f(x) + 16 * f(x - hh) - f(x - 2 * hh)) /
               (12 * hh * hh);
    };
    const double d1 = stencil(h), d2 = stencil(h / 2);
    return (16.0 * d2 - d1) / 15.0;
}

}  // namespace

double solution_1d_derivative(Solution1D family, const Params1D& params, double x) {
    check_params(params);
    const double drift = is_up_shape(family, params.nu) ? params.A * x : -params.A * x;
    return std::pow(params.nu, std::exp(drift));
}

double solution_1d_exponent(Solution1D family, const Params1D& params, double x) {
    check_params(params);
    const double drift = is_up_shape(family, params.nu) ? -params.A * x : params.A * x;
    return 1.0 + params.M * std::exp(drift);
}

double solution_1d_exponent_deriv(Solution1D family, const Params1D& params, double x) {
    const bool up = is_up_shape(family, params.nu);
    return (up ? -params.A : params.A) * (solution_1d_exponent(family, params, x) - 1.0);
}

double solution_1d_value(Solution1D family, const Params1D& params, double x) {
    check_params(params);
    if (params.nu == 1.0) return x;
    return is_up_shape(family, params.nu) ? u_log_up(x, params.A, params.nu)
                                          : u_log_down(x, params.A, params.nu);
}

ResidualReport verify_1d_solution(Solution1D family, const Params1D& params,
                                  const std::vector<double>& grid, double residual_tol,
                                  double equality_tol) {
    check_params(params);
    ResidualReport report;
    report.family = family_name(family);
    report.params = params;
    report.grid_points = static_cast<int>(grid.size());
    if (!grid.empty()) {
        report.grid_lo = grid.front();
        report.grid_hi = grid.back();
    }

    const auto u = [&](double x) { return solution_1d_value(family, params, x); };
    double max_res = 0.0;
    for (double x : grid) {
        const double h = 1e-4 * (1.0 + std::abs(x));
        const double du = fd_deriv1(u, x, h);
        const double d2u = fd_deriv2(u, x, h);
        const double pv = solution_1d_exponent(family, params, x);
        const double dp = solution_1d_exponent_deriv(family, params, x);
        if (!(du > 0.0)) continue;  // derivative underflowed; residual is 0 there
        const double res = (pv - 1.0) * d2u + std::log(du) * dp * du;
        max_res = std::max(max_res, std::abs(res));
    }
    report.max_residual = max_res;
    report.pass = max_res <= residual_tol;

    // The lambda-bound equality of the decreasing-exponent pairing:
    // min(1, p-1) / |p'| == 1/A, which needs p - 1 <= 1 everywhere.
    if (family == Solution1D::LogPosCheck && params.nu <= 1.0) {
        if (!(params.M > 0.0 && params.M <= 1.0))
            throw param_error("lambda equality check needs M in (0, 1]");
        double worst = 0.0;
        for (double x : grid) {
            const double pv = solution_1d_exponent(family, params, x);
            const double dp = solution_1d_exponent_deriv(family, params, x);
            const double ratio = std::min(1.0, pv - 1.0) / std::abs(dp);
            worst = std::max(worst, std::abs(ratio - 1.0 / params.A));
        }
        report.lambda_equality_error = worst;
        report.pass = report.pass && worst <= equality_tol;
    }
    return report;
}

GateResult cor34_gate(const Exponent& expo, const ScalarField& u_field, const Vec& x) {
    const Vec du = u_field.gradient(x);
    const double g = du.norm();
    if (g == 0.0) throw zero_gradient{};
    const Vec dp = expo.Dp(x);
    const double dpn = dp.norm();
    if (dpn == 0.0) throw zero_exponent_gradient{};

    GateResult result;
    const double cos_theta = std::clamp(dp.dot(du) / (dpn * g), -1.0, 1.0);
    result.theta = std::acos(cos_theta);
    result.log_grad_norm = std::log(g);
    if (std::abs(cos_theta) == 0.0) {
        result.reason = "Dp is perpendicular to Du";
        return result;
    }
    if (cos_theta * result.log_grad_norm > 0.0) {
        result.reason = "cos(theta) log|Du| is positive";
        return result;
    }
    result.applicable = true;
    return result;
}

Exponent sharp_exponent(int n, double M0, const std::vector<double>& Ms) {
    if (!(M0 > 1.0)) throw param_error("sharp exponent needs M0 > 1");
    if (static_cast<int>(Ms.size()) != n - 1)
        throw param_error("sharp exponent needs n-1 curvature coefficients");
    Exponent e;
    e.ambient_dim = n;
    e.p = [M0, Ms, n](const Vec& x) {
        double acc = M0;
        for (int i = 0; i + 1 < n; ++i) acc += Ms[i] * x[i] * x[i];
        return acc;
    };
    e.Dp = [Ms, n](const Vec& x) {
        Vec g = Vec::Zero(n);
        for (int i = 0; i + 1 < n; ++i) g[i] = 2.0 * Ms[i] * x[i];
        return g;
    };
    return e;
}

double divergence_form_residual(const Exponent& expo,
                                const std::function<Vec(const Vec&)>& grad_fn, const Vec& x,
                                double h) {
    const auto flux = [&](const Vec& y) -> Vec {
        const Vec g = grad_fn(y);
        const double gn = g.norm();
        if (gn == 0.0) throw zero_gradient{};
        return std::pow(gn, expo.p(y) - 2.0) * g;
    };
    const int n = static_cast<int>(x.size());
    const auto divergence = [&](double hh) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            Vec e = Vec::Zero(n);
            e[j] = 1.0;
            acc += (-flux(x + 2 * hh * e)[j] + 8.0 * flux(x + hh * e)[j] -
                    8.0 * flux(x - hh * e)[j] + flux(x - 2 * hh * e)[j]) /
                   (12.0 * hh);
        }
        return acc;
    };
    const double d1 = divergence(h), d2 = divergence(h / 2);
    return (16.0 * d2 - d1) / 15.0;
}

std::string ResidualReport::to_json() const {
    nlohmann::ordered_json j;
    j["family"] = family;
    j["params"] = {{"nu", params.nu}, {"M", params.M}, {"A", params.A}};
    j["max_residual"] = max_residual;
    j["grid"] = {{"lo", grid_lo}, {"hi", grid_hi}, {"points", grid_points}};
    if (lambda_equality_error) j["lambda_equality_error"] = *lambda_equality_error;
    j["pass"] = pass;
    return j.dump(2);
}

}  // namespace phl
