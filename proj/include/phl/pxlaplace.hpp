#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "phl/numerics.hpp"
#include "phl/profiles.hpp"

namespace phl {

/// Variable exponent p(x) with its gradient and the derived structure
/// functions. Bounds may be supplied analytically; otherwise they fall back
/// to sampled extremization over a truncated region (heuristic, flagged).
class Exponent {
  public:
    enum class NormVariant { RadiusAtLeast, Slice };

    std::function<double(const Vec&)> p;
    std::function<Vec(const Vec&)> Dp;
    int ambient_dim = 1;
    NormVariant variant = NormVariant::RadiusAtLeast;
    double truncation_radius = 1e3;

    std::optional<RealFn> p_lambda_bound;
    std::optional<RealFn> p_Lambda_bound;
    std::optional<RealFn> norm_tail_bound;

    /// inf over {y_n <= t} of min(1, p(y) - 1).
    double p_lambda(double t) const;
    /// sup over {y_n <= t} of max(1, p(y) - 1).
    double p_Lambda(double t) const;
    /// sup |Dp| over {|y| >= t} or the slice {y_n = t}, per variant.
    double norm_tail(double t) const;

    bool used_sampled_fallback() const;

    static Exponent one_dim(std::function<double(double)> p, std::function<double(double)> dp);

  private:
    double sampled_extremum(double t, bool lambda_side) const;
    double sampled_norm_tail(double t) const;

    struct Cache {
        std::mutex mutex;
        std::map<double, double> p_lambda, p_Lambda, norm_tail;
        bool sampled = false;
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Delta_{p(x)} u = tr(hess) + (p(x)-2) Delta_inf + log|grad| <Dp, grad>.
double px_operator(const Exponent& expo, const Vec& x, const Vec& grad, const Mat& hess);

/// Lambda(x) Tr(hess+) - lambda(x) Tr(hess-) + |Dp||grad||log|grad||
/// with lambda = min(1, p-1), Lambda = max(1, p-1). Dominates px_operator.
double viscosity_majorant(const Exponent& expo, const Vec& x, const Vec& grad, const Mat& hess);

/// Scalar field with optional analytic gradient (finite differences otherwise).
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::optional<std::function<Vec(const Vec&)>> grad;

    Vec gradient(const Vec& x) const;
};

/// One-dimensional solution pairs (u, p) of the exponent equation.
enum class Solution1D { LogPosCheck, LogNegCheck, Sista1, Sista2 };

struct Params1D {
    double nu = 0.5;
    double M = 0.5;   // exponent amplitude, p = 1 + M exp(-/+ A x)
    double A = 1.0;   // drift rate; 1/Lambda for the log-neg pairing
};

struct ResidualReport {
    std::string family;
    Params1D params;
    double max_residual = 0.0;
    double grid_lo = 0.0, grid_hi = 0.0;
    int grid_points = 0;
    std::optional<double> lambda_equality_error;
    bool pass = false;

    std::string to_json() const;
};

/// Evaluates the one-dimensional residual (p-1) u'' + log|u'| p' u' of the
/// paired closed forms on a grid, derivatives taken by Richardson-refined
/// 5-point stencils of the Ei-based antiderivative.
ResidualReport verify_1d_solution(Solution1D family, const Params1D& params,
                                  const std::vector<double>& grid, double residual_tol = 1e-7,
                                  double equality_tol = 1e-10);

/// Closed-form derivative of the paired 1D solution (nu^(exp(+-A x))).
double solution_1d_derivative(Solution1D family, const Params1D& params, double x);
/// The paired exponent p(x) and its derivative.
double solution_1d_exponent(Solution1D family, const Params1D& params, double x);
double solution_1d_exponent_deriv(Solution1D family, const Params1D& params, double x);
/// Closed-form antiderivative (the solution itself).
double solution_1d_value(Solution1D family, const Params1D& params, double x);

/// Pointwise gate of the angle hypotheses: |Dp||cos theta| > 0 and
/// cos(theta) log|Du| <= 0.
struct GateResult {
    bool applicable = false;
    double theta = 0.0;
    double log_grad_norm = 0.0;
    std::string reason;
};

GateResult cor34_gate(const Exponent& expo, const ScalarField& u_field, const Vec& x);

/// The linear sharpness family: u = c x_n with p(x) = M0 + sum_i M_i x_i^2.
Exponent sharp_exponent(int n, double M0, const std::vector<double>& Ms);

/// 4th-order finite-difference divergence of |Du|^(p-2) Du at x, Richardson
/// refined; grad_fn supplies the analytic gradient of u.
double divergence_form_residual(const Exponent& expo,
                                const std::function<Vec(const Vec&)>& grad_fn, const Vec& x,
                                double h = 1e-3);

}  // namespace phl
