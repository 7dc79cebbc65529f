#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phl/profiles.hpp"

namespace phl {

/// Which right side to integrate: the inequality bound as written, or the
/// separable replacement that exists for the power / log families.
enum class OdeVariant { AsWritten, SeparableMajorant };

/// Coupling constant for the log-neg replacement equation.
enum class KhatChoice {
    SharpNLambdaOverGamma,       // n * Lambda(R) / gamma(R)
    ConservativeLambdaSqOverLam  // K * Lambda(R)^2 / lambda(R)
};

/// Initial value problem for the envelope derivative f on [0, R].
/// geom absent means K = 0 (the free envelope f_nu).
struct OdeProblem {
    GrowthProfile phi;
    Ellipticity ell;
    std::optional<Geometry> geom;
    double nu = 1.0;
    double R = 1.0;
    OdeVariant variant = OdeVariant::AsWritten;
    KhatChoice khat_choice = KhatChoice::SharpNLambdaOverGamma;
    std::optional<double> K_override;

    // Optional precomputed integrals; enable closed forms when the
    // coefficients are not constant.
    std::optional<RealFn> int_A;                 // t -> \int_0^t C/lambda
    std::optional<RealFn> int_Lambda_inv;        // t -> \int_0^t 1/Lambda
    std::optional<RealFn> int_Lambda_over_lam;   // t -> \int_0^t Lambda/lambda

    double K() const;        // n / gamma(R), 0 without geometry
    double Ktilde() const;   // K * Lambda(R) / C(R)
    double Khat() const;     // per khat_choice
    double A(double t) const { return phi_C(t) / ell.lambda(t); }
    double phi_C(double t) const;

    void validate() const;
};

enum class CurveMethod { Numeric, ClosedForm };

/// Sampled trajectory of f with stored derivatives for C1 interpolation.
struct SolutionCurve {
    std::vector<double> t_grid;
    std::vector<double> f_values;
    std::vector<double> f_derivs;
    double nu = 0.0;
    double K_used = 0.0;
    CurveMethod method = CurveMethod::Numeric;
    bool degenerate = false;              // log floor was needed
    std::vector<double> unit_crossings;   // times where f crossed 1

    double t_max() const { return t_grid.empty() ? 0.0 : t_grid.back(); }

    /// Cubic Hermite interpolation of f at t.
    double eval(double t) const;
    /// Interpolated derivative at t.
    double eval_deriv(double t) const;

    std::string to_csv() const;
    static SolutionCurve from_csv(const std::string& text);

    /// Builds a curve by sampling an analytic f and f' on a grid.
    static SolutionCurve from_function(const std::function<double(double)>& f,
                                       const std::function<double(double)>& fprime,
                                       const std::vector<double>& grid, double nu, double K,
                                       CurveMethod method = CurveMethod::ClosedForm);
};

/// Adaptive step control for the embedded Runge-Kutta pair.
struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = 0.02;
    double initial_step = 0.0;  // 0 = automatic
    int max_rejects = 60;
};

/// Right side of the envelope ODE at (t, f).
double rhs(const OdeProblem& problem, double t, double f);

/// Integrates the problem over [0, R] with a Dormand-Prince 5(4) pair,
/// detecting crossings of f = 1 and clamping the absorbing state f = 0.
SolutionCurve solve(const OdeProblem& problem, const StepControl& control = {});

/// \int_0^upto f dt by piecewise cubic Hermite quadrature of the curve.
double integral_of(const SolutionCurve& curve, double upto);

}  // namespace phl
