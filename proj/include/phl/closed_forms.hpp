#pragma once

#include <functional>
#include <optional>

#include "phl/ode.hpp"

namespace phl {

inline constexpr double euler_gamma = 0.57721566490153286061;

/// Exponential integral Ei(x), Cauchy principal value, x != 0.
double expint_ei(double x);

/// log(Ei(x)) for large positive x, via the asymptotic expansion. Valid for
/// x >= 50; avoids overflow of Ei itself.
double log_expint_ei(double x);

/// Envelope derivative for Phi = C(t) s^k. intA(t) = \int_0^t C/lambda.
double f_power(double t, double k, const std::function<double(double)>& intA, double nu,
               double Ktilde);
double log_f_power(double t, double k, const std::function<double(double)>& intA, double nu,
                   double Ktilde);

/// Envelope derivative for Phi = C(t) s |log s|, branch-switching at f = 1.
double f_logpos(double t, const std::function<double(double)>& intA, double nu, double Ktilde);
double log_f_logpos(double t, const std::function<double(double)>& intA, double nu, double Ktilde);

/// Envelope derivative for Phi = -s |log s|. intLinv(t) = \int_0^t 1/Lambda.
double f_logneg(double t, const std::function<double(double)>& intLinv, double nu, double Khat);
double log_f_logneg(double t, const std::function<double(double)>& intLinv, double nu,
                    double Khat);

/// Closed antiderivatives of the free envelopes (K = 0), constant A.
/// u_power: family C(t) s^k with A = C/lambda constant.
double u_power(double x, double k, double A, double nu);
/// Antiderivative of nu^(exp(A t)) (exponent drift downward).
double u_log_up(double x, double A, double nu);
/// Antiderivative of nu^(exp(-A t)) (exponent drift upward).
double u_log_down(double x, double A, double nu);

/// Antiderivative of the free envelope of the given profile at x, for
/// constant A (power and log-pos) or constant Lambda (log-neg).
/// Throws closed_form_unavailable for custom profiles.
double u_antiderivative(const GrowthProfile& phi, double A, double nu, double x);

/// Everything the catalog knows about one problem instance.
class ClosedFormSolution {
  public:
    /// Returns the catalog entry matching the problem, or nullopt when no
    /// closed form exists (custom profile, or nonconstant coefficients
    /// without precomputed integrals).
    static std::optional<ClosedFormSolution> try_build(const OdeProblem& problem);

    double eval_f(double t) const;
    double log_f(double t) const;

    /// Closed antiderivative \int_0^x f, available only for the free
    /// envelope with constant coefficient; nullopt otherwise.
    std::optional<double> eval_u(double x) const;

    enum class Family { Zero, Power, LogPos, LogNeg };

    double nu() const { return nu_; }
    double coupling() const { return coupling_; }
    double k() const { return k_; }
    Family family() const { return tag_; }
    double integral_at(double t) const { return int_fn_(t); }
    std::optional<double> rate_constant() const { return rate_const_; }

    /// Samples the closed form into a curve on [0, R].
    SolutionCurve sample(double R, int points = 1024) const;

  private:
    using Tag = Family;
    Tag tag_;
    double nu_ = 1.0;
    double k_ = 1.0;
    double coupling_ = 0.0;              // K, Ktilde or Khat
    std::function<double(double)> int_fn_;  // family-specific accumulated integral
    std::optional<double> rate_const_;      // A (power/log-pos), 1/Lambda (log-neg), Lambda/lambda (zero)
};

}  // namespace phl
