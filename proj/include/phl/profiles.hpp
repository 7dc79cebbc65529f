#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "phl/numerics.hpp"

namespace phl {

/// The gradient nonlinearity Phi(t, s). Canonical families carry the data
/// needed by the closed-form catalog; Custom profiles only evaluate.
struct GrowthProfile {
    enum class Sign { nonnegative, nonpositive };

    struct Zero {};
    struct PowerK {
        double k;    // exponent, >= 1
        RealFn C;    // nonnegative, nonincreasing prefactor
    };
    struct LogPos {
        RealFn C;    // Phi = C(t) s |log s|
    };
    struct LogNeg {};  // Phi = -s |log s|
    struct Custom {
        std::function<double(double, double)> eval;
    };

    using Family = std::variant<Zero, PowerK, LogPos, LogNeg, Custom>;

    Family family;
    Sign sign = Sign::nonnegative;

    double eval(double t, double s) const;
    std::string family_name() const;

    bool is_zero() const { return std::holds_alternative<Zero>(family); }
    bool is_power() const { return std::holds_alternative<PowerK>(family); }
    bool is_log_pos() const { return std::holds_alternative<LogPos>(family); }
    bool is_log_neg() const { return std::holds_alternative<LogNeg>(family); }
    bool is_custom() const { return std::holds_alternative<Custom>(family); }

    const PowerK* as_power() const { return std::get_if<PowerK>(&family); }
    const LogPos* as_log_pos() const { return std::get_if<LogPos>(&family); }

    static GrowthProfile zero();
    static GrowthProfile power(double k, double C = 1.0);
    static GrowthProfile power(double k, RealFn C);
    static GrowthProfile log_pos(double C = 1.0);
    static GrowthProfile log_pos(RealFn C);
    static GrowthProfile log_neg();
    static GrowthProfile custom(std::function<double(double, double)> eval, Sign sign);
};

/// Ellipticity pair: lambda nonincreasing, Lambda nondecreasing, both > 0.
struct Ellipticity {
    RealFn lambda;
    RealFn Lambda;

    static Ellipticity uniform(double lam, double Lam);
    static Ellipticity of(RealFn lam, RealFn Lam);
};

/// Halfspace dimension plus the gamma(R) shift of the spherical segment.
struct Geometry {
    int n = 1;
    RealFn gamma;  // > 0, nondecreasing

    double K(double R) const { return static_cast<double>(n) / gamma(R); }

    static Geometry of(int n, RealFn gamma);
    static Geometry proportional(int n, double c);  // gamma(R) = c * R
};

/// Pointwise data of a candidate operator test: position, value, gradient
/// and the trace split of the Hessian.
struct PointEval {
    Vec x;
    double u = 0.0;
    Vec grad;
    double hess_plus_trace = 0.0;
    double hess_minus_trace = 0.0;
};

enum class OsgoodResult { Holds, Fails, Inconclusive };

/// Decision procedure for the divergence heuristic: dyadic refinement
/// delta_i = eps * 2^-i, geometric-mean ratio of increments over a trailing
/// window, plus a hard divergence cutoff on the running total.
struct OsgoodTolerance {
    int steps = 64;
    int window = 16;
    double hold_ratio = 0.972;   // ratios above this look non-geometric (divergent)
    double fail_ratio = 0.958;   // ratios below this decay geometrically (convergent)
    double divergence_total = 1e6;
    int panels = 32;             // Simpson panels per dyadic interval
};

/// Heuristic certificate for divergence of \int_0^eps ds / |Phi(t, s)|.
OsgoodResult osgood_check(const GrowthProfile& phi, double t, double eps,
                          const OsgoodTolerance& tol = {});

/// Pucci minimal operator applied to a spectrum: -Lam * sum(e_i >= 0) - lam * sum(e_i < 0).
double pucci_minus(std::span<const double> eigvals, double lam, double Lam);
double pucci_plus(std::span<const double> eigvals, double lam, double Lam);

/// Right side of the structure growth bound at a point:
/// Phi(|x|, |grad|) + Lambda(x_n) Tr+ - lambda(x_n) Tr-.
double structure_bound(const GrowthProfile& phi, const Ellipticity& ell, const PointEval& pt);

/// Sampled validation of the profile invariants (eval(t,0)=0, sign,
/// monotonicity in t) over [t_lo, t_hi] x [s_lo, s_hi].
bool check_profile(const GrowthProfile& phi, double t_lo, double t_hi, double s_lo, double s_hi);
bool check_ellipticity(const Ellipticity& ell, double t_lo, double t_hi);

}  // namespace phl
