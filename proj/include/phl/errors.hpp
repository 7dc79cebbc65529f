#pragma once

#include <stdexcept>
#include <string>

namespace phl {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct bad_ellipticity : error {
    using error::error;
};

// Thrown when 1/|Phi(t,s)| blows up at an interior sample of the Osgood
// integral; carries the offending s.
struct nonfinite_integrand : error {
    double s;
    explicit nonfinite_integrand(double s_)
        : error("integrand 1/|Phi| is nonfinite at s = " + std::to_string(s_)), s(s_) {}
};

struct domain_error : error {
    using error::error;
};

struct stiffness_abort : error {
    double t;
    explicit stiffness_abort(double t_)
        : error("step size collapsed below machine floor at t = " + std::to_string(t_)), t(t_) {}
};

struct nonconverged_step : error {
    double t;
    explicit nonconverged_step(double t_)
        : error("step error control failed to converge at t = " + std::to_string(t_)), t(t_) {}
};

struct param_error : error {
    using error::error;
};

struct pole_at_zero : error {
    pole_at_zero() : error("Ei has a pole at x = 0") {}
};

struct closed_form_unavailable : error {
    using error::error;
};

struct unknown_family : error {
    using error::error;
};

struct zero_gradient : error {
    zero_gradient() : error("gradient is zero; operator undefined") {}
};

struct zero_exponent_gradient : error {
    zero_exponent_gradient() : error("Dp is zero; angle undefined") {}
};

struct outside_domain : error {
    using error::error;
};

struct sample_plan_empty : error {
    sample_plan_empty() : error("sample plan contains no points") {}
};

struct range_error : error {
    using error::error;
};

struct config_error : error {
    using error::error;
};

}  // namespace phl
