#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phl/ode.hpp"
#include "phl/profiles.hpp"

namespace phl {

/// Shifted radial coordinate of the spherical segment:
/// xi(x) = |(x', x_n + gamma)| - gamma. Equals R on the curved boundary.
double xi(const Geometry& geom, double R, const Vec& x);

/// The comparison supersolution V(x) = \int_0^xi f dt built from a solved
/// envelope curve, with analytic gradient and Hessian.
struct BarrierField {
    OdeProblem problem;
    SolutionCurve curve;
    double gamma_value = 1.0;
    double K_value = 0.0;

    int dim() const { return problem.geom ? problem.geom->n : 1; }
    double R() const { return problem.R; }

    double xi_at(const Vec& x) const;
    bool contains(const Vec& x) const;  // open segment D(R)

    double value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;

    /// Builds the field by integrating the envelope problem. The curve grid
    /// is refined enough for 1e-9 interpolation error.
    static BarrierField build(const OdeProblem& problem, const StepControl& control = {
                                                             .rel_tol = 1e-10,
                                                             .abs_tol = 1e-14,
                                                             .max_step = 2e-3,
                                                         });
};

/// Gradient and the sign-split of Tr(D^2 V) at a point, following the
/// envelope equation of the field.
struct BarrierDerivatives {
    Vec grad;
    double tr_plus = 0.0;
    double tr_minus = 0.0;
};

BarrierDerivatives barrier_derivatives(const BarrierField& field, const Vec& x);

/// A concrete operator F(x, u, Du, D^2u) to certify against.
struct OperatorUnderTest {
    std::string tag;
    std::function<double(const Vec& x, double u, const Vec& grad, const Mat& hess)> eval;

    /// P^-_{lam,Lam}(D^2 u) - C(|x|) |Du|^k.
    static OperatorUnderTest pucci_sublinear(double lam, double Lam, RealFn C, double k);
    /// Normalized p-Laplacian with a sublinear lower-order term:
    /// -tr - (p-2) Delta_inf - C(|x|) |Du|^k.
    static OperatorUnderTest p_laplace_lower(double p, RealFn C, double k);
};

struct SamplePlan {
    std::size_t n_points = 10000;
    std::vector<double> boundary_layers{1e-3, 1e-6};
    std::size_t layer_points = 512;
};

struct CertificateReport {
    double min_value = 0.0;
    Vec argmin;
    std::size_t n_points = 0;
    double margin_min = 0.0;   // K - (n-1)/|(x', x_n+gamma)| over the samples
    double margin_mean = 0.0;
    bool pass = false;

    std::string to_json() const;
};

/// Evaluates the operator on quasi-random samples of D(R) plus boundary
/// layers; the certificate passes iff the minimum stays positive.
CertificateReport verify_supersolution(const BarrierField& field, const OperatorUnderTest& op,
                                       const SamplePlan& plan = {});

}  // namespace phl
