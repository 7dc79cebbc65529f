#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phl/closed_forms.hpp"
#include "phl/ode.hpp"
#include "phl/profiles.hpp"

namespace phl {

/// Normalizing law g(R) for the envelope growth, together with whether it
/// normalizes the boundary supremum M or its derivative M'.
struct GrowthLaw {
    enum class Tag { Linear, Log, Power, ExpIntegral, SubExponentialDecayRate, Custom };
    enum class Target { M, Mprime };

    Tag tag = Tag::Custom;
    Target target = Target::M;
    double exponent = 0.0;  // Power tag only
    std::string description;
    std::function<double(double)> log_g;

    static std::string tag_name(Tag tag);
};

/// Outcome of the dyadic-block divergence test on \int_0^T f_nu.
struct DivergenceTest {
    enum class Outcome { DivergenceCertified, ConvergenceCertified, Inconclusive };
    Outcome outcome = Outcome::Inconclusive;
    double trailing_block_ratio = 0.0;
    double tail_fraction = 0.0;  // extrapolated tail / accumulated mass
    double mass = 0.0;
    double T = 0.0;
};

struct DivergenceOptions {
    double T_max = 1e4;
    double ratio_threshold = 0.996;  // trailing block ratios at/above this certify divergence
    int window = 8;
    double tail_fraction = 1e-6;
    double log_f_blowup = 600.0;  // log f above this certifies divergence outright
};

DivergenceTest integral_divergence_test(const ClosedFormSolution& cf,
                                        const DivergenceOptions& opts = {});

struct GrowthReport {
    enum class Boundedness { BoundedPossible, Unbounded };

    double limit_estimate = 0.0;
    std::string gamma_rule;
    Boundedness boundedness = Boundedness::BoundedPossible;
    GrowthLaw law;
    DivergenceTest certificate;

    struct Evidence {
        double R;
        double ratio;  // normalized envelope over the law
    };
    std::vector<Evidence> evidence;
    std::string notes;

    std::string to_json() const;
    std::string to_table() const;
};

struct LimitPoint {
    double R;
    double ratio;  // f_{nu,R}(R) / f_nu(R)
};

struct LimitSweep {
    std::vector<LimitPoint> points;
    double liminf_estimate = 0.0;  // min over the last third of the sweep
};

/// Ratio of the constrained to the free envelope at t = R over an R-sweep.
/// Closed forms are used when the catalog has an entry, the adaptive solver
/// otherwise.
LimitSweep limit_ratio(const GrowthProfile& phi, const Ellipticity& ell, const Geometry& geom,
                       double nu, const std::vector<double>& R_sweep,
                       const StepControl& control = {.rel_tol = 1e-10, .abs_tol = 1e-14});

struct GammaRule {
    std::string description;
    RealFn gamma;
};

/// Minimal-order gamma(R) satisfying the sufficient condition for a positive
/// limit, multiplicative constant 1 (scaled by dimension n and multiplier).
/// The log-neg family needs nu; throws unknown_family for custom profiles.
GammaRule select_gamma(const GrowthProfile& phi, const Ellipticity& ell, int n = 1,
                       double nu = 1.0, double multiplier = 1.0);

struct ClassifyOptions {
    int n = 1;
    double gamma_multiplier = 1.0;
    double R_lo = 1.0;
    double R_hi = 1e4;
    int sweep_points = 32;
    DivergenceOptions divergence;
};

/// Growth-law classification of the free envelope of a recognized family.
GrowthReport classify(const GrowthProfile& phi, const Ellipticity& ell, double nu,
                      const ClassifyOptions& opts = {});

}  // namespace phl
