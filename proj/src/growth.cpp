#include "phl/growth.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "phl/errors.hpp"

namespace phl {

namespace {

using json = nlohmann::ordered_json;

// coupling * (1 - e^expo) without the 0 * inf trap.
double coupled_one_minus_exp(double coupling, double expo) {
    if (coupling == 0.0) return 0.0;
    return coupling - std::exp(std::log(coupling) + expo);
}

// Installs cumulative integrals on a problem whose coefficients are not
// constant, so the closed-form catalog stays applicable.
OdeProblem with_integrals(OdeProblem p) {
    const auto cumulative = [](std::function<double(double)> g) {
        auto ci = std::make_shared<CumulativeIntegral>(RealFn::of(std::move(g)));
        return RealFn::of([ci](double t) { return (*ci)(t); });
    };
    if (p.phi.is_zero()) {
        if (!(p.ell.lambda.is_constant() && p.ell.Lambda.is_constant()) &&
            !p.int_Lambda_over_lam) {
            auto ell = p.ell;
            p.int_Lambda_over_lam =
                cumulative([ell](double t) { return ell.Lambda(t) / ell.lambda(t); });
        }
        return p;
    }
    if (p.phi.is_power() || p.phi.is_log_pos()) {
        const RealFn C = p.phi.is_power() ? p.phi.as_power()->C : p.phi.as_log_pos()->C;
        if (!(C.is_constant() && p.ell.lambda.is_constant()) && !p.int_A) {
            auto lam = p.ell.lambda;
            p.int_A = cumulative([C, lam](double t) { return C(t) / lam(t); });
        }
        return p;
    }
    if (p.phi.is_log_neg() && !p.ell.Lambda.is_constant() && !p.int_Lambda_inv) {
        auto Lam = p.ell.Lambda;
        p.int_Lambda_inv = cumulative([Lam](double t) { return 1.0 / Lam(t); });
    }
    return p;
}

OdeVariant natural_variant(const GrowthProfile& phi) {
    if (phi.is_power() || phi.is_log_pos() || phi.is_log_neg())
        return OdeVariant::SeparableMajorant;
    return OdeVariant::AsWritten;
}

// log of f_{nu,R}(R) / f_nu(R) straight from the catalog formulas; finite or
// -inf, never NaN.
double log_ratio_closed(const OdeProblem& problem, const ClosedFormSolution& cf) {
    const double R = problem.R;
    const double nu = problem.nu;
    const double coupling = cf.coupling();
    switch (cf.family()) {
        case ClosedFormSolution::Family::Zero:
            return -coupling * cf.integral_at(R);
        case ClosedFormSolution::Family::Power: {
            const double I = cf.integral_at(R);
            const double k = cf.k();
            if (k == 1.0) return -coupling * I;
            if (coupling < 1e-12) return 0.0;
            const double E = (k - 1.0) * coupling * I;
            const double a = coupling * std::pow(nu, 1.0 - k);
            const double log_inner =
                E > 700.0 ? E + std::log1p(a) : std::log(std::expm1(E) * (a + 1.0) + a);
            return (std::log(coupling) + std::log((k - 1.0) * I + std::pow(nu, 1.0 - k)) -
                    log_inner) /
                   (k - 1.0);
        }
        case ClosedFormSolution::Family::LogPos: {
            const double I = cf.integral_at(R);
            if (coupling == 0.0) return 0.0;
            const double log_nu = std::log(nu);
            if (nu <= 1.0) return coupled_one_minus_exp(coupling, I);
            const double I_cross = std::log1p(log_nu / coupling);
            if (I < I_cross) return -coupled_one_minus_exp(coupling, -I);
            return coupled_one_minus_exp(coupling, I - I_cross) - std::exp(-I) * log_nu;
        }
        case ClosedFormSolution::Family::LogNeg: {
            const double J = cf.integral_at(R);
            if (coupling == 0.0) return 0.0;
            const double log_nu = std::log(nu);
            if (nu <= 1.0) return -coupled_one_minus_exp(coupling, -J);
            if (log_nu >= coupling) return coupled_one_minus_exp(coupling, J);
            const double J_cross = std::log(coupling / (coupling - log_nu));
            if (J < J_cross) return coupled_one_minus_exp(coupling, J);
            return -coupled_one_minus_exp(coupling, -(J - J_cross)) - std::exp(J) * log_nu;
        }
    }
    return 0.0;
}

}  // namespace

std::string GrowthLaw::tag_name(Tag tag) {
    switch (tag) {
        case Tag::Linear: return "linear";
        case Tag::Log: return "log";
        case Tag::Power: return "power";
        case Tag::ExpIntegral: return "exp-integral";
        case Tag::SubExponentialDecayRate: return "sub-exponential-decay";
        case Tag::Custom: return "custom";
    }
    return "custom";
}

DivergenceTest integral_divergence_test(const ClosedFormSolution& cf,
                                        const DivergenceOptions& opts) {
    DivergenceTest result;
    std::vector<double> edges{0.0, 1.0};
    while (edges.back() * 2.0 <= opts.T_max) edges.push_back(edges.back() * 2.0);
    result.T = edges.back();

    std::vector<double> blocks;
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (cf.log_f(edges[i]) > opts.log_f_blowup) {
            result.outcome = DivergenceTest::Outcome::DivergenceCertified;
            result.trailing_block_ratio = std::numeric_limits<double>::infinity();
            result.mass = mass;
            return result;
        }
        const double b = adaptive_simpson([&cf](double t) { return cf.eval_f(t); }, edges[i],
                                          edges[i + 1], 1e-9, 1e-300);
        blocks.push_back(b);
        mass += b;
    }
    result.mass = mass;

    std::vector<double> ratios;
    for (std::size_t i = 2; i < blocks.size(); ++i) {
        if (blocks[i - 1] > 0.0) ratios.push_back(blocks[i] / blocks[i - 1]);
    }
    const int w = std::min<int>(opts.window, static_cast<int>(ratios.size()));
    if (w >= 1) {
        double log_sum = 0.0;
        bool all_above = true;
        for (int j = 0; j < w; ++j) {
            const double r = ratios[ratios.size() - 1 - j];
            all_above = all_above && r >= opts.ratio_threshold;
            log_sum += std::log(std::max(r, 1e-300));
        }
        result.trailing_block_ratio = std::exp(log_sum / w);
        if (all_above) {
            result.outcome = DivergenceTest::Outcome::DivergenceCertified;
            return result;
        }
    }

    const double b_last = blocks.empty() ? 0.0 : blocks.back();
    double tail = 0.0;
    if (b_last > 0.0 && !ratios.empty()) {
        const double r = std::min(ratios.back(), 1.0 - 1e-9);
        tail = b_last * r / (1.0 - r);
    }
    result.tail_fraction = mass > 0.0 ? tail / mass : 0.0;
    if (result.tail_fraction < opts.tail_fraction)
        result.outcome = DivergenceTest::Outcome::ConvergenceCertified;
    return result;
}

LimitSweep limit_ratio(const GrowthProfile& phi, const Ellipticity& ell, const Geometry& geom,
                       double nu, const std::vector<double>& R_sweep,
                       const StepControl& control) {
    LimitSweep sweep;
    sweep.points.reserve(R_sweep.size());
    for (double R : R_sweep) {
        OdeProblem base;
        base.phi = phi;
        base.ell = ell;
        base.geom = geom;
        base.nu = nu;
        base.R = R;
        base.variant = natural_variant(phi);
        OdeProblem constrained = with_integrals(std::move(base));
        OdeProblem free_problem = constrained;
        free_problem.geom.reset();
        free_problem.K_override.reset();

        double ratio;
        if (auto cf = ClosedFormSolution::try_build(constrained)) {
            ratio = std::exp(log_ratio_closed(constrained, *cf));
        } else {
            StepControl local = control;
            local.max_step = std::max(control.max_step, R / 4000.0);
            const SolutionCurve fR = solve(constrained, local);
            const SolutionCurve ff = solve(free_problem, local);
            ratio = fR.f_values.back() / ff.f_values.back();
        }
        sweep.points.push_back({R, ratio});
    }
    const std::size_t n = sweep.points.size();
    if (n > 0) {
        double lim = std::numeric_limits<double>::infinity();
        for (std::size_t i = n - std::max<std::size_t>(1, n / 3); i < n; ++i)
            lim = std::min(lim, sweep.points[i].ratio);
        sweep.liminf_estimate = lim;
    }
    return sweep;
}

GammaRule select_gamma(const GrowthProfile& phi, const Ellipticity& ell, int n, double nu,
                       double multiplier) {
    const double scale = multiplier * n;
    if (phi.is_zero()) {
        if (ell.lambda.is_constant() && ell.Lambda.is_constant()) {
            const double r = *ell.Lambda.const_value / *ell.lambda.const_value;
            return {"gamma(R) = n * (Lambda/lambda) * R",
                    RealFn::of([scale, r](double R) { return scale * r * R; })};
        }
        auto ci = std::make_shared<CumulativeIntegral>(
            RealFn::of([ell](double t) { return ell.Lambda(t) / ell.lambda(t); }));
        return {"gamma(R) = n * int_0^R Lambda/lambda",
                RealFn::of([scale, ci](double R) { return scale * (*ci)(R); })};
    }
    if (phi.is_power() || phi.is_log_pos()) {
        const RealFn C = phi.is_power() ? phi.as_power()->C : phi.as_log_pos()->C;
        auto lam = ell.lambda;
        auto Lam = ell.Lambda;
        std::function<double(double)> intA;
        if (C.is_constant() && lam.is_constant()) {
            const double a = *C.const_value / *lam.const_value;
            intA = [a](double R) { return a * R; };
        } else {
            auto ci = std::make_shared<CumulativeIntegral>(
                RealFn::of([C, lam](double t) { return C(t) / lam(t); }));
            intA = [ci](double R) { return (*ci)(R); };
        }
        if (phi.is_power()) {
            return {"gamma(R) = n * Lambda(R)/C(R) * int_0^R A",
                    RealFn::of([scale, Lam, C, intA](double R) {
                        return scale * Lam(R) / C(R) * intA(R);
                    })};
        }
        return {"gamma(R) = n * Lambda(R)/C(R) * exp(int_0^R A)",
                RealFn::of([scale, Lam, C, intA](double R) {
                    return scale * Lam(R) / C(R) * std::exp(intA(R));
                })};
    }
    if (phi.is_log_neg()) {
        if (!(nu > 0.0)) throw param_error("log-neg gamma rule needs nu > 0");
        auto Lam = ell.Lambda;
        if (nu == 1.0) {
            return {"gamma(R) = n * Lambda(R) * R",
                    RealFn::of([scale, Lam](double R) { return scale * Lam(R) * R; })};
        }
        if (nu < 1.0) {
            const double inv_log = 1.0 / std::abs(std::log(nu));
            return {"gamma(R) = n * Lambda(R) / |log nu|",
                    RealFn::of([scale, Lam, inv_log](double R) {
                        return scale * Lam(R) * inv_log;
                    })};
        }
        std::function<double(double)> intLinv;
        if (Lam.is_constant()) {
            const double linv = 1.0 / *Lam.const_value;
            intLinv = [linv](double R) { return linv * R; };
        } else {
            auto ci = std::make_shared<CumulativeIntegral>(
                RealFn::of([Lam](double t) { return 1.0 / Lam(t); }));
            intLinv = [ci](double R) { return (*ci)(R); };
        }
        const double inv_log = 1.0 / std::log(nu);
        return {"gamma(R) = n * Lambda(R) * (exp(int_0^R 1/Lambda) + 1/log nu)",
                RealFn::of([scale, Lam, intLinv, inv_log](double R) {
                    return scale * Lam(R) * (std::exp(intLinv(R)) + inv_log);
                })};
    }
    throw unknown_family("no gamma rule for custom profiles");
}

namespace {

double log_expint_arg(double x) { return x <= 650.0 ? std::log(expint_ei(x)) : log_expint_ei(x); }

}  // namespace

GrowthReport classify(const GrowthProfile& phi, const Ellipticity& ell, double nu,
                      const ClassifyOptions& opts) {
    if (phi.is_custom()) throw unknown_family("classify requires a recognized family");
    if (!(nu > 0.0)) throw param_error("classify requires nu > 0");

    GrowthReport report;

    OdeProblem base;
    base.phi = phi;
    base.ell = ell;
    base.nu = nu;
    base.R = opts.R_hi;
    base.variant = natural_variant(phi);
    OdeProblem free_problem = with_integrals(std::move(base));
    const auto cf = ClosedFormSolution::try_build(free_problem);
    if (!cf) throw unknown_family("no closed form for the free envelope");

    report.certificate = integral_divergence_test(*cf, opts.divergence);
    report.boundedness =
        report.certificate.outcome == DivergenceTest::Outcome::DivergenceCertified
            ? GrowthReport::Boundedness::Unbounded
            : GrowthReport::Boundedness::BoundedPossible;

    // Growth law of the free envelope. Closures copy the catalog entry so
    // the report stays valid on its own.
    GrowthLaw law;
    const double log_nu = std::log(nu);
    const ClosedFormSolution cfv = *cf;
    const auto linear_law = [] {
        return GrowthLaw{GrowthLaw::Tag::Linear, GrowthLaw::Target::M, 0.0, "M(R) ~ R",
                         [](double R) { return std::log(R); }};
    };
    const auto log_law = [] {
        return GrowthLaw{GrowthLaw::Tag::Log, GrowthLaw::Target::M, 0.0, "M(R) ~ log R",
                         [](double R) { return std::log(std::log(R)); }};
    };
    const auto power_law = [](GrowthLaw::Target target, double e) {
        const char* who = target == GrowthLaw::Target::M ? "M(R) ~ R^" : "M'(R) ~ R^";
        return GrowthLaw{GrowthLaw::Tag::Power, target, e, who + print_g17(e),
                         [e](double R) { return e * std::log(R); }};
    };
    if (phi.is_zero()) {
        law = linear_law();
    } else if (phi.is_power()) {
        const double k = cfv.k();
        const auto rate = cfv.rate_constant();
        if (rate) {
            // Constant A: the exact catalog in k.
            if (k == 1.0) {
                const double a = *rate;
                law = {GrowthLaw::Tag::SubExponentialDecayRate, GrowthLaw::Target::Mprime, 0.0,
                       "M'(R) ~ nu exp(-A R)",
                       [log_nu, a](double R) { return log_nu - a * R; }};
            } else if (std::abs(k - 2.0) < 1e-12) {
                law = log_law();
            } else if (k < 2.0) {
                law = power_law(GrowthLaw::Target::Mprime, 1.0 / (1.0 - k));
            } else {
                law = power_law(GrowthLaw::Target::M, (2.0 - k) / (1.0 - k));
            }
        } else if (k == 1.0) {
            const double c1 = cfv.integral_at(1e3) / std::log(1e3);
            const double c2 = cfv.integral_at(opts.R_hi) / std::log(opts.R_hi);
            if (std::abs(c2 - c1) <= 0.05 * std::abs(c2)) {
                law = log_law();
            } else {
                law = {GrowthLaw::Tag::SubExponentialDecayRate, GrowthLaw::Target::Mprime, 0.0,
                       "M'(R) ~ nu exp(-int_0^R A)",
                       [log_nu, cfv](double R) { return log_nu - cfv.integral_at(R); }};
            }
        } else {
            // Fit the asymptotic order of int_0^R A ~ R^sigma.
            const auto Rs = geomspace(1e2, opts.R_hi, 9);
            std::vector<double> Is(Rs.size());
            for (std::size_t i = 0; i < Rs.size(); ++i) Is[i] = cfv.integral_at(Rs[i]);
            const double alpha = fit_loglog_slope(Rs, Is) / (k - 1.0);
            if (std::abs(alpha - 1.0) <= 0.05)
                law = log_law();
            else if (alpha < 1.0)
                law = power_law(GrowthLaw::Target::M, 1.0 - alpha);
            else
                law = power_law(GrowthLaw::Target::Mprime, -alpha);
        }
    } else if (phi.is_log_pos()) {
        if (nu < 1.0) {
            law = {GrowthLaw::Tag::SubExponentialDecayRate, GrowthLaw::Target::Mprime, 0.0,
                   "M'(R) ~ nu^exp(int_0^R A)",
                   [log_nu, cfv](double R) { return std::exp(cfv.integral_at(R)) * log_nu; }};
        } else {
            law = linear_law();
        }
    } else if (phi.is_log_neg()) {
        if (nu <= 1.0) {
            law = linear_law();
        } else {
            law = {GrowthLaw::Tag::ExpIntegral, GrowthLaw::Target::M, 0.0,
                   "M(R) ~ Ei(exp(int_0^R 1/Lambda) log nu)",
                   [log_nu, cfv](double R) {
                       return log_expint_arg(std::exp(cfv.integral_at(R)) * log_nu);
                   }};
        }
    }
    report.law = law;

    // gamma selection and the limit over an R-sweep.
    GammaRule rule = select_gamma(phi, ell, opts.n, nu, opts.gamma_multiplier);
    report.gamma_rule = rule.description;
    const Geometry geom = Geometry::of(opts.n, rule.gamma);
    const auto R_sweep = geomspace(opts.R_lo, opts.R_hi, opts.sweep_points);
    report.limit_estimate = limit_ratio(phi, ell, geom, nu, R_sweep).liminf_estimate;

    // Evidence: normalized envelope against the law over the tail decades.
    const auto log_num = [&](double R) -> double {
        if (law.target == GrowthLaw::Target::Mprime) return cf->log_f(R);
        if (phi.is_zero()) return std::log(nu * R);
        if (phi.is_power()) {
            const auto rate = cf->rate_constant();
            if (rate) return std::log(u_power(R, cf->k(), *rate, nu));
            // Quadrature fallback for nonconstant A.
            return std::log(adaptive_simpson([&](double t) { return cf->eval_f(t); }, 0.0, R,
                                             1e-10, 1e-300));
        }
        const double a = cf->rate_constant().value_or(1.0);
        if (phi.is_log_pos()) return std::log(nu <= 1.0 ? u_log_up(R, a, nu)
                                                        : u_log_down(R, a, nu));
        // log-neg
        if (nu <= 1.0) return std::log(u_log_down(R, a, nu));
        const double arg = std::exp(cf->integral_at(R)) * log_nu;
        if (arg <= 650.0) return std::log(u_log_up(R, a, nu));
        return -std::log(a) + log_expint_ei(arg);
    };
    for (double R : geomspace(std::max(opts.R_lo, 1e2), opts.R_hi, 13)) {
        report.evidence.push_back({R, std::exp(log_num(R) - law.log_g(R))});
    }

    const bool law_bounded = law.target == GrowthLaw::Target::Mprime;
    const bool flag_bounded = report.boundedness == GrowthReport::Boundedness::BoundedPossible;
    if (law_bounded != flag_bounded)
        report.notes = "law and divergence certificate disagree on boundedness";
    return report;
}

std::string GrowthReport::to_json() const {
    json j;
    j["limit_estimate"] = limit_estimate;
    j["gamma_rule"] = gamma_rule;
    j["boundedness"] =
        boundedness == Boundedness::Unbounded ? "unbounded" : "bounded-possible";
    j["growth_law"] = {
        {"tag", GrowthLaw::tag_name(law.tag)},
        {"target", law.target == GrowthLaw::Target::M ? "M" : "Mprime"},
        {"exponent", law.exponent},
        {"description", law.description},
    };
    const char* outcome = "inconclusive";
    if (certificate.outcome == DivergenceTest::Outcome::DivergenceCertified)
        outcome = "divergence-certified";
    if (certificate.outcome == DivergenceTest::Outcome::ConvergenceCertified)
        outcome = "convergence-certified";
    j["certificate"] = {
        {"outcome", outcome},
        {"trailing_block_ratio", certificate.trailing_block_ratio},
        {"tail_fraction", certificate.tail_fraction},
        {"mass", certificate.mass},
        {"T", certificate.T},
    };
    json ev = json::array();
    for (const auto& e : evidence) ev.push_back({{"R", e.R}, {"ratio", e.ratio}});
    j["evidence"] = ev;
    j["notes"] = notes;
    return j.dump(2);
}

std::string GrowthReport::to_table() const {
    std::ostringstream out;
    out << "growth law     : " << law.description << "\n"
        << "boundedness    : "
        << (boundedness == Boundedness::Unbounded ? "unbounded" : "bounded-possible") << "\n"
        << "gamma rule     : " << gamma_rule << "\n"
        << "limit estimate : " << print_g17(limit_estimate) << "\n"
        << "evidence (R, envelope/law):\n";
    for (const auto& e : evidence)
        out << "  " << print_g17(e.R) << "  " << print_g17(e.ratio) << "\n";
    if (!notes.empty()) out << "notes: " << notes << "\n";
    return out.str();
}

}  // namespace phl
