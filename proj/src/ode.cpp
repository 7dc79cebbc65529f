#include "phl/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phl/errors.hpp"

namespace phl {

double OdeProblem::K() const {
    if (K_override) return *K_override;
    if (!geom) return 0.0;
    return geom->K(R);
}

double OdeProblem::phi_C(double t) const {
    if (const auto* p = phi.as_power()) return p->C(t);
    if (const auto* lp = phi.as_log_pos()) return lp->C(t);
    if (phi.is_log_neg()) return 1.0;
    throw param_error("profile has no C(t) prefactor");
}

double OdeProblem::Ktilde() const { return K() * ell.Lambda(R) / phi_C(R); }

double OdeProblem::Khat() const {
    switch (khat_choice) {
        case KhatChoice::SharpNLambdaOverGamma:
            return K() * ell.Lambda(R);
        case KhatChoice::ConservativeLambdaSqOverLam:
            return K() * ell.Lambda(R) * ell.Lambda(R) / ell.lambda(R);
    }
    return 0.0;
}

void OdeProblem::validate() const {
    if (nu < 0.0) throw param_error("nu must be >= 0");
    if (!(R > 0.0)) throw param_error("R must be > 0");
    if (variant == OdeVariant::SeparableMajorant && !(phi.is_power() || phi.is_log_pos() ||
                                                      phi.is_log_neg()))
        throw param_error("separable replacement exists only for power and log families");
}

namespace {

constexpr double kLogFloor = 1e-300;

double abs_log_floored(double f, bool* degenerate) {
    if (f < kLogFloor) {
        if (degenerate) *degenerate = true;
        return std::abs(std::log(kLogFloor));
    }
    return std::abs(std::log(f));
}

double rhs_impl(const OdeProblem& p, double t, double f, bool* degenerate) {
    const double K = p.K();
    if (p.variant == OdeVariant::AsWritten) {
        const double lam = p.ell.lambda(t);
        const double Lam = p.ell.Lambda(t);
        const double drift = K * Lam / lam * f;
        const double phi = p.phi.eval(t, f);
        if (p.phi.sign == GrowthProfile::Sign::nonnegative) return -phi / lam - drift;
        return -phi / Lam - drift;
    }
    // Separable replacements.
    if (p.phi.is_power()) {
        const double k = p.phi.as_power()->k;
        return -p.A(t) * (std::pow(f, k) + p.Ktilde() * f);
    }
    if (p.phi.is_log_pos()) {
        const double fl = f == 0.0 ? 0.0 : f * abs_log_floored(f, degenerate);
        return -p.A(t) * (fl + p.Ktilde() * f);
    }
    if (p.phi.is_log_neg()) {
        const double fl = f == 0.0 ? 0.0 : f * abs_log_floored(f, degenerate);
        return (fl - p.Khat() * f) / p.ell.Lambda(t);
    }
    throw param_error("separable replacement exists only for power and log families");
}

}  // namespace

double rhs(const OdeProblem& problem, double t, double f) {
    if (f < 0.0) throw domain_error("rhs evaluated at negative f");
    return rhs_impl(problem, t, f, nullptr);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

double hermite_value(double t0, double f0, double d0, double t1, double f1, double d1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return f0 * (2 * s3 - 3 * s2 + 1) + h * d0 * (s3 - 2 * s2 + s) + f1 * (-2 * s3 + 3 * s2) +
           h * d1 * (s3 - s2);
}

}  // namespace

SolutionCurve solve(const OdeProblem& problem, const StepControl& control) {
    problem.validate();
    const double R = problem.R;
    bool degenerate = false;
    const auto field = [&](double t, double f) {
        return rhs_impl(problem, t, std::max(f, 0.0), &degenerate);
    };
    const bool track_unit_crossings = problem.phi.is_log_pos() || problem.phi.is_log_neg();

    SolutionCurve curve;
    curve.nu = problem.nu;
    curve.K_used = problem.K();
    curve.method = CurveMethod::Numeric;

    double t = 0.0;
    double f = problem.nu;
    double d = field(t, f);
    curve.t_grid.push_back(t);
    curve.f_values.push_back(f);
    curve.f_derivs.push_back(d);

    double h = control.initial_step > 0.0
                   ? control.initial_step
                   : std::min({control.max_step, R / 64.0,
                               0.01 * (1.0 + std::abs(f)) / (1.0 + std::abs(d))});
    int rejects = 0;
    bool force_landing = false;  // step was shortened onto an event time

    while (t < R) {
        h = std::min(h, R - t);
        const double floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t);
        if (h < floor) throw stiffness_abort(t);

        const double k1 = d;
        const double k2 = field(t + c2 * h, f + h * a21 * k1);
        const double k3 = field(t + c3 * h, f + h * (a31 * k1 + a32 * k2));
        const double k4 = field(t + c4 * h, f + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = field(t + c5 * h, f + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 =
            field(t + h, f + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        double f_new = f + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = field(t + h, f_new);
        const double err =
            std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
        const double scale =
            control.abs_tol + control.rel_tol * std::max(std::abs(f), std::abs(f_new));
        const double ratio = err / scale;

        if (ratio > 1.0 && !force_landing) {
            if (++rejects > control.max_rejects) throw nonconverged_step(t);
            h *= std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 1.0);
            continue;
        }
        rejects = 0;

        if (f_new < 0.0) {
            if (-f_new <= control.abs_tol && problem.phi.eval(t + h, 0.0) == 0.0) {
                f_new = 0.0;  // absorbing state
            } else if (!force_landing) {
                h *= 0.5;
                continue;
            } else {
                f_new = 0.0;
            }
        }

        // Locate a crossing of f = 1 inside the accepted step, then land on it.
        const double d_new = f_new == 0.0 ? 0.0 : k7;
        if (track_unit_crossings && !force_landing && (f - 1.0) * (f_new - 1.0) < 0.0 &&
            std::abs(f - 1.0) > 1e-14) {
            double lo = t, hi = t + h;
            for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = hermite_value(t, f, k1, t + h, f_new, d_new, mid);
                if ((f - 1.0) * (fm - 1.0) > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double t_cross = 0.5 * (lo + hi);
            if (t_cross > t + floor) {
                curve.unit_crossings.push_back(t_cross);
                h = t_cross - t;
                force_landing = true;
                continue;
            }
        }
        force_landing = false;

        t += h;
        f = f_new;
        d = field(t, f);
        curve.t_grid.push_back(t);
        curve.f_values.push_back(f);
        curve.f_derivs.push_back(d);

        h = std::min(control.max_step,
                     h * std::clamp(0.9 * std::pow(std::max(ratio, 1e-10), -0.2), 0.2, 5.0));
    }

    curve.degenerate = degenerate;
    return curve;
}

namespace {

std::size_t locate_interval(const std::vector<double>& grid, double t) {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t i = it - grid.begin();
    if (i == 0) return 0;
    if (i >= grid.size()) return grid.size() - 2;
    return i - 1;
}

}  // namespace

double SolutionCurve::eval(double t) const {
    if (t_grid.size() < 2) return f_values.empty() ? 0.0 : f_values.front();
    const double slack = 1e-9 * std::max(1.0, t_max());
    if (t < t_grid.front() - slack || t > t_max() + slack)
        throw range_error("curve evaluated outside its grid");
    t = std::clamp(t, t_grid.front(), t_max());
    const std::size_t i = locate_interval(t_grid, t);
    return hermite_value(t_grid[i], f_values[i], f_derivs[i], t_grid[i + 1], f_values[i + 1],
                         f_derivs[i + 1], t);
}

double SolutionCurve::eval_deriv(double t) const {
    if (t_grid.size() < 2) return 0.0;
    t = std::clamp(t, t_grid.front(), t_max());
    const std::size_t i = locate_interval(t_grid, t);
    const double h = t_grid[i + 1] - t_grid[i];
    const double s = (t - t_grid[i]) / h;
    const double s2 = s * s;
    const double f0 = f_values[i], f1 = f_values[i + 1];
    const double d0 = f_derivs[i], d1 = f_derivs[i + 1];
    return f0 * (6 * s2 - 6 * s) / h + d0 * (3 * s2 - 4 * s + 1) + f1 * (6 * s - 6 * s2) / h +
           d1 * (3 * s2 - 2 * s);
}

double integral_of(const SolutionCurve& curve, double upto) {
    const auto& tg = curve.t_grid;
    if (tg.size() < 2) throw range_error("curve has no interior");
    const double slack = 1e-9 * std::max(1.0, curve.t_max());
    if (upto < tg.front() - slack || upto > curve.t_max() + slack)
        throw range_error("integration endpoint outside the curve grid");
    upto = std::clamp(upto, tg.front(), curve.t_max());

    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < tg.size(); ++i) {
        const double h = tg[i + 1] - tg[i];
        if (tg[i + 1] <= upto) {
            acc += h * (0.5 * (curve.f_values[i] + curve.f_values[i + 1]) +
                        h * (curve.f_derivs[i] - curve.f_derivs[i + 1]) / 12.0);
            continue;
        }
        const double s = (upto - tg[i]) / h;
        if (s <= 0.0) break;
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        acc += h * (curve.f_values[i] * (0.5 * s4 - s3 + s) +
                    h * curve.f_derivs[i] * (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) +
                    curve.f_values[i + 1] * (s3 - 0.5 * s4) +
                    h * curve.f_derivs[i + 1] * (0.25 * s4 - s3 / 3.0));
        break;
    }
    return acc;
}

std::string SolutionCurve::to_csv() const {
    std::ostringstream out;
    out << "t,f,method,nu,K\n";
    const char* m = method == CurveMethod::Numeric ? "numeric" : "closed-form";
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        out << print_g17(t_grid[i]) << ',' << print_g17(f_values[i]) << ',' << m << ','
            << print_g17(nu) << ',' << print_g17(K_used) << '\n';
    }
    return out.str();
}

SolutionCurve SolutionCurve::from_csv(const std::string& text) {
    SolutionCurve curve;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,f,method,nu,K")
        throw config_error("bad curve CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        curve.t_grid.push_back(std::stod(cell));
        std::getline(row, cell, ',');
        curve.f_values.push_back(std::stod(cell));
        std::getline(row, cell, ',');
        curve.method = cell == "numeric" ? CurveMethod::Numeric : CurveMethod::ClosedForm;
        std::getline(row, cell, ',');
        curve.nu = std::stod(cell);
        std::getline(row, cell, ',');
        curve.K_used = std::stod(cell);
    }
    // Derivatives are not serialized; rebuild them from the samples.
    const std::size_t n = curve.t_grid.size();
    curve.f_derivs.assign(n, 0.0);
    if (n >= 3) {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double h1 = curve.t_grid[i] - curve.t_grid[i - 1];
            const double h2 = curve.t_grid[i + 1] - curve.t_grid[i];
            curve.f_derivs[i] = -curve.f_values[i - 1] * h2 / (h1 * (h1 + h2)) +
                                curve.f_values[i] * (h2 - h1) / (h1 * h2) +
                                curve.f_values[i + 1] * h1 / (h2 * (h1 + h2));
        }
        curve.f_derivs[0] = (curve.f_values[1] - curve.f_values[0]) /
                            (curve.t_grid[1] - curve.t_grid[0]);
        curve.f_derivs[n - 1] = (curve.f_values[n - 1] - curve.f_values[n - 2]) /
                                (curve.t_grid[n - 1] - curve.t_grid[n - 2]);
    }
    return curve;
}

SolutionCurve SolutionCurve::from_function(const std::function<double(double)>& f,
                                           const std::function<double(double)>& fprime,
                                           const std::vector<double>& grid, double nu, double K,
                                           CurveMethod method) {
    SolutionCurve curve;
    curve.t_grid = grid;
    curve.nu = nu;
    curve.K_used = K;
    curve.method = method;
    curve.f_values.reserve(grid.size());
    curve.f_derivs.reserve(grid.size());
    for (double t : grid) {
        curve.f_values.push_back(f(t));
        curve.f_derivs.push_back(fprime(t));
    }
    return curve;
}

}  // namespace phl
