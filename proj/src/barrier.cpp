#include "phl/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "phl/errors.hpp"

namespace phl {

namespace {

// |(x', x_n + gamma)| and the shifted radial unit vector.
double shifted_norm(const Vec& x, double gamma) {
    double acc = 0.0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i + 1 < n; ++i) acc += x[i] * x[i];
    const double zn = x[n - 1] + gamma;
    return std::sqrt(acc + zn * zn);
}

Vec shifted_unit(const Vec& x, double gamma) {
    Vec e = x;
    e[e.size() - 1] += gamma;
    return e / e.norm();
}

}  // namespace

double xi(const Geometry& geom, double R, const Vec& x) {
    const double gamma = geom.gamma(R);
    return shifted_norm(x, gamma) - gamma;
}

double BarrierField::xi_at(const Vec& x) const { return shifted_norm(x, gamma_value) - gamma_value; }

bool BarrierField::contains(const Vec& x) const {
    if (!(x[x.size() - 1] > 0.0)) return false;
    return shifted_norm(x, gamma_value) < R() + gamma_value;
}

double BarrierField::value(const Vec& x) const { return integral_of(curve, xi_at(x)); }

Vec BarrierField::gradient(const Vec& x) const {
    return shifted_unit(x, gamma_value) * curve.eval(xi_at(x));
}

Mat BarrierField::hessian(const Vec& x) const {
    const double rho = shifted_norm(x, gamma_value);
    const double s = xi_at(x);
    const double f = curve.eval(s);
    const double fp = rhs(problem, s, std::max(f, 0.0));
    const Vec e = shifted_unit(x, gamma_value);
    const int n = static_cast<int>(x.size());
    Mat h = (f / rho) * (Mat::Identity(n, n) - e * e.transpose());
    h += fp * e * e.transpose();
    return h;
}

BarrierField BarrierField::build(const OdeProblem& problem, const StepControl& control) {
    if (!problem.geom) throw param_error("barrier needs a geometry");
    BarrierField field;
    field.problem = problem;
    field.gamma_value = problem.geom->gamma(problem.R);
    field.K_value = problem.K();
    field.curve = solve(problem, control);
    return field;
}

BarrierDerivatives barrier_derivatives(const BarrierField& field, const Vec& x) {
    if (!field.contains(x)) throw outside_domain("point is not in D(R)");
    const auto& p = field.problem;
    const double rho = shifted_norm(x, field.gamma_value);
    const double s = field.xi_at(x);
    const double f = field.curve.eval(s);
    BarrierDerivatives out;
    out.grad = shifted_unit(x, field.gamma_value) * f;
    const int n = field.dim();
    const double tangential = (n - 1) / rho * f;
    const double fp = rhs(p, s, std::max(f, 0.0));
    if (p.phi.sign == GrowthProfile::Sign::nonnegative) {
        out.tr_plus = tangential;
        out.tr_minus = -fp;
        return out;
    }
    if (p.variant == OdeVariant::AsWritten) {
        out.tr_plus = -p.phi.eval(s, f) / p.ell.Lambda(s) + tangential;
        out.tr_minus = p.K() * p.ell.Lambda(s) / p.ell.lambda(s) * f;
        return out;
    }
    // Nondecreasing log-neg replacement: the whole radial part rides on the
    // positive side.
    out.tr_plus = fp + tangential;
    out.tr_minus = 0.0;
    return out;
}

OperatorUnderTest OperatorUnderTest::pucci_sublinear(double lam, double Lam, RealFn C, double k) {
    if (!(0.0 < lam && lam <= Lam)) throw bad_ellipticity("need 0 < lambda <= Lambda");
    return {"pucci-sublinear",
            [lam, Lam, C, k](const Vec& x, double, const Vec& grad, const Mat& hess) {
                const auto ev = sym_eigenvalues(hess);
                return pucci_minus(ev, lam, Lam) - C(x.norm()) * std::pow(grad.norm(), k);
            }};
}

OperatorUnderTest OperatorUnderTest::p_laplace_lower(double p, RealFn C, double k) {
    if (!(p > 1.0)) throw param_error("p-Laplacian needs p > 1");
    return {"p-laplace-lower",
            [p, C, k](const Vec& x, double, const Vec& grad, const Mat& hess) {
                const double g = grad.norm();
                if (g == 0.0) throw zero_gradient{};
                const Vec unit = grad / g;
                const double delta_inf = unit.dot(hess * unit);
                return -hess.trace() - (p - 2.0) * delta_inf - C(x.norm()) * std::pow(g, k);
            }};
}

namespace {

// Quasi-random point of D(R): Halton samples of the bounding box, rejected
// against the segment. The (n-1)-ball slice at level x_n has radius
// sqrt((R+gamma)^2 - (x_n+gamma)^2).
Vec segment_sample(std::size_t index, int n, double R, double gamma, std::size_t* skips) {
    const double rho_max = std::sqrt((R + gamma) * (R + gamma) - gamma * gamma);
    for (std::size_t attempt = 0;; ++attempt) {
        const Vec h = halton_point(index + attempt * 7919, n);
        Vec x(n);
        for (int i = 0; i + 1 < n; ++i) x[i] = (2.0 * h[i] - 1.0) * rho_max;
        x[n - 1] = h[n - 1] * R;
        double acc = 0.0;
        for (int i = 0; i + 1 < n; ++i) acc += x[i] * x[i];
        const double zn = x[n - 1] + gamma;
        if (std::sqrt(acc + zn * zn) < R + gamma && x[n - 1] > 0.0) {
            if (skips) *skips += attempt;
            return x;
        }
    }
}

Vec layer_sample(std::size_t index, int n, double R, double gamma, double level) {
    const double zn = level + gamma;
    const double r2 = (R + gamma) * (R + gamma) - zn * zn;
    Vec x = Vec::Zero(n);
    x[n - 1] = level;
    if (n == 1 || r2 <= 0.0) return x;
    const double rho_max = std::sqrt(r2);
    for (std::size_t attempt = 0;; ++attempt) {
        const Vec h = halton_point(index + attempt * 5077, n - 1);
        double acc = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            x[i] = (2.0 * h[i] - 1.0) * rho_max;
            acc += x[i] * x[i];
        }
        if (acc < r2) return x;
    }
}

}  // namespace

CertificateReport verify_supersolution(const BarrierField& field, const OperatorUnderTest& op,
                                       const SamplePlan& plan) {
    const std::size_t layer_total = plan.boundary_layers.size() * plan.layer_points;
    const std::size_t total = plan.n_points + layer_total;
    if (total == 0) throw sample_plan_empty{};

    const int n = field.dim();
    const double R = field.R();
    const double gamma = field.gamma_value;
    const double K = field.K_value;

    CertificateReport report;
    report.n_points = total;
    report.min_value = std::numeric_limits<double>::infinity();
    report.margin_min = std::numeric_limits<double>::infinity();

    std::mutex merge;
    double margin_sum = 0.0;
    parallel_for(total, [&](std::size_t i) {
        Vec x;
        if (i < plan.n_points) {
            x = segment_sample(i, n, R, gamma, nullptr);
        } else {
            const std::size_t j = i - plan.n_points;
            const double level = plan.boundary_layers[j / plan.layer_points];
            x = layer_sample(j % plan.layer_points, n, R, gamma, level);
        }
        const double value = op.eval(x, field.value(x), field.gradient(x), field.hessian(x));
        const double margin = K - (n - 1) / shifted_norm(x, gamma);
        std::lock_guard<std::mutex> lock(merge);
        margin_sum += margin;
        report.margin_min = std::min(report.margin_min, margin);
        if (value < report.min_value) {
            report.min_value = value;
            report.argmin = x;
        }
    });
    report.margin_mean = margin_sum / total;
    report.pass = report.min_value > 0.0;
    return report;
}

std::string CertificateReport::to_json() const {
    nlohmann::ordered_json j;
    j["min_value"] = min_value;
    j["argmin"] = std::vector<double>(argmin.data(), argmin.data() + argmin.size());
    j["n_points"] = n_points;
    j["margins_summary"] = {{"min", margin_min}, {"mean", margin_mean}};
    j["pass"] = pass;
    return j.dump(2);
}

}  // namespace phl
