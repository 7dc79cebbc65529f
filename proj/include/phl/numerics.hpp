#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace phl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scalar function of one real variable. Functions built from a constant
/// remember the value so that callers can pick exact antiderivatives.
struct RealFn {
    std::function<double(double)> fn;
    std::optional<double> const_value;

    double operator()(double t) const { return const_value ? *const_value : fn(t); }
    bool is_constant() const { return const_value.has_value(); }

    static RealFn constant(double v) {
        return RealFn{[v](double) { return v; }, v};
    }
    static RealFn of(std::function<double(double)> f) { return RealFn{std::move(f), std::nullopt}; }
};

/// Adaptive Simpson quadrature of f over [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12, double abs_tol = 1e-14, int max_depth = 40);

/// Cumulative integral t -> \int_0^t g(s) ds with a monotone cache of
/// previously computed breakpoints. Thread-safe.
class CumulativeIntegral {
  public:
    explicit CumulativeIntegral(RealFn g, double rel_tol = 1e-12);
    double operator()(double t) const;
    bool is_linear() const { return g_.is_constant(); }
    double slope() const { return g_.const_value.value_or(0.0); }

  private:
    RealFn g_;
    double rel_tol_;
    mutable std::mutex mutex_;
    mutable std::map<double, double> cache_;  // t -> integral value
};

/// Radical-inverse Halton sequence; dims <= 6.
double halton(std::size_t index, unsigned base);
Vec halton_point(std::size_t index, int dims);

/// Runs fn(i) for i in [0, n). Thread count capped by GROWTH_THREADS.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

std::vector<double> linspace(double a, double b, int n);
std::vector<double> geomspace(double a, double b, int n);

/// Eigenvalues of a symmetric matrix, ascending.
std::vector<double> sym_eigenvalues(const Mat& m);

/// (Tr(M+), Tr(M-)) from the eigenvalue sign split of a symmetric matrix.
std::pair<double, double> trace_split_psd(const Mat& m);

/// Monotonicity spot checks on a log-spaced grid, 64 points per decade.
bool sampled_nonincreasing(const std::function<double(double)>& f, double lo, double hi,
                           double slack = 1e-12);
bool sampled_nondecreasing(const std::function<double(double)>& f, double lo, double hi,
                           double slack = 1e-12);

/// Shortest round-trip decimal for a double (17 significant digits).
std::string print_g17(double v);

}  // namespace phl
