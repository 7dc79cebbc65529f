#include "phl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace phl {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                            double fb, double m, double fm, double whole, double rel_tol,
                            double abs_tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(abs_tol, rel_tol * std::abs(left + right)))
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, rel_tol, abs_tol * 0.5, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, rel_tol, abs_tol * 0.5, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, rel_tol, abs_tol, max_depth);
}

CumulativeIntegral::CumulativeIntegral(RealFn g, double rel_tol)
    : g_(std::move(g)), rel_tol_(rel_tol) {}

double CumulativeIntegral::operator()(double t) const {
    if (g_.is_constant()) return *g_.const_value * t;
    if (t == 0.0) return 0.0;
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    // Extend from the nearest cached breakpoint below t.
    double t0 = 0.0, i0 = 0.0;
    auto lb = cache_.lower_bound(t);
    if (lb != cache_.begin() && t > 0.0) {
        --lb;
        if (lb->first > 0.0 && lb->first < t) {
            t0 = lb->first;
            i0 = lb->second;
        }
    }
    const double value = i0 + adaptive_simpson([this](double s) { return g_(s); }, t0, t,
                                               rel_tol_, 1e-300);
    cache_[t] = value;
    return value;
}

double halton(std::size_t index, unsigned base) {
    double f = 1.0, r = 0.0;
    std::size_t i = index + 1;  // skip the zero point
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

Vec halton_point(std::size_t index, int dims) {
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13};
    if (dims > 6) throw std::invalid_argument("halton_point supports at most 6 dimensions");
    Vec p(dims);
    for (int d = 0; d < dims; ++d) p[d] = halton(index, primes[d]);
    return p;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GROWTH_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    }
    if (threads == 1 || n < 2 * threads) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_loglog_slope needs matched samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / double(n - 1);
    return out;
}

std::vector<double> geomspace(double a, double b, int n) {
    std::vector<double> out(n);
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) out[i] = std::exp(la + (lb - la) * i / double(n - 1));
    return out;
}

std::vector<double> sym_eigenvalues(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(m);
    const Vec ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::pair<double, double> trace_split_psd(const Mat& m) {
    double plus = 0.0, minus = 0.0;
    for (double e : sym_eigenvalues(m)) {
        if (e >= 0.0)
            plus += e;
        else
            minus -= e;
    }
    return {plus, minus};
}

namespace {

bool sampled_monotone(const std::function<double(double)>& f, double lo, double hi, double slack,
                      bool nonincreasing) {
    if (!(lo > 0.0)) lo = 1e-6;
    if (hi <= lo) return true;
    const int decades = std::max(1, static_cast<int>(std::ceil(std::log10(hi / lo))));
    const int n = 64 * decades + 1;
    double prev = f(lo);
    for (int i = 1; i < n; ++i) {
        const double t = lo * std::pow(hi / lo, i / double(n - 1));
        const double cur = f(t);
        const double tol = slack * (1.0 + std::abs(prev));
        if (nonincreasing && cur > prev + tol) return false;
        if (!nonincreasing && cur < prev - tol) return false;
        prev = cur;
    }
    return true;
}

}  // namespace

bool sampled_nonincreasing(const std::function<double(double)>& f, double lo, double hi,
                           double slack) {
    return sampled_monotone(f, lo, hi, slack, true);
}

bool sampled_nondecreasing(const std::function<double(double)>& f, double lo, double hi,
                           double slack) {
    return sampled_monotone(f, lo, hi, slack, false);
}

std::string print_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace phl
