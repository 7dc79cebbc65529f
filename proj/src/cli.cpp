#include "phl/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phl/barrier.hpp"
#include "phl/closed_forms.hpp"
#include "phl/errors.hpp"
#include "phl/growth.hpp"
#include "phl/ode.hpp"
#include "phl/pxlaplace.hpp"
#include "scenario.hpp"

namespace phl::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Options {
    std::string scenario;
    std::string out = ".";
    double gamma_multiplier = 1.0;
    std::optional<double> tol;
};

std::string num_label(double v) {
    std::ostringstream s;
    s << v;
    std::string text = s.str();
    for (char& c : text)
        if (c == '.') c = 'p';
    return text;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path.string());
    out << content;
}

void write_curve(const fs::path& dir, const std::string& stem, const SolutionCurve& curve) {
    write_file(dir / (stem + ".csv"), curve.to_csv());
}

SolutionCurve tabulate(const std::function<double(double)>& f, const std::vector<double>& grid,
                       double nu, double K) {
    return SolutionCurve::from_function(f, [](double) { return 0.0; }, grid, nu, K);
}

std::vector<double> parse_grid(const json& g, double def_lo, double def_hi, int def_points) {
    const double lo = g.value("lo", def_lo);
    const double hi = g.value("hi", def_hi);
    const int points = g.value("points", def_points);
    if (g.value("geometric", false)) return geomspace(lo, hi, points);
    return linspace(lo, hi, points);
}

int cmd_solve(const Options& opt) {
    const Scenario s = Scenario::load(opt.scenario, opt.gamma_multiplier, opt.tol);
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    std::vector<double> ks = s.k_list;
    if (ks.empty() || !s.profile.is_power()) ks = {std::nan("")};
    for (double k : ks) {
        const GrowthProfile phi = std::isnan(k) ? s.profile : s.profile_with_k(k);
        const std::string ktag = std::isnan(k) ? "" : "_k" + num_label(k);
        for (double nu : s.nu_list) {
            const std::string tag = ktag + "_nu" + num_label(nu);
            const SolutionCurve fnu = solve(s.problem(phi, nu, false), s.solver);
            write_curve(dir, s.name + "_fnu" + tag, fnu);
            const SolutionCurve fnuR = solve(s.problem(phi, nu, true), s.solver);
            write_curve(dir, s.name + "_fnuR" + tag, fnuR);
            const auto grid = linspace(0.0, s.R, 257);
            write_curve(dir, s.name + "_u" + tag,
                        tabulate([&fnu](double x) { return integral_of(fnu, x); }, grid, nu, 0.0));
        }
    }
    return 0;
}

int cmd_classify(const Options& opt) {
    const Scenario s = Scenario::load(opt.scenario, opt.gamma_multiplier, opt.tol);
    const fs::path dir(opt.out);
    fs::create_directories(dir);

    ClassifyOptions copts;
    copts.n = s.n;
    copts.gamma_multiplier = opt.gamma_multiplier;
    for (double nu : s.nu_list) {
        const GrowthReport report = classify(s.profile, s.ell, nu, copts);
        write_file(dir / (s.name + "_classify_nu" + num_label(nu) + ".json"), report.to_json());
        std::cout << "== " << s.name << " nu = " << nu << "\n" << report.to_table() << "\n";
    }
    return 0;
}

int verify_barrier(const Scenario& s, const fs::path& dir) {
    const json v = s.raw.at("verify");
    const std::string op_name = v.value("operator", "pucci-sublinear");
    if (!(s.ell.lambda.is_constant() && s.ell.Lambda.is_constant()))
        throw config_error("barrier operators need constant ellipticity bounds");
    const double lam = *s.ell.lambda.const_value;
    const double Lam = *s.ell.Lambda.const_value;
    const RealFn C = RealFn::constant(v.value("C", 1.0));
    const double k = v.value("k", 2.0);

    OperatorUnderTest op = op_name == "p-laplace-lower"
                               ? OperatorUnderTest::p_laplace_lower(v.value("p", 2.0), C, k)
                               : OperatorUnderTest::pucci_sublinear(lam, Lam, C, k);

    const double nu = s.nu_list.front();
    const BarrierField field = BarrierField::build(s.problem(s.profile, nu, true));
    SamplePlan plan;
    plan.n_points = v.value("points", 10000);
    const CertificateReport report = verify_supersolution(field, op, plan);
    write_file(dir / (s.name + "_barrier.json"), report.to_json());
    std::cout << report.to_json() << "\n";
    return report.pass ? 0 : 1;
}

int verify_px_sharp(const Scenario& s, const fs::path& dir) {
    const json v = s.raw.at("verify");
    const int n = v.value("n", 3);
    const auto c_list = v.value("c_list", std::vector<double>{1.0, 2.0, 5.0});
    const auto M0_list = v.value("M0_list", std::vector<double>{1.5, 3.0});
    const auto Mi_list = v.value("Mi_list", std::vector<double>{0.0, 1.0});

    // Interior probe points with coordinates within the unit box scale.
    std::vector<Vec> points;
    for (int i = 0; i < 5; ++i) {
        Vec x = halton_point(17 + i, n);
        for (int d = 0; d + 1 < n; ++d) x[d] = 2.0 * x[d] - 1.0;
        x[n - 1] = 0.25 + 1.5 * x[n - 1];
        points.push_back(x);
    }

    double analytic_max = 0.0, fd_max = 0.0;
    for (double c : c_list)
        for (double M0 : M0_list)
            for (double Mi : Mi_list) {
                const Exponent expo = sharp_exponent(n, M0, std::vector<double>(n - 1, Mi));
                Vec grad = Vec::Zero(n);
                grad[n - 1] = c;
                const Mat hess = Mat::Zero(n, n);
                const auto grad_fn = [grad](const Vec&) { return grad; };
                for (const Vec& x : points) {
                    analytic_max =
                        std::max(analytic_max, std::abs(px_operator(expo, x, grad, hess)));
                    fd_max = std::max(fd_max,
                                      std::abs(divergence_form_residual(expo, grad_fn, x)));
                }
            }
    json report = {{"target", "px-sharp"},
                   {"analytic_max", analytic_max},
                   {"fd_divergence_max", fd_max},
                   {"pass", analytic_max == 0.0 && fd_max <= 1e-8}};
    write_file(dir / (s.name + "_px_sharp.json"), report.dump(2));
    std::cout << report.dump(2) << "\n";
    return report["pass"].get<bool>() ? 0 : 1;
}

int verify_1d(const Scenario& s, const fs::path& dir) {
    const json v = s.raw.at("verify");
    const std::string family_name = v.value("family", "log-pos");
    Solution1D family;
    if (family_name == "log-pos")
        family = Solution1D::LogPosCheck;
    else if (family_name == "log-neg")
        family = Solution1D::LogNegCheck;
    else if (family_name == "sista1")
        family = Solution1D::Sista1;
    else if (family_name == "sista2")
        family = Solution1D::Sista2;
    else
        throw config_error("unknown 1d-solution family: " + family_name);

    Params1D params;
    params.nu = v.value("nu", 0.5);
    params.M = v.value("M", 0.5);
    params.A = v.value("A", 1.0);
    const auto grid = parse_grid(v.value("grid", json::object()), 0.01, 5.0, 256);
    const ResidualReport report = verify_1d_solution(family, params, grid);
    write_file(dir / (s.name + "_1d_solution.json"), report.to_json());
    std::cout << report.to_json() << "\n";
    return report.pass ? 0 : 1;
}

int cmd_verify(const Options& opt) {
    const Scenario s = Scenario::load(opt.scenario, opt.gamma_multiplier, opt.tol);
    const fs::path dir(opt.out);
    fs::create_directories(dir);
    if (!s.raw.contains("verify")) throw config_error("scenario has no verify section");
    const std::string target = s.raw.at("verify").value("target", "");
    if (target == "barrier") return verify_barrier(s, dir);
    if (target == "px-sharp") return verify_px_sharp(s, dir);
    if (target == "1d-solution") return verify_1d(s, dir);
    throw config_error("unknown verify target: " + target);
}

int cmd_figures(const Options& opt) {
    const Scenario s = Scenario::load(opt.scenario, opt.gamma_multiplier, opt.tol);
    const fs::path dir(opt.out);
    fs::create_directories(dir);
    if (!s.raw.contains("figures")) throw config_error("scenario has no figures section");

    for (const json& group : s.raw.at("figures")) {
        const std::string kind = group.value("kind", "");
        const double A = group.value("A", 1.0);
        const auto intA = [A](double t) { return A * t; };
        if (kind == "power") {
            const auto ks = group.value("k_list", std::vector<double>{2.0});
            const double nu = group.value("nu", 5.0);
            const auto f_grid = parse_grid(group.value("f_grid", json::object()), 0.0, 10.0, 401);
            const auto u_grid =
                parse_grid(group.value("u_grid", json::object()), 0.01, 1e4, 481);
            for (double k : ks) {
                write_curve(dir, s.name + "_f_k" + num_label(k),
                            tabulate([&](double t) { return f_power(t, k, intA, nu, 0.0); },
                                     f_grid, nu, 0.0));
                write_curve(dir, s.name + "_u_k" + num_label(k),
                            tabulate([&](double x) { return u_power(x, k, A, nu); }, u_grid, nu,
                                     0.0));
            }
            continue;
        }
        const auto nus = group.value("nu_list", std::vector<double>{0.5});
        const auto u_grid = parse_grid(group.value("u_grid", json::object()), 0.0, 5.0, 401);
        if (kind == "logpos" || kind == "logneg") {
            const auto f_grid = parse_grid(group.value("f_grid", json::object()), 0.0, 5.0, 401);
            for (double nu : nus) {
                const auto f = [&](double t) {
                    return kind == "logpos" ? f_logpos(t, intA, nu, 0.0)
                                            : f_logneg(t, intA, nu, 0.0);
                };
                const auto u = [&](double x) {
                    const bool up = kind == "logpos" ? nu <= 1.0 : nu > 1.0;
                    return up ? u_log_up(x, A, nu) : u_log_down(x, A, nu);
                };
                write_curve(dir, s.name + "_" + kind + "_f_nu" + num_label(nu),
                            tabulate(f, f_grid, nu, 0.0));
                write_curve(dir, s.name + "_" + kind + "_u_nu" + num_label(nu),
                            tabulate(u, u_grid, nu, 0.0));
            }
            continue;
        }
        if (kind == "sista1" || kind == "sista2") {
            const Solution1D family =
                kind == "sista1" ? Solution1D::Sista1 : Solution1D::Sista2;
            for (double nu : nus) {
                Params1D params{nu, 0.5, A};
                write_curve(dir, s.name + "_" + kind + "_u_nu" + num_label(nu),
                            tabulate([&](double x) { return solution_1d_value(family, params, x); },
                                     u_grid, nu, 0.0));
            }
            continue;
        }
        throw config_error("unknown figure kind: " + kind);
    }
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Growth estimates for halfspace subsolutions"};
    app.require_subcommand(1);

    Options opt;
    const auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--scenario", opt.scenario, "scenario file or preset name")->required();
        cmd->add_option("--out", opt.out, "output directory");
        cmd->add_option("--gamma-multiplier", opt.gamma_multiplier,
                        "scales the gamma(R) rule");
        double tol_value = 0.0;
        cmd->add_option("--tol", tol_value, "solver relative tolerance override")
            ->each([&opt](const std::string& v) { opt.tol = std::stod(v); });
    };

    auto* solve_cmd = app.add_subcommand("solve", "emit envelope curves as CSV");
    auto* classify_cmd = app.add_subcommand("classify", "growth-law report");
    auto* verify_cmd = app.add_subcommand("verify", "certificate checks");
    auto* figures_cmd = app.add_subcommand("figures", "reference figure curves as CSV");
    for (auto* cmd : {solve_cmd, classify_cmd, verify_cmd, figures_cmd}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(opt);
        if (classify_cmd->parsed()) return cmd_classify(opt);
        if (verify_cmd->parsed()) return cmd_verify(opt);
        if (figures_cmd->parsed()) return cmd_figures(opt);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const unknown_family& e) {
        std::cerr << "unknown family: " << e.what() << "\n";
        return 4;
    } catch (const error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> storage = args;
    std::vector<char*> argv;
    static std::string prog = "growth";
    argv.push_back(prog.data());
    for (auto& a : storage) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace phl::cli
