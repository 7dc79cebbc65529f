#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "phl/errors.hpp"
#include "phl/growth.hpp"

namespace phl {

namespace {

using json = nlohmann::json;

RealFn parse_real_fn(const json& v, const char* what) {
    if (v.is_number()) return RealFn::constant(v.get<double>());
    if (v.is_object()) {
        const std::string type = v.value("type", "");
        if (type == "inverse-power") {
            const double c = v.at("c").get<double>();
            const double a = v.at("a").get<double>();
            return RealFn::of([c, a](double t) { return c / std::pow(1.0 + t, a); });
        }
        if (type == "power-growth") {
            const double c = v.at("c").get<double>();
            const double a = v.at("a").get<double>();
            return RealFn::of([c, a](double t) { return c * std::pow(1.0 + t, a); });
        }
    }
    throw config_error(std::string("unsupported function spec for ") + what);
}

GrowthProfile parse_profile(const json& p) {
    const std::string family = p.at("family").get<std::string>();
    if (family == "zero") return GrowthProfile::zero();
    if (family == "power")
        return GrowthProfile::power(p.at("k").get<double>(),
                                    parse_real_fn(p.value("C", json(1.0)), "C"));
    if (family == "log-pos")
        return GrowthProfile::log_pos(parse_real_fn(p.value("C", json(1.0)), "C"));
    if (family == "log-neg") return GrowthProfile::log_neg();
    if (family == "custom-power") {
        const double a = p.at("a").get<double>();
        return GrowthProfile::custom([a](double, double s) { return std::pow(s, a); },
                                     GrowthProfile::Sign::nonnegative);
    }
    throw config_error("unknown profile family: " + family);
}

}  // namespace

GrowthProfile Scenario::profile_with_k(double k) const {
    if (const auto* pw = profile.as_power()) return GrowthProfile::power(k, pw->C);
    return profile;
}

OdeProblem Scenario::problem(const GrowthProfile& phi, double nu, bool with_geometry) const {
    OdeProblem p;
    p.phi = phi;
    p.ell = ell;
    p.nu = nu;
    p.R = R;
    if (with_geometry) {
        p.geom = Geometry::of(n, gamma);
        p.K_override = K_override;
    }
    p.variant = (phi.is_power() || phi.is_log_pos() || phi.is_log_neg())
                    ? OdeVariant::SeparableMajorant
                    : OdeVariant::AsWritten;
    return p;
}

Scenario Scenario::from_json_text(const std::string& text, double gamma_multiplier,
                                  std::optional<double> tol) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("scenario JSON parse failure: ") + e.what());
    }
    try {
        Scenario s;
        s.raw = doc;
        s.name = doc.value("name", "scenario");
        s.profile = parse_profile(doc.at("profile"));
        const json& e = doc.value("ellipticity", json::object());
        s.ell = Ellipticity::of(parse_real_fn(e.value("lambda", json(1.0)), "lambda"),
                                parse_real_fn(e.value("Lambda", json(1.0)), "Lambda"));
        const json& g = doc.value("geometry", json::object());
        s.n = g.value("n", 2);
        if (s.n < 1) throw config_error("geometry.n must be >= 1");
        if (g.contains("K_override")) s.K_override = g.at("K_override").get<double>();

        s.nu_list = doc.value("nu", std::vector<double>{});
        if (s.nu_list.empty()) throw config_error("the nu list must not be empty");
        s.k_list = doc.value("k_list", std::vector<double>{});
        s.R = doc.value("R", 10.0);

        const json& gr = g.value("gamma", json({{"rule", "proportional"}, {"c", 1.0}}));
        const std::string rule = gr.value("rule", "proportional");
        const double mult = gamma_multiplier;
        if (rule == "proportional") {
            const double c = gr.value("c", 1.0) * mult;
            s.gamma = RealFn::of([c](double R) { return c * R; });
        } else if (rule == "power") {
            const double c = gr.value("c", 1.0) * mult;
            const double p = gr.value("p", 1.0);
            s.gamma = RealFn::of([c, p](double R) { return c * std::pow(R, p); });
        } else if (rule == "constant") {
            const double c = gr.value("c", 1.0) * mult;
            s.gamma = RealFn::constant(c);
        } else if (rule == "auto") {
            GammaRule auto_rule =
                select_gamma(s.profile, s.ell, s.n, s.nu_list.front(), mult);
            s.gamma = auto_rule.gamma;
            s.gamma_auto = true;
        } else {
            throw config_error("unknown gamma rule: " + rule);
        }

        const json& sol = doc.value("solver", json::object());
        s.solver.rel_tol = sol.value("rel_tol", 1e-9);
        s.solver.abs_tol = sol.value("abs_tol", 1e-12);
        s.solver.max_step = sol.value("max_step", 0.02);
        if (tol) {
            s.solver.rel_tol = *tol;
            s.solver.abs_tol = *tol * 1e-3;
        }
        return s;
    } catch (const json::exception& e) {
        throw config_error(std::string("scenario field error: ") + e.what());
    } catch (const param_error& e) {
        throw config_error(std::string("scenario value error: ") + e.what());
    }
}

namespace {

const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> table = {
        {"fig2", R"({
  "name": "fig2",
  "profile": {"family": "power", "k": 2.0, "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "proportional", "c": 1.0}},
  "nu": [5.0],
  "k_list": [1.0, 1.5, 2.0, 3.0, 10.0],
  "R": 10.0,
  "figures": [
    {"kind": "power", "k_list": [1.0, 1.5, 2.0, 3.0, 10.0], "nu": 5.0, "A": 1.0,
     "f_grid": {"lo": 0.0, "hi": 10.0, "points": 401},
     "u_grid": {"lo": 0.01, "hi": 10000.0, "points": 481, "geometric": true}}
  ]
})"},
        {"fig3", R"({
  "name": "fig3",
  "profile": {"family": "log-pos", "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "auto"}},
  "nu": [0.25, 0.5, 1.0, 2.0, 4.0],
  "R": 5.0,
  "figures": [
    {"kind": "logpos", "nu_list": [0.25, 0.5, 1.0, 2.0, 4.0], "A": 1.0,
     "f_grid": {"lo": 0.0, "hi": 5.0, "points": 401},
     "u_grid": {"lo": 0.0, "hi": 5.0, "points": 401}},
    {"kind": "logneg", "nu_list": [0.25, 0.5, 1.0, 2.0, 4.0], "A": 1.0,
     "f_grid": {"lo": 0.0, "hi": 5.0, "points": 401},
     "u_grid": {"lo": 0.0, "hi": 5.0, "points": 401}}
  ]
})"},
        {"fig4", R"({
  "name": "fig4",
  "profile": {"family": "log-pos", "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "auto"}},
  "nu": [0.5, 0.9, 1.0, 1.1, 2.0],
  "R": 5.0,
  "figures": [
    {"kind": "sista1", "nu_list": [0.5, 0.9, 1.0, 1.1, 2.0], "A": 1.0,
     "u_grid": {"lo": 0.0, "hi": 5.0, "points": 401}},
    {"kind": "sista2", "nu_list": [0.5, 0.9, 1.0, 1.1, 2.0], "A": 1.0,
     "u_grid": {"lo": 0.0, "hi": 5.0, "points": 401}}
  ]
})"},
        {"pucci-sublinear", R"({
  "name": "pucci-sublinear",
  "profile": {"family": "power", "k": 2.0, "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "proportional", "c": 1.0}},
  "nu": [1.0],
  "R": 10.0,
  "verify": {"target": "barrier", "operator": "pucci-sublinear", "k": 2.0, "C": 1.0}
})"},
        {"px-laplace", R"({
  "name": "px-laplace",
  "profile": {"family": "log-pos", "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "auto"}},
  "nu": [0.5],
  "R": 5.0,
  "verify": {"target": "1d-solution", "family": "log-pos", "nu": 0.5, "M": 0.5, "A": 1.0,
             "grid": {"lo": 0.01, "hi": 5.0, "points": 256}}
})"},
        {"px-sharp", R"({
  "name": "px-sharp",
  "profile": {"family": "log-pos", "C": 1.0},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 3, "gamma": {"rule": "auto"}},
  "nu": [1.0],
  "R": 5.0,
  "verify": {"target": "px-sharp", "n": 3, "c_list": [1.0, 2.0, 5.0],
             "M0_list": [1.5, 3.0], "Mi_list": [0.0, 1.0]}
})"},
        {"barrier-undersized", R"({
  "name": "barrier-undersized",
  "profile": {"family": "zero"},
  "ellipticity": {"lambda": 1.0, "Lambda": 1.0},
  "geometry": {"n": 2, "gamma": {"rule": "proportional", "c": 0.25}, "K_override": 2.0},
  "nu": [1.0],
  "R": 1.0,
  "verify": {"target": "barrier", "operator": "pucci-sublinear", "k": 2.0, "C": 0.0}
})"},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : preset_table()) out.push_back(k);
        return out;
    }();
    return names;
}

std::string preset_text(const std::string& name) {
    const auto& table = preset_table();
    auto it = table.find(name);
    if (it == table.end()) throw config_error("unknown preset: " + name);
    return it->second;
}

Scenario Scenario::load(const std::string& ref, double gamma_multiplier,
                        std::optional<double> tol) {
    std::ifstream file(ref);
    if (file) {
        std::ostringstream buf;
        buf << file.rdbuf();
        return from_json_text(buf.str(), gamma_multiplier, tol);
    }
    return from_json_text(preset_text(ref), gamma_multiplier, tol);
}

}  // namespace phl
