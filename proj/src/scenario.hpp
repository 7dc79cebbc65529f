#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "phl/ode.hpp"
#include "phl/profiles.hpp"

namespace phl {

/// Parsed scenario configuration document.
struct Scenario {
    std::string name;
    GrowthProfile profile = GrowthProfile::zero();
    Ellipticity ell = Ellipticity::uniform(1.0, 1.0);
    int n = 2;
    RealFn gamma = RealFn::constant(1.0);
    bool gamma_auto = false;
    std::optional<double> K_override;
    std::vector<double> nu_list;
    std::vector<double> k_list;  // optional power-exponent sweep
    double R = 10.0;
    std::vector<double> R_sweep;
    StepControl solver;
    nlohmann::json raw;  // target-specific sections (verify, figures)

    /// Resolves a --scenario argument: a file path, or a named preset.
    static Scenario load(const std::string& ref, double gamma_multiplier,
                         std::optional<double> tol);
    static Scenario from_json_text(const std::string& text, double gamma_multiplier,
                                   std::optional<double> tol);

    /// Profile with the power exponent replaced (for k sweeps).
    GrowthProfile profile_with_k(double k) const;

    OdeProblem problem(const GrowthProfile& phi, double nu, bool with_geometry) const;
};

/// Built-in scenario documents shipped with the tool.
const std::vector<std::string>& preset_names();
std::string preset_text(const std::string& name);

}  // namespace phl
