#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hydrostore/init_reg.hpp"
#include "hydrostore/state.hpp"
#include "hydrostore/stepper.hpp"

namespace hydrostore {

enum class Mode { Run, SteadyCheck, DecayStudy, ConvergenceStudy };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

enum class ProfileKind { Constant, Ramp, Gaussian, Step, Csv };

/// Analytic initial profile, evaluated at the grid nodes. Ramps and steps vary
/// along x; the gaussian bump is radial around (center, center_y).
struct ProfileSpec {
    ProfileKind kind = ProfileKind::Constant;
    double value = 0.0;
    double low = 0.0;
    double high = 1.0;
    double base = 0.0;
    double amplitude = 1.0;
    double center = 0.5;
    double center_y = 0.5;
    double width = 0.1;
    double position = 0.5;
    std::filesystem::path file;  ///< Csv: one value per node in node order
};

inline ProfileSpec constant_profile(double value) {
    ProfileSpec p;
    p.kind = ProfileKind::Constant;
    p.value = value;
    return p;
}

Field evaluate_profile(const ProfileSpec& profile, const GridPtr& grid);

struct GridSpec {
    int dim = 1;
    std::vector<int> cells{128};
    std::vector<double> lengths{1.0};

    GridPtr build() const;
};

/// A fully validated simulation set-up.
///
/// The document is flat `key = value` lines with dotted keys; `#` starts a comment.
/// Unknown keys are rejected. See README.md for the key list and defaults.
struct Scenario {
    GridSpec grid;
    ModelParams model;
    StepperConfig stepper;
    ProfileSpec theta0 = constant_profile(1.0);
    ProfileSpec chi0 = constant_profile(0.5);
    ProfileSpec u0 = constant_profile(1.0);
    int smoothing_n = 100;
    bool positive_theta = true;
    double t_end = 1.0;
    int output_every = 100;
    std::filesystem::path out_dir = "out";
    Mode mode = Mode::Run;
    double steady_deadband = 1e-9;
    std::vector<double> decay_gammas{0.5, 1.0, 2.0};
    int convergence_levels = 3;
    std::vector<double> convergence_nus{1e-2, 1e-3, 1e-4};

    long step_count() const;
    InitialData initial_data() const;
    State initial_state() const;
};

/// Parses and validates a scenario document. `overrides` are `key=value` strings
/// applied on top of the document; relative CSV paths resolve against `base_dir`.
/// Throws ParseError (with line) on syntax errors and ValidationError naming the
/// violated invariant otherwise.
Scenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides = {},
                        const std::filesystem::path& base_dir = {});

Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});

/// Re-checks every Scenario invariant (mode-specific ones included).
void validate(const Scenario& scenario);

}  // namespace hydrostore
