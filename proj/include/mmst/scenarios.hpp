#pragma once

// Named runs, config-file parsing and CSV / manifest output.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmst/analysis.hpp"
#include "mmst/ensemble.hpp"
#include "mmst/model.hpp"
#include "mmst/sampling.hpp"
#include "mmst/trajectory.hpp"

namespace mmst {

struct AnalysisDirectives {
    std::optional<std::pair<double, double>> fit_window;          ///< exponential fit of the MMST average
    std::optional<std::pair<double, double>> quantum_fit_window;  ///< exponential fit of the quantum reference
    bool fit_fixed_intercept = false;
    bool biexponential = false;
    bool delays = false;
    double delay_smoothing = 0.05;
    std::optional<double> delay_window_end;
    bool derivative = false;  ///< -d rho/dt of the average plus the mean-field overlay
    double derivative_smoothing = 0.05;
    std::size_t coarse_grain = 0;  ///< intensity moving-average width in nodes, 0 = off
};

/// One ensemble (plus optional quantum reference) inside a scenario.
struct ScenarioVariant {
    std::string label;  ///< output subdirectory; empty for single-run scenarios
    SystemConfig config;
    SamplingOptions sampling;
    Propagator propagator = Propagator::fdtd;
    bool quantum = false;
    std::size_t trajectories = 10000;
    std::size_t desk_trajectories = 2000;
    bool fixed_modes = false;  ///< keep the mode set under --desk-scale
    std::vector<double> snapshot_times;
    std::vector<double> phase_space_times;
    bool free_field_control = false;  ///< E^2 - E_free^2 estimator (modes propagator only)
    AnalysisDirectives analysis;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<ScenarioVariant> variants;
};

/// Names of the built-in scenarios.
std::vector<std::string> scenario_names();

/// Built-in scenario at full scale; fig8a, fig8b and fig8c pick a single chain spacing.
/// Throws ConfigError for unknown names.
Scenario catalog_scenario(const std::string& name);

/// Parse an INI-style file with sections [cavity], [tls], [mmst], [run].
Scenario parse_config(const std::filesystem::path& file);
Scenario parse_config_text(const std::string& text, const std::string& name = "config");

/// Arithmetic value with optional symbols: "0.5", "pi/3", "2*pi", "lambda/4", "L/2".
double parse_value(const std::string& text, double omega0, double length);

/// Reduced profile: centred 100-mode set (unless fixed), 1001 nodes, t_final <= 3 pi, desk counts.
void apply_desk_scale(Scenario& scenario);

struct RunOverrides {
    std::optional<std::size_t> trajectories;
    std::optional<Propagator> propagator;
    std::optional<std::string> sampling;
    std::optional<double> gamma;
    bool quantum = false;
};
void apply_overrides(Scenario& scenario, const RunOverrides& overrides);

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    bool desk_scale = false;
    std::ostream* log = nullptr;
};

struct VariantReport {
    std::string label;
    std::size_t trajectories = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::vector<FitResult> fits;
    std::optional<DelayStatistics> delays;
    std::vector<std::string> warnings;
};

struct ScenarioReport {
    std::string name;
    std::vector<VariantReport> variants;
    double wall_seconds = 0.0;
    std::string config_hash;
};

/// Runs every variant and writes CSVs plus manifest.json under options.out_dir.
ScenarioReport run_scenario(const Scenario& scenario, const RunOptions& options);

/// Canonical text of every parameter that affects results; hashed into the manifest.
std::string canonical_description(const Scenario& scenario);
std::string sha256_hex(const std::string& data);

}  // namespace mmst
