#pragma once

// Human-facing surface: JSON study configuration with defaults, CSV
// emission for trajectories and sweeps, and textual analysis reports.
//
// Config files are flat, typed key/value JSON. Keys carry SI unit suffixes
// (l_g_henry, dt_s, ...) so millihenry-vs-henry mistakes fail loudly.

#include <optional>
#include <string>
#include <vector>

#include "syncsim/analysis.hpp"
#include "syncsim/core.hpp"
#include "syncsim/simulator.hpp"

namespace syncsim {

/// A fully resolved study description. Every field has a documented default
/// (applied by parse_config and echoed back), so any run is reproducible
/// from its own metadata.
struct StudyConfig {
    GridParams grid{311.0, kNominalOmega, kNominalOmega, 4.1e-3, 0.0};
    InverterSetpoint setpoint{80.0, 0.0};
    double rated_current = 80.0;  ///< reference current for SCR [A]
    std::optional<PiPllGains> pll;
    IpllGains ipll{20.0, 2.0};
    double k_fluct = 2.0;
    ModelKind model = ModelKind::IpllReduced;
    double duration = 1.0;
    double dt = 50e-6;
    int decimation = 10;
    double initial_delta_offset = 0.1;  ///< added to the equilibrium angle [rad]
    double initial_omega_offset = 0.0;  ///< added to omega_g [rad/s]
    std::vector<Event> events;
    double sweep_l_min = 1e-3;   ///< [H]
    double sweep_l_max = 12e-3;  ///< [H]
    int sweep_points = 111;
    std::string csv_path;  ///< empty: subcommand default
    std::string svg_path;  ///< empty: no plot
};

/// Parses JSON text into a StudyConfig. Unknown keys and wrong types raise
/// ParseError naming the key; invariant violations raise
/// ConfigValidationError with the full violation list.
StudyConfig parse_config(const std::string& text);

/// The fully resolved configuration as single-line JSON (defaults included).
std::string config_to_json(const StudyConfig& config);

/// Invariant checks over a parsed/assembled config (empty result = OK).
std::vector<Violation> validate(const StudyConfig& config);

/// CSV with header `t_s,delta_pll_rad,omega_pll_rad_s,u_q_v,l_g_henry,model`
/// and one full-precision scientific-notation row per trajectory sample.
/// Byte-stable for identical input.
std::string emit_trajectory_csv(const Trajectory& trajectory);

/// CSV with header
/// `l_g_henry,scr,delta0_rad,d_e_pll,d_e_ipll,j_e_pll,j_e_ipll,equilibrium_exists`.
std::string emit_sweep_csv(const std::vector<SweepRow>& rows);

/// Per-controller analysis summary.
struct ControllerReport {
    std::string name;
    EquivalentCoefficients coeffs;
    Eigenpair eigen;
    std::optional<SecondOrderCharacteristics> characteristics;  ///< absent if j_e <= 0
    std::string verdict;  ///< "stable" | "unstable" | "marginal" from eigenvalue signs
};

/// Aggregated analysis of one operating point.
struct Report {
    OperatingPoint op;
    PiPllGains pll_gains;
    bool pll_gains_mapped;  ///< true when PI gains were derived from the IPLL pair
    IpllGains ipll_gains;
    ControllerReport pll;
    ControllerReport ipll;
    DampingBounds bounds;
};

/// Builds the full Report for the configured operating point. PI gains are
/// taken from the config or, when absent, mapped from the IPLL pair. The
/// damping-bounds envelope is the configured operating point itself.
/// Throws NoEquilibriumError / DegenerateAngleError.
Report analyze_study(const StudyConfig& config);

/// Plain-text rendering; every numeric field carries its unit.
std::string format_report(const Report& report);

}  // namespace syncsim
