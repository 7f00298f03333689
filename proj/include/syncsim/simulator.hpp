#pragma once

// Fixed-step time-domain integration of any ModelKind with scheduled
// parameter-step events, trajectory recording, instability detection and
// damping measurement from waveforms.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "syncsim/core.hpp"
#include "syncsim/dynamics.hpp"

namespace syncsim {

/// A scheduled step change of one scenario parameter. Takes effect exactly
/// at its scheduled time, which must be an integer multiple of the
/// scenario's dt.
struct Event {
    enum class Target { GridInductance, GridVoltage, GridFrequency, CurrentD, CurrentQ };
    double time;  ///< [s], >= 0
    Target target;
    double value;
};

std::string_view event_target_name(Event::Target target);
std::optional<Event::Target> event_target_from_name(std::string_view name);

using ControllerGains = std::variant<PiPllGains, IpllGains>;

struct Scenario {
    ModelKind model;
    GridParams grid;
    InverterSetpoint setpoint;
    ControllerGains gains;
    SyncState initial;  ///< (delta, omega); mapped onto the integrator state for PllSignal
    double duration;    ///< [s]
    double dt = 50e-6;  ///< integration step [s]
    int decimation = 10;        ///< record every decimation-th step
    std::vector<Event> events;  ///< sorted by time, unique times
};

/// Structural checks: positive duration, 0 < dt <= duration, gains variant
/// matching the model kind, events sorted/unique/on-step, and every
/// post-event parameter set passing core validation.
std::vector<Violation> validate(const Scenario& scenario);

struct TrajectoryRow {
    double t;          ///< [s]
    double delta_pll;  ///< [rad]
    double omega_pll;  ///< [rad/s]; resolved algebraic-loop value for PllSignal
    double u_q;        ///< [V]
    double l_g;        ///< active grid inductance [H]
};

struct StabilityVerdict {
    enum class Kind { Settled, Diverged, Marginal };
    Kind kind = Kind::Marginal;
    double settle_time = 0.0;  ///< Settled: first time the band holds to the end [s]
    double final_delta = 0.0;  ///< Settled: last recorded angle [rad]
    double detect_time = 0.0;  ///< Diverged: time of detection [s]
    std::string reason;        ///< Diverged: what was detected
};

std::string_view verdict_name(StabilityVerdict::Kind kind);

/// Uniformly sampled record of one run (spacing dt * decimation).
struct Trajectory {
    ModelKind model;
    std::vector<TrajectoryRow> rows;
    StabilityVerdict verdict;
};

/// Classic 4th-order fixed-step integration. Deterministic for identical
/// scenarios. A non-finite state aborts the run and returns the partial
/// trajectory with a Diverged verdict; the final verdict is otherwise
/// computed by detect_instability against the post-event parameters.
/// Throws ScenarioError when validate(scenario) reports violations.
Trajectory integrate(const Scenario& scenario);

/// Classifies a recorded trajectory:
///   Diverged - |delta| exceeds pi (loss of synchronism), or the envelope of
///              |delta - delta_ref| grows over 3 consecutive detected peaks
///              by more than 1%;
///   Settled  - |delta - delta_final| stays within 1e-3 rad over the last
///              10% of the run and |u_g*sin(delta_final) - p_in| < 2e-3*u_g;
///   Marginal - neither.
/// delta_ref is the equilibrium angle asin(p_in/u_g) (clamped to +-pi/2
/// when no equilibrium exists).
StabilityVerdict detect_instability(const Trajectory& trajectory, double p_in, double u_g);

struct DampingEstimate {
    double omega_d_est;  ///< pi / mean inter-extremum interval [rad/s]
    double zeta_est;     ///< log-decrement estimate (negative for growth)
    int n_peaks_used;
};

/// Ring-frequency and damping-ratio estimate from the extrema of
/// delta - delta_final, parabolic-refined, noise floor 1e-9 rad.
/// Throws InsufficientOscillationError with fewer than 3 extrema.
DampingEstimate measure_damping(const Trajectory& trajectory);

/// Canned grid-strength study: both reduced models at each listed grid
/// inductance, starting from that inductance's equilibrium with an initial
/// angle offset.
struct GridStrengthStudy {
    GridParams grid_template;  ///< l_g is overridden per run
    InverterSetpoint setpoint;
    PiPllGains pll;   ///< held fixed across all grid strengths
    IpllGains ipll;   ///< held fixed across all grid strengths
    std::vector<double> l_g_values = {8.8e-3, 9.5e-3, 10.3e-3, 11.25e-3};
    double delta_offset = 0.1;  ///< initial angle disturbance [rad]
    double duration = 3.0;
    double dt = 50e-6;
    int decimation = 10;
};

struct GridStrengthRun {
    double l_g;
    ModelKind model;
    Trajectory trajectory;
};

/// Runs the study: for each l_g, PllReduced then IpllReduced, ordered by
/// l_g. Throws NoEquilibriumError if any listed inductance is infeasible.
std::vector<GridStrengthRun> run_figure6_suite(const GridStrengthStudy& study);

}  // namespace syncsim
