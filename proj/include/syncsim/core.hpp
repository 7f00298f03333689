#pragma once

// Shared physical-parameter and state types for the synchronization models,
// with unit conventions, invariant validation and SCR conversions.
//
// Unit conventions used throughout the library:
//   - voltages are peak per-phase volts (311 V corresponds to a 220 V-RMS phase),
//   - currents are peak amps,
//   - angular frequencies are rad/s, inductances henry, resistances ohm.

#include <complex>
#include <numbers>
#include <vector>

#include "syncsim/errors.hpp"

namespace syncsim {

inline constexpr double kPi = std::numbers::pi;

/// Nominal grid angular frequency of a 50 Hz system [rad/s].
inline constexpr double kNominalOmega = 100.0 * kPi;

/// Grid source and series impedance seen from the PCC.
struct GridParams {
    double u_g;      ///< grid voltage amplitude, peak phase volts [V]
    double omega_g;  ///< actual grid angular frequency [rad/s]
    double omega_0;  ///< nominal angular frequency [rad/s]
    double l_g;      ///< grid inductance [H]
    double r_g;      ///< grid resistance [Ohm]
};

/// Current references tracked by the (ideal) inner current loop.
struct InverterSetpoint {
    double i_dref;  ///< d-axis current reference, peak amps [A]; > 0 exports power
    double i_qref;  ///< q-axis current reference, peak amps [A]
};

/// PI-type PLL controller parameters.
struct PiPllGains {
    double k_ppll;  ///< proportional gain [rad/(V*s)]
    double k_ipll;  ///< integral gain [rad/(V*s^2)]
};

/// Pure-integral PLL with damping branch.
struct IpllGains {
    double j;  ///< integrator gain; reciprocal of the equivalent inertia [rad/(V*s^2)]
    double d;  ///< damping-branch feedback gain [V*s/rad]
};

/// State pair of the reduced second-order synchronization models.
struct SyncState {
    double delta_pll;  ///< virtual power angle: PCC phase minus grid phase [rad]
    double omega_pll;  ///< PLL angular frequency [rad/s]
};

/// State pair of the signal-level PI-type PLL in block-diagram form: the
/// integrator branch accumulates k_ipll * integral(u_q).
struct SignalPllState {
    double delta_pll;  ///< virtual power angle [rad]
    double x_int;      ///< PI integrator state [rad/s]
};

/// Equivalent inertia and damping of the second-order synchronization
/// equation. d_e = d_e1 - d_e2 always; d_e2 is the inherent negative
/// component l_g * i_dref.
struct EquivalentCoefficients {
    double j_e;
    double d_e;
    double d_e1;
    double d_e2;
};

/// Steady-state operating point of the synchronization loop.
struct OperatingPoint {
    double delta0;  ///< equilibrium power angle, principal branch (-pi/2, pi/2) [rad]
    double p_in;    ///< driving term omega_g*l_g*i_dref + r_g*i_qref [V]
    double scr;     ///< short-circuit ratio at the setpoint's d-axis current
    bool marginal;  ///< true when |p_in| = u_g exactly (delta0 = +-pi/2)
};

/// Eigenvalues of the linearized second-order loop [1/s].
struct Eigenpair {
    std::complex<double> lambda1;
    std::complex<double> lambda2;
    bool is_conjugate;  ///< true iff the pair is complex conjugate (underdamped)
};

/// |r_g + j*omega_g*l_g| [Ohm].
double grid_impedance_magnitude(const GridParams& grid);

/// Driving term p_in = omega_g*l_g*i_dref + r_g*i_qref [V].
double driving_term(const GridParams& grid, const InverterSetpoint& setpoint);

/// Short-circuit ratio at `rated_current`: u_g / (|Z_g| * rated_current).
/// Throws ZeroImpedanceError when l_g = r_g = 0.
double scr_from_grid(const GridParams& grid, double rated_current);

/// Inverse of scr_from_grid: builds the grid whose impedance magnitude
/// realizes `scr` at `rated_current`, keeping the given r_g.
/// The result uses omega_0 = omega_g. Throws InfeasibleScrError when r_g
/// alone exceeds the required impedance magnitude.
GridParams grid_from_scr(double scr, double u_g, double omega_g, double rated_current, double r_g);

/// Invariant checks. Empty result means OK; violations are collected,
/// never thrown.
std::vector<Violation> validate(const GridParams& grid);
std::vector<Violation> validate(const InverterSetpoint& setpoint);
std::vector<Violation> validate(const GridParams& grid, const InverterSetpoint& setpoint,
                                const PiPllGains& gains);
std::vector<Violation> validate(const GridParams& grid, const InverterSetpoint& setpoint,
                                const IpllGains& gains);

}  // namespace syncsim
