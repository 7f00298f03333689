#pragma once

// Closed-form stability analysis of the synchronization loop: equilibria,
// equivalent inertia/damping coefficients, eigenvalues, damping design
// bounds, PI-PLL <-> IPLL gain mapping, impedance sweeps and the critical
// grid-inductance search.

#include <optional>
#include <span>
#include <vector>

#include "syncsim/core.hpp"

namespace syncsim {

/// Design bounds on the IPLL damping gain D.
struct DampingBounds {
    double lower_exact;         ///< max of l_g*i_dref over the operating envelope [V*s/rad]
    double lower_conservative;  ///< k_fluct * u_g / omega_0 [V*s/rad]
    double upper;               ///< 2*sqrt(j_e*u_g*cos(delta_0)): conjugate-roots limit
    double k_fluct;             ///< voltage fluctuation coefficient used
};

/// One row of a grid-inductance sweep. Angle-dependent fields are NaN when
/// no equilibrium exists at that inductance.
struct SweepRow {
    double l_g;
    double scr;
    double delta0;
    double d_e_pll;
    double d_e_ipll;
    double j_e_pll;
    double j_e_ipll;
    bool equilibrium_exists;
};

/// Natural frequency, damping ratio and damped frequency of the linearized
/// loop. omega_d is 0 when zeta >= 1 (no oscillatory mode).
struct SecondOrderCharacteristics {
    double omega_n;  ///< [rad/s]
    double zeta;
    double omega_d;  ///< [rad/s]
};

/// Root of d_e(l_g) = 0. `equilibrium_exists` is false when the root lies
/// beyond the equilibrium-existence boundary.
struct CriticalImpedance {
    double l_g;
    bool equilibrium_exists;
};

/// One operating point of a damping design envelope.
struct EnvelopePoint {
    GridParams grid;
    InverterSetpoint setpoint;
};

/// Solves u_g*sin(delta0) = p_in on the principal branch (-pi/2, pi/2).
/// |p_in| = u_g returns the marginal point delta0 = +-pi/2 flagged marginal.
/// Throws NoEquilibriumError (carrying |p_in| - u_g) when |p_in| > u_g.
OperatingPoint solve_equilibrium(const GridParams& grid, const InverterSetpoint& setpoint);

/// Non-throwing variant for sweeps: nullopt when no equilibrium exists.
std::optional<OperatingPoint> try_solve_equilibrium(const GridParams& grid,
                                                    const InverterSetpoint& setpoint);

/// Equivalent coefficients of the PI-PLL loop at power angle `delta`:
///   j_e  = (1 - k_ppll*l_g*i_dref) / k_ipll
///   d_e1 = k_ppll*u_g*cos(delta) / k_ipll
///   d_e2 = l_g*i_dref
/// Throws SingularInertiaError when k_ppll*l_g*i_dref = 1.
EquivalentCoefficients pll_coefficients(const GridParams& grid, const InverterSetpoint& setpoint,
                                        const PiPllGains& gains, double delta);

/// Equivalent coefficients of the IPLL loop: j_e = 1/j, d_e = d - l_g*i_dref.
/// Takes no angle argument; the damping is structurally decoupled from it.
EquivalentCoefficients ipll_coefficients(const GridParams& grid, const InverterSetpoint& setpoint,
                                         const IpllGains& gains);

/// Eigenvalues of j_e*s^2 + d_e*s + u_g*cos(delta0):
///   lambda = (-d_e +- sqrt(d_e^2 - 4*j_e*u_g*cos(delta0))) / (2*j_e)
/// is_conjugate is exactly the condition d_e^2 < 4*j_e*u_g*cos(delta0).
Eigenpair eigenvalues(const EquivalentCoefficients& coeffs, const GridParams& grid,
                      double delta0);

/// Damping design bounds for the IPLL:
///   lower_exact        = max over `envelope` of l_g*i_dref,
///   lower_conservative = k_fluct*u_g/omega_0 (of `grid`),
///   upper              = 2*sqrt((1/j)*u_g*cos(delta0)) at (grid, setpoint).
/// Throws EmptyEnvelopeError; NoEquilibriumError propagates from any
/// envelope point (or the queried point) without an equilibrium.
DampingBounds damping_bounds(const GridParams& grid, const InverterSetpoint& setpoint,
                             const IpllGains& gains, std::span<const EnvelopePoint> envelope,
                             double k_fluct);

/// PI gains that reproduce the IPLL's equivalent coefficients at the
/// operating point of (grid, setpoint):
///   k_ppll = d*k_ipll/(u_g*cos(delta0))
///   k_ipll = j*u_g*cos(delta0)/(u_g*cos(delta0) + j*d*l_g*i_dref)
/// Throws NoEquilibriumError or DegenerateAngleError (cos(delta0) = 0).
PiPllGains map_ipll_to_pll(const IpllGains& ipll, const GridParams& grid,
                           const InverterSetpoint& setpoint);

/// Evaluates both controllers' coefficients over a uniform l_g grid of
/// `n_points` spanning [l_min, l_max], gains held fixed. Rows past the
/// equilibrium-existence boundary are flagged, not dropped.
std::vector<SweepRow> damping_sweep(const GridParams& grid_template,
                                    const InverterSetpoint& setpoint, const PiPllGains& pll,
                                    const IpllGains& ipll, double l_min, double l_max,
                                    int n_points);

/// Bisection root of the PI-PLL's d_e(l_g) over [l_min, l_max].
/// Throws NotBracketedError when d_e has the same sign at both endpoints,
/// NoEquilibriumError when an endpoint lies beyond the existence boundary.
CriticalImpedance critical_impedance(const GridParams& grid_template,
                                     const InverterSetpoint& setpoint, const PiPllGains& pll,
                                     double l_min, double l_max);

/// Closed-form root of the IPLL's d_e(l_g) = d - l_g*i_dref, with a flag
/// for whether an equilibrium still exists there.
CriticalImpedance ipll_critical_impedance(const GridParams& grid_template,
                                          const InverterSetpoint& setpoint,
                                          const IpllGains& ipll);

/// omega_n = sqrt(u_g*cos(delta0)/j_e), zeta = d_e/(2*sqrt(j_e*u_g*cos(delta0))),
/// omega_d = omega_n*sqrt(1 - zeta^2) for zeta < 1.
/// Throws DegenerateAngleError when cos(delta0) <= 0.
SecondOrderCharacteristics second_order_characteristics(const EquivalentCoefficients& coeffs,
                                                        const GridParams& grid, double delta0);

}  // namespace syncsim
