#pragma once

// Continuous-time right-hand sides of the four synchronization models:
// the reduced second-order PI-PLL and IPLL loops, and their signal-level
// (u_q-driven) block-diagram counterparts, plus the PCC q-axis voltage.
//
// All right-hand sides are total functions of (parameters, state) with
// parameters passed per call, so a simulator can apply parameter-step
// events without hidden state.

#include <optional>
#include <string_view>

#include "syncsim/core.hpp"

namespace syncsim {

enum class ModelKind {
    PllReduced,   ///< reduced second-order PI-PLL loop in (delta, omega)
    IpllReduced,  ///< reduced second-order IPLL loop in (delta, omega)
    PllSignal,    ///< signal-level PI-PLL in (delta, x_int)
    IpllSignal,   ///< signal-level IPLL in (delta, omega)
};

std::string_view model_name(ModelKind kind);
std::optional<ModelKind> model_from_name(std::string_view name);

/// Time derivative of a model's state pair. d_aux is d(omega_pll)/dt
/// [rad/s^2] for all models except PllSignal, where it is the integrator
/// rate d(x_int)/dt.
struct StateDerivative {
    double d_delta;  ///< d(delta_pll)/dt [rad/s]
    double d_aux;
};

/// PCC q-axis voltage in the PLL frame:
///   u_q = omega_pll*l_g*i_dref + r_g*i_qref - u_g*sin(delta)
/// Zero at the equilibrium (delta0, omega_g).
double pcc_uq(const GridParams& grid, const InverterSetpoint& setpoint, double delta,
              double omega_pll);

/// Reduced PI-PLL loop:
///   d(delta)/dt = omega - omega_g
///   j_e * d(omega)/dt = p_in - u_g*sin(delta) - d_e(delta)*(omega - omega_g)
/// with j_e and d_e(delta) as in pll_coefficients at the instantaneous
/// angle. Throws SingularInertiaError.
StateDerivative pll_reduced_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                const PiPllGains& gains, const SyncState& state);

/// Reduced IPLL loop:
///   (1/j) * d(omega)/dt = p_in - u_g*sin(delta) - (d - l_g*i_dref)*(omega - omega_g)
/// The damping factor is state-independent.
StateDerivative ipll_reduced_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                 const IpllGains& gains, const SyncState& state);

/// Signal-level PI-PLL. The PI law omega_pll = omega_0 + k_ppll*u_q + x_int
/// closes an algebraic loop through u_q(omega_pll); it is resolved in
/// closed form (see pll_signal_omega). Throws SingularInertiaError when the
/// loop is unsolvable, the same condition as the reduced model's inertia
/// denominator.
StateDerivative pll_signal_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                               const PiPllGains& gains, const SignalPllState& state);

/// Signal-level IPLL:
///   d(omega)/dt = j * (u_q - d*(omega - omega_0))
///   d(delta)/dt = omega - omega_g
/// The damping branch references the nominal omega_0 (the actual grid
/// frequency is not available to a controller); for omega_g = omega_0 this
/// is algebraically identical to ipll_reduced_rhs.
StateDerivative ipll_signal_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                const IpllGains& gains, const SyncState& state);

/// Resolved PLL frequency of the signal-level PI model:
///   omega_pll = (omega_0 + x_int + k_ppll*(r_g*i_qref - u_g*sin(delta)))
///               / (1 - k_ppll*l_g*i_dref)
double pll_signal_omega(const GridParams& grid, const InverterSetpoint& setpoint,
                        const PiPllGains& gains, const SignalPllState& state);

/// Integrator state that makes the resolved frequency equal state.omega_pll:
/// x_int = omega_pll - omega_0 - k_ppll*u_q(delta, omega_pll). Inverse of
/// pll_signal_omega under the (delta, omega) <-> (delta, x_int) state map.
SignalPllState pll_signal_state_from_sync(const GridParams& grid,
                                          const InverterSetpoint& setpoint,
                                          const PiPllGains& gains, const SyncState& state);

}  // namespace syncsim
