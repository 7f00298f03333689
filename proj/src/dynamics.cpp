#include "syncsim/dynamics.hpp"

#include <cmath>

#include "syncsim/analysis.hpp"

namespace syncsim {

namespace {
constexpr double kSingularInertiaEps = 1e-12;
}

std::string_view model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::PllReduced: return "pll_reduced";
        case ModelKind::IpllReduced: return "ipll_reduced";
        case ModelKind::PllSignal: return "pll_signal";
        case ModelKind::IpllSignal: return "ipll_signal";
    }
    return "unknown";
}

std::optional<ModelKind> model_from_name(std::string_view name) {
    if (name == "pll_reduced") return ModelKind::PllReduced;
    if (name == "ipll_reduced") return ModelKind::IpllReduced;
    if (name == "pll_signal") return ModelKind::PllSignal;
    if (name == "ipll_signal") return ModelKind::IpllSignal;
    return std::nullopt;
}

double pcc_uq(const GridParams& grid, const InverterSetpoint& setpoint, double delta,
              double omega_pll) {
    return omega_pll * grid.l_g * setpoint.i_dref + grid.r_g * setpoint.i_qref -
           grid.u_g * std::sin(delta);
}

StateDerivative pll_reduced_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                const PiPllGains& gains, const SyncState& state) {
    const auto coeffs = pll_coefficients(grid, setpoint, gains, state.delta_pll);
    const double deviation = state.omega_pll - grid.omega_g;
    const double torque = driving_term(grid, setpoint) - grid.u_g * std::sin(state.delta_pll) -
                          coeffs.d_e * deviation;
    return StateDerivative{deviation, torque / coeffs.j_e};
}

StateDerivative ipll_reduced_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                 const IpllGains& gains, const SyncState& state) {
    const double d_e = gains.d - grid.l_g * setpoint.i_dref;
    const double deviation = state.omega_pll - grid.omega_g;
    const double torque =
        driving_term(grid, setpoint) - grid.u_g * std::sin(state.delta_pll) - d_e * deviation;
    return StateDerivative{deviation, gains.j * torque};
}

StateDerivative pll_signal_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                               const PiPllGains& gains, const SignalPllState& state) {
    const double omega_pll = pll_signal_omega(grid, setpoint, gains, state);
    const double u_q = pcc_uq(grid, setpoint, state.delta_pll, omega_pll);
    return StateDerivative{omega_pll - grid.omega_g, gains.k_ipll * u_q};
}

StateDerivative ipll_signal_rhs(const GridParams& grid, const InverterSetpoint& setpoint,
                                const IpllGains& gains, const SyncState& state) {
    const double u_q = pcc_uq(grid, setpoint, state.delta_pll, state.omega_pll);
    return StateDerivative{state.omega_pll - grid.omega_g,
                           gains.j * (u_q - gains.d * (state.omega_pll - grid.omega_0))};
}

double pll_signal_omega(const GridParams& grid, const InverterSetpoint& setpoint,
                        const PiPllGains& gains, const SignalPllState& state) {
    const double denom = 1.0 - gains.k_ppll * grid.l_g * setpoint.i_dref;
    if (std::abs(denom) < kSingularInertiaEps) throw SingularInertiaError();
    return (grid.omega_0 + state.x_int +
            gains.k_ppll * (grid.r_g * setpoint.i_qref - grid.u_g * std::sin(state.delta_pll))) /
           denom;
}

SignalPllState pll_signal_state_from_sync(const GridParams& grid,
                                          const InverterSetpoint& setpoint,
                                          const PiPllGains& gains, const SyncState& state) {
    const double u_q = pcc_uq(grid, setpoint, state.delta_pll, state.omega_pll);
    return SignalPllState{state.delta_pll, state.omega_pll - grid.omega_0 - gains.k_ppll * u_q};
}

}  // namespace syncsim
