#include "syncsim/core.hpp"

#include <cmath>

namespace syncsim {

namespace {

// Tolerance for the singular-inertia rejection |1 - k_ppll*l_g*i_dref| below
// which the equivalent inertia is treated as numerically singular.
constexpr double kSingularInertiaEps = 1e-12;

bool finite(double x) { return std::isfinite(x); }

void require_finite(std::vector<Violation>& out, const char* field, double value) {
    if (!finite(value)) out.push_back({field, "must be finite"});
}

}  // namespace

double grid_impedance_magnitude(const GridParams& grid) {
    return std::hypot(grid.r_g, grid.omega_g * grid.l_g);
}

double driving_term(const GridParams& grid, const InverterSetpoint& setpoint) {
    return grid.omega_g * grid.l_g * setpoint.i_dref + grid.r_g * setpoint.i_qref;
}

double scr_from_grid(const GridParams& grid, double rated_current) {
    if (rated_current <= 0.0) throw Error("rated_current must be positive");
    const double z = grid_impedance_magnitude(grid);
    if (z == 0.0) throw ZeroImpedanceError();
    return grid.u_g / (z * rated_current);
}

GridParams grid_from_scr(double scr, double u_g, double omega_g, double rated_current,
                         double r_g) {
    if (scr <= 0.0) throw Error("scr must be positive");
    if (rated_current <= 0.0) throw Error("rated_current must be positive");
    const double z_required = u_g / (scr * rated_current);
    if (r_g > z_required) throw InfeasibleScrError(scr, r_g);
    const double x = std::sqrt(z_required * z_required - r_g * r_g);
    return GridParams{u_g, omega_g, omega_g, x / omega_g, r_g};
}

std::vector<Violation> validate(const GridParams& grid) {
    std::vector<Violation> out;
    require_finite(out, "u_g", grid.u_g);
    require_finite(out, "omega_g", grid.omega_g);
    require_finite(out, "omega_0", grid.omega_0);
    require_finite(out, "l_g", grid.l_g);
    require_finite(out, "r_g", grid.r_g);
    if (!out.empty()) return out;
    if (grid.u_g <= 0.0) out.push_back({"u_g", "must be > 0 (peak phase volts)"});
    if (grid.omega_g <= 0.0) out.push_back({"omega_g", "must be > 0"});
    if (grid.omega_0 <= 0.0) out.push_back({"omega_0", "must be > 0"});
    if (grid.l_g < 0.0) out.push_back({"l_g", "must be >= 0"});
    if (grid.r_g < 0.0) out.push_back({"r_g", "must be >= 0"});
    return out;
}

std::vector<Violation> validate(const InverterSetpoint& setpoint) {
    std::vector<Violation> out;
    require_finite(out, "i_dref", setpoint.i_dref);
    require_finite(out, "i_qref", setpoint.i_qref);
    return out;
}

std::vector<Violation> validate(const GridParams& grid, const InverterSetpoint& setpoint,
                                const PiPllGains& gains) {
    std::vector<Violation> out = validate(grid);
    auto sp = validate(setpoint);
    out.insert(out.end(), sp.begin(), sp.end());
    require_finite(out, "k_ppll", gains.k_ppll);
    require_finite(out, "k_ipll", gains.k_ipll);
    if (!out.empty()) return out;
    if (gains.k_ppll < 0.0) out.push_back({"k_ppll", "must be >= 0"});
    if (gains.k_ipll <= 0.0) out.push_back({"k_ipll", "must be > 0"});
    if (std::abs(1.0 - gains.k_ppll * grid.l_g * setpoint.i_dref) < kSingularInertiaEps)
        out.push_back({"k_ppll", "singular inertia: k_ppll*l_g*i_dref = 1"});
    return out;
}

std::vector<Violation> validate(const GridParams& grid, const InverterSetpoint& setpoint,
                                const IpllGains& gains) {
    std::vector<Violation> out = validate(grid);
    auto sp = validate(setpoint);
    out.insert(out.end(), sp.begin(), sp.end());
    require_finite(out, "j", gains.j);
    require_finite(out, "d", gains.d);
    if (!out.empty()) return out;
    if (gains.j <= 0.0) out.push_back({"j", "must be > 0"});
    if (gains.d < 0.0) out.push_back({"d", "must be >= 0"});
    return out;
}

}  // namespace syncsim
