#include "syncsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace syncsim {

namespace {

constexpr double kSingularInertiaEps = 1e-12;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Bisection width below which the critical-impedance search stops. Tight
// enough that |d_e| at the returned root is far below 1e-10 for any slope
// arising in this model family.
constexpr double kBisectionWidth = 1e-13;

double pll_inertia(const GridParams& grid, const InverterSetpoint& setpoint,
                   const PiPllGains& gains) {
    const double denom = 1.0 - gains.k_ppll * grid.l_g * setpoint.i_dref;
    if (std::abs(denom) < kSingularInertiaEps) throw SingularInertiaError();
    return denom / gains.k_ipll;
}

}  // namespace

OperatingPoint solve_equilibrium(const GridParams& grid, const InverterSetpoint& setpoint) {
    const double p_in = driving_term(grid, setpoint);
    if (std::abs(p_in) > grid.u_g) throw NoEquilibriumError(std::abs(p_in) - grid.u_g);
    const bool marginal = std::abs(p_in) == grid.u_g;
    const double delta0 = marginal ? std::copysign(kPi / 2.0, p_in) : std::asin(p_in / grid.u_g);
    const double scr = scr_from_grid(grid, setpoint.i_dref);
    return OperatingPoint{delta0, p_in, scr, marginal};
}

std::optional<OperatingPoint> try_solve_equilibrium(const GridParams& grid,
                                                    const InverterSetpoint& setpoint) {
    if (std::abs(driving_term(grid, setpoint)) > grid.u_g) return std::nullopt;
    return solve_equilibrium(grid, setpoint);
}

EquivalentCoefficients pll_coefficients(const GridParams& grid, const InverterSetpoint& setpoint,
                                        const PiPllGains& gains, double delta) {
    const double j_e = pll_inertia(grid, setpoint, gains);
    const double d_e1 = gains.k_ppll * grid.u_g * std::cos(delta) / gains.k_ipll;
    const double d_e2 = grid.l_g * setpoint.i_dref;
    return EquivalentCoefficients{j_e, d_e1 - d_e2, d_e1, d_e2};
}

EquivalentCoefficients ipll_coefficients(const GridParams& grid, const InverterSetpoint& setpoint,
                                         const IpllGains& gains) {
    const double d_e1 = gains.d;
    const double d_e2 = grid.l_g * setpoint.i_dref;
    return EquivalentCoefficients{1.0 / gains.j, d_e1 - d_e2, d_e1, d_e2};
}

Eigenpair eigenvalues(const EquivalentCoefficients& coeffs, const GridParams& grid,
                      double delta0) {
    const double restoring = grid.u_g * std::cos(delta0);
    const double disc = coeffs.d_e * coeffs.d_e - 4.0 * coeffs.j_e * restoring;
    const double two_je = 2.0 * coeffs.j_e;
    if (disc < 0.0) {
        const std::complex<double> lambda(-coeffs.d_e / two_je, std::sqrt(-disc) / two_je);
        return Eigenpair{lambda, std::conj(lambda), true};
    }
    const double root = std::sqrt(disc);
    return Eigenpair{std::complex<double>((-coeffs.d_e + root) / two_je, 0.0),
                     std::complex<double>((-coeffs.d_e - root) / two_je, 0.0), false};
}

DampingBounds damping_bounds(const GridParams& grid, const InverterSetpoint& setpoint,
                             const IpllGains& gains, std::span<const EnvelopePoint> envelope,
                             double k_fluct) {
    if (envelope.empty()) throw EmptyEnvelopeError();
    double lower_exact = -std::numeric_limits<double>::infinity();
    for (const auto& point : envelope) {
        solve_equilibrium(point.grid, point.setpoint);  // throws if infeasible
        lower_exact = std::max(lower_exact, point.grid.l_g * point.setpoint.i_dref);
    }
    const OperatingPoint op = solve_equilibrium(grid, setpoint);
    const double upper = 2.0 * std::sqrt(grid.u_g * std::cos(op.delta0) / gains.j);
    return DampingBounds{lower_exact, k_fluct * grid.u_g / grid.omega_0, upper, k_fluct};
}

PiPllGains map_ipll_to_pll(const IpllGains& ipll, const GridParams& grid,
                           const InverterSetpoint& setpoint) {
    const OperatingPoint op = solve_equilibrium(grid, setpoint);
    const double restoring = grid.u_g * std::cos(op.delta0);
    if (op.marginal || restoring <= 0.0) throw DegenerateAngleError();
    const double k_ipll =
        ipll.j * restoring / (restoring + ipll.j * ipll.d * grid.l_g * setpoint.i_dref);
    const double k_ppll = ipll.d * k_ipll / restoring;
    return PiPllGains{k_ppll, k_ipll};
}

std::vector<SweepRow> damping_sweep(const GridParams& grid_template,
                                    const InverterSetpoint& setpoint, const PiPllGains& pll,
                                    const IpllGains& ipll, double l_min, double l_max,
                                    int n_points) {
    if (n_points < 2) throw Error("damping_sweep requires n_points >= 2");
    if (!(l_min < l_max)) throw Error("damping_sweep requires l_min < l_max");
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(n_points));
    const double step = (l_max - l_min) / static_cast<double>(n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        GridParams grid = grid_template;
        grid.l_g = l_min + step * static_cast<double>(i);
        SweepRow row{};
        row.l_g = grid.l_g;
        row.scr = scr_from_grid(grid, setpoint.i_dref);
        row.j_e_ipll = 1.0 / ipll.j;
        row.d_e_ipll = ipll.d - grid.l_g * setpoint.i_dref;
        if (auto op = try_solve_equilibrium(grid, setpoint)) {
            const auto pc = pll_coefficients(grid, setpoint, pll, op->delta0);
            row.delta0 = op->delta0;
            row.d_e_pll = pc.d_e;
            row.j_e_pll = pc.j_e;
            row.equilibrium_exists = true;
        } else {
            row.delta0 = kNan;
            row.d_e_pll = kNan;
            row.j_e_pll = kNan;
            row.equilibrium_exists = false;
        }
        rows.push_back(row);
    }
    return rows;
}

CriticalImpedance critical_impedance(const GridParams& grid_template,
                                     const InverterSetpoint& setpoint, const PiPllGains& pll,
                                     double l_min, double l_max) {
    auto damping_at = [&](double l_g) {
        GridParams grid = grid_template;
        grid.l_g = l_g;
        const OperatingPoint op = solve_equilibrium(grid, setpoint);
        return pll_coefficients(grid, setpoint, pll, op.delta0).d_e;
    };
    double lo = l_min;
    double hi = l_max;
    double f_lo = damping_at(lo);
    const double f_hi = damping_at(hi);
    if (f_lo == 0.0) return CriticalImpedance{lo, true};
    if (f_hi == 0.0) return CriticalImpedance{hi, true};
    if ((f_lo > 0.0) == (f_hi > 0.0)) throw NotBracketedError();
    for (int iter = 0; iter < 200 && hi - lo > kBisectionWidth; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = damping_at(mid);
        if (f_mid == 0.0) return CriticalImpedance{mid, true};
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return CriticalImpedance{0.5 * (lo + hi), true};
}

CriticalImpedance ipll_critical_impedance(const GridParams& grid_template,
                                          const InverterSetpoint& setpoint,
                                          const IpllGains& ipll) {
    if (setpoint.i_dref <= 0.0) throw Error("ipll_critical_impedance requires i_dref > 0");
    GridParams grid = grid_template;
    grid.l_g = ipll.d / setpoint.i_dref;
    return CriticalImpedance{grid.l_g, try_solve_equilibrium(grid, setpoint).has_value()};
}

SecondOrderCharacteristics second_order_characteristics(const EquivalentCoefficients& coeffs,
                                                        const GridParams& grid, double delta0) {
    const double restoring = grid.u_g * std::cos(delta0);
    if (restoring <= 0.0) throw DegenerateAngleError();
    if (coeffs.j_e <= 0.0) throw SingularInertiaError();
    const double omega_n = std::sqrt(restoring / coeffs.j_e);
    const double zeta = coeffs.d_e / (2.0 * std::sqrt(coeffs.j_e * restoring));
    const double omega_d = zeta < 1.0 ? omega_n * std::sqrt(1.0 - zeta * zeta) : 0.0;
    return SecondOrderCharacteristics{omega_n, zeta, omega_d};
}

}  // namespace syncsim
