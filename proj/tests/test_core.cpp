#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "syncsim/core.hpp"

using namespace syncsim;

namespace {

GridParams baseline_grid(double l_g = 4.1e-3) {
    return GridParams{311.0, kNominalOmega, kNominalOmega, l_g, 0.0};
}

InverterSetpoint baseline_setpoint() { return InverterSetpoint{80.0, 0.0}; }

}  // namespace

TEST_SUITE("core") {

TEST_CASE("scr of the 4.1 mH design grid is 3 within 1%") {
    const double scr = scr_from_grid(baseline_grid(), 80.0);
    CHECK(scr == doctest::Approx(3.018).epsilon(5e-4));
    CHECK(std::abs(scr - 3.0) / 3.0 < 0.01);
}

TEST_CASE("scr at the closed-form unity-scr inductance") {
    // With r_g = 0: scr = u_g / (omega_g * l_g * i), so scr = 1 at
    // l_g = u_g / (omega_g * i).
    const double l_unity = 311.0 / (kNominalOmega * 80.0);
    CHECK(l_unity == doctest::Approx(12.374e-3).epsilon(1e-4));
    CHECK(scr_from_grid(baseline_grid(l_unity), 80.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("doubling l_g halves scr when r_g = 0") {
    const double scr1 = scr_from_grid(baseline_grid(4.1e-3), 80.0);
    const double scr2 = scr_from_grid(baseline_grid(8.2e-3), 80.0);
    CHECK(scr1 / scr2 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scr errors") {
    CHECK_THROWS_AS(scr_from_grid(baseline_grid(0.0), 80.0), ZeroImpedanceError);
    CHECK_THROWS_AS(scr_from_grid(baseline_grid(), 0.0), Error);
}

TEST_CASE("grid_from_scr reproduces the design inductance") {
    const double scr = scr_from_grid(baseline_grid(), 80.0);
    const GridParams grid = grid_from_scr(scr, 311.0, kNominalOmega, 80.0, 0.0);
    CHECK(grid.l_g == doctest::Approx(4.1e-3).epsilon(1e-12));
}

TEST_CASE("grid_from_scr at scr = 1 matches the closed form") {
    const GridParams grid = grid_from_scr(1.0, 311.0, kNominalOmega, 80.0, 0.0);
    CHECK(grid.l_g == doctest::Approx(311.0 / (kNominalOmega * 80.0)).epsilon(1e-12));
}

TEST_CASE("grid_from_scr rejects resistance above the required impedance") {
    // scr = 1 at 80 A and 311 V needs |Z| = 3.89 ohm.
    CHECK_THROWS_AS(grid_from_scr(1.0, 311.0, kNominalOmega, 80.0, 5.0), InfeasibleScrError);
}

TEST_CASE("scr round trip is the identity over [0.5, 20]") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> scr_draw(0.5, 20.0);
    std::uniform_real_distribution<double> frac_draw(0.0, 0.8);
    for (int i = 0; i < 200; ++i) {
        const double scr = scr_draw(rng);
        const double r_g = frac_draw(rng) * 311.0 / (scr * 80.0);
        const GridParams grid = grid_from_scr(scr, 311.0, kNominalOmega, 80.0, r_g);
        CHECK(scr_from_grid(grid, 80.0) == doctest::Approx(scr).epsilon(1e-9));
        const GridParams again =
            grid_from_scr(scr_from_grid(grid, 80.0), grid.u_g, grid.omega_g, 80.0, grid.r_g);
        CHECK(again.l_g == doctest::Approx(grid.l_g).epsilon(1e-9));
    }
}

TEST_CASE("validate accepts the design-point parameter set") {
    CHECK(validate(baseline_grid(), baseline_setpoint(), PiPllGains{0.1305, 19.144}).empty());
    CHECK(validate(baseline_grid(), baseline_setpoint(), IpllGains{20.0, 2.0}).empty());
}

TEST_CASE("validate rejects k_ipll = 0") {
    const auto violations = validate(baseline_grid(), baseline_setpoint(), PiPllGains{0.1, 0.0});
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].field == "k_ipll");
}

TEST_CASE("validate rejects the singular-inertia gain") {
    const GridParams grid = baseline_grid();
    const InverterSetpoint sp = baseline_setpoint();
    const double k_singular = 1.0 / (grid.l_g * sp.i_dref);
    const auto violations = validate(grid, sp, PiPllGains{k_singular, 19.144});
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].message.find("singular") != std::string::npos);

    // The equivalent inertia does blow up there: approaching the singular
    // gain sends 1/(1 - k_ppll*l_g*i_dref) to infinity.
    const double denom_near = 1.0 - (k_singular * (1.0 - 1e-9)) * grid.l_g * sp.i_dref;
    CHECK(std::abs(1.0 / denom_near) > 1e8);
    CHECK(validate(grid, sp, PiPllGains{k_singular * (1.0 - 1e-6), 19.144}).empty());
}

TEST_CASE("validate collects violations instead of throwing") {
    const auto violations = validate(GridParams{-311.0, kNominalOmega, kNominalOmega, -1.0, 0.0});
    CHECK(violations.size() == 2);
    const auto nan_violations = validate(InverterSetpoint{std::nan(""), 0.0});
    REQUIRE(nan_violations.size() == 1);
    CHECK(nan_violations[0].field == "i_dref");
}

TEST_CASE("ipll gain invariants") {
    CHECK(!validate(baseline_grid(), baseline_setpoint(), IpllGains{0.0, 2.0}).empty());
    CHECK(!validate(baseline_grid(), baseline_setpoint(), IpllGains{20.0, -0.1}).empty());
}

TEST_CASE("driving term composes omega_g*l_g*i_dref + r_g*i_qref") {
    GridParams grid = baseline_grid();
    grid.r_g = 0.5;
    const InverterSetpoint sp{80.0, 10.0};
    CHECK(driving_term(grid, sp) ==
          doctest::Approx(grid.omega_g * grid.l_g * 80.0 + 0.5 * 10.0).epsilon(1e-15));
}

}  // TEST_SUITE
