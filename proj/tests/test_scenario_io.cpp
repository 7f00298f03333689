#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "syncsim/analysis.hpp"
#include "syncsim/cli.hpp"
#include "syncsim/scenario_io.hpp"
#include "syncsim/simulator.hpp"
#include "syncsim/svg.hpp"

using namespace syncsim;
namespace fs = std::filesystem;

namespace {

const char* const kBaselineJson = R"({
  "u_g_volt": 311.0,
  "omega_g_rad_s": 314.15926535897933,
  "l_g_henry": 4.1e-3,
  "i_dref_amp": 80.0,
  "j_rad_per_v_s2": 20.0,
  "d_v_s_per_rad": 2.0,
  "model": "ipll_reduced",
  "duration_s": 1.0
})";

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<double> parse_csv_numbers(const std::string& line, int count) {
    std::vector<double> out;
    const char* p = line.c_str();
    for (int i = 0; i < count; ++i) {
        char* end = nullptr;
        out.push_back(std::strtod(p, &end));
        p = end;
        if (*p == ',') ++p;
    }
    return out;
}

// Number after '=' on the first line that carries both the label and '='.
double extract_number(const std::string& text, const std::string& label) {
    for (const auto& line : split_lines(text)) {
        const auto pos = line.find(label);
        if (pos == std::string::npos) continue;
        const auto eq = line.find('=', pos);
        if (eq == std::string::npos) continue;
        return std::strtod(line.c_str() + eq + 1, nullptr);
    }
    FAIL("no line with label '" << label << "' and '='");
    return 0.0;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_dispatch(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

Trajectory small_trajectory() {
    Scenario scenario;
    scenario.model = ModelKind::IpllReduced;
    scenario.grid = GridParams{311.0, kNominalOmega, kNominalOmega, 4.1e-3, 0.0};
    scenario.setpoint = InverterSetpoint{80.0, 0.0};
    scenario.gains = IpllGains{20.0, 2.0};
    const OperatingPoint op = solve_equilibrium(scenario.grid, scenario.setpoint);
    scenario.initial = SyncState{op.delta0 + 0.1, scenario.grid.omega_g};
    scenario.duration = 0.01;
    scenario.decimation = 40;
    return integrate(scenario);
}

}  // namespace

TEST_SUITE("scenario_io") {

TEST_CASE("baseline config file parses to the design values") {
    const StudyConfig cfg = parse_config(kBaselineJson);
    CHECK(cfg.grid.u_g == 311.0);
    CHECK(cfg.grid.l_g == 4.1e-3);
    CHECK(cfg.setpoint.i_dref == 80.0);
    CHECK(cfg.ipll.j == 20.0);
    CHECK(cfg.ipll.d == 2.0);
    CHECK(cfg.model == ModelKind::IpllReduced);

    // Omitted keys take their documented defaults and are echoed back.
    CHECK(cfg.grid.r_g == 0.0);
    CHECK(cfg.setpoint.i_qref == 0.0);
    CHECK(cfg.grid.omega_0 == kNominalOmega);
    CHECK(cfg.k_fluct == 2.0);
    CHECK(cfg.dt == 50e-6);
    CHECK(cfg.rated_current == 80.0);

    const std::string echoed = config_to_json(cfg);
    CHECK(echoed.find("\"r_g_ohm\":0.0") != std::string::npos);
    CHECK(echoed.find("\"dt_s\":5e-05") != std::string::npos);
    CHECK(echoed.find("\"k_fluct\":2.0") != std::string::npos);
}

TEST_CASE("config echo round-trips through the parser") {
    StudyConfig cfg = parse_config(kBaselineJson);
    cfg.pll = PiPllGains{0.1305, 19.144};
    cfg.events.push_back(Event{0.5, Event::Target::GridInductance, 8.8e-3});
    const StudyConfig again = parse_config(config_to_json(cfg));
    CHECK(again.grid.l_g == cfg.grid.l_g);
    CHECK(again.pll->k_ppll == cfg.pll->k_ppll);
    REQUIRE(again.events.size() == 1);
    CHECK(again.events[0].time == 0.5);
    CHECK(again.events[0].target == Event::Target::GridInductance);
}

TEST_CASE("malformed values are rejected with the offending key") {
    try {
        parse_config(R"({"i_dref_amp": "eighty"})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.key() == "i_dref_amp");
    }
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        parse_config(R"({"l_g_millihenry": 4.1})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.key() == "l_g_millihenry");
        CHECK(std::string(e.what()).find("l_g_millihenry") != std::string::npos);
    }
}

TEST_CASE("json syntax errors carry a line number") {
    try {
        parse_config("{\n  \"u_g_volt\": 311.0,\n  oops\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("PI gains must come as a pair") {
    CHECK_THROWS_AS(parse_config(R"({"k_ppll_rad_per_v_s": 0.13})"), ParseError);
}

TEST_CASE("parsed values must satisfy the model invariants") {
    try {
        parse_config(R"({"k_ppll_rad_per_v_s": 0.13, "k_ipll_rad_per_v_s2": 0.0})");
        FAIL("expected ConfigValidationError");
    } catch (const ConfigValidationError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0].field == "k_ipll");
    }
    CHECK_THROWS_AS(parse_config(R"({"model": "super_pll"})"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({"events": [{"time_s": 0.1, "target": "x", "value": 1}]})"),
                    ParseError);
}

TEST_CASE("trajectory csv layout") {
    const Trajectory traj = small_trajectory();
    const std::string csv = emit_trajectory_csv(traj);
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == traj.rows.size() + 1);
    CHECK(lines[0] == "t_s,delta_pll_rad,omega_pll_rad_s,u_q_v,l_g_henry,model");

    // Full-precision scientific notation round-trips exactly.
    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
        const auto fields = parse_csv_numbers(lines[i + 1], 5);
        CHECK(fields[0] == traj.rows[i].t);
        CHECK(fields[1] == traj.rows[i].delta_pll);
        CHECK(fields[2] == traj.rows[i].omega_pll);
        CHECK(fields[3] == traj.rows[i].u_q);
        CHECK(fields[4] == traj.rows[i].l_g);
        CHECK(lines[i + 1].find("ipll_reduced") != std::string::npos);
    }

    // Byte-stable for identical input.
    CHECK(emit_trajectory_csv(traj) == csv);
}

TEST_CASE("sweep csv layout") {
    const GridParams grid{311.0, kNominalOmega, kNominalOmega, 4.1e-3, 0.0};
    const InverterSetpoint sp{80.0, 0.0};
    const PiPllGains pll = map_ipll_to_pll(IpllGains{20.0, 2.0}, grid, sp);
    const auto rows = damping_sweep(grid, sp, pll, IpllGains{20.0, 2.0}, 1e-3, 13e-3, 25);
    const std::string csv = emit_sweep_csv(rows);
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == rows.size() + 1);
    CHECK(lines[0] == "l_g_henry,scr,delta0_rad,d_e_pll,d_e_ipll,j_e_pll,j_e_ipll,equilibrium_exists");

    double previous = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto fields = parse_csv_numbers(lines[i + 1], 7);
        CHECK(fields[0] > previous);  // monotone l_g column
        previous = fields[0];
        CHECK(fields[0] == rows[i].l_g);
        CHECK(fields[4] == rows[i].d_e_ipll);
        if (!rows[i].equilibrium_exists) {
            CHECK(std::isnan(fields[2]));
            CHECK(lines[i + 1].back() == '0');
        } else {
            CHECK(fields[2] == rows[i].delta0);
            CHECK(lines[i + 1].back() == '1');
        }
    }
}

TEST_CASE("svg rendering") {
    PlotSpec spec;
    spec.title = "test plot";
    spec.x_label = "t [s]";
    spec.y_label = "delta_pll [rad]";
    Series a{"series a", {{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.5}}};
    Series b{"series b", {{0.0, 1.0}, {1.0, -1.0}}};
    spec.series = {a, b};

    const std::string svg = render_svg_plot(spec, "meta");
    CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
          std::string::npos);
    CHECK(svg.find("<desc>meta</desc>") != std::string::npos);
    CHECK(svg.find("t [s]") != std::string::npos);
    CHECK(svg.find("delta_pll [rad]") != std::string::npos);
    CHECK(svg.find("series a") != std::string::npos);
    CHECK(svg.find("series b") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(render_svg_plot(spec, "meta") == svg);  // deterministic
}

TEST_CASE("svg handles a constant series and rejects empty input") {
    PlotSpec flat;
    flat.series = {Series{"flat", {{0.0, 2.0}, {1.0, 2.0}, {2.0, 2.0}}}};
    CHECK(render_svg_plot(flat).find("<polyline") != std::string::npos);

    PlotSpec empty;
    CHECK_THROWS_AS(render_svg_plot(empty), EmptySeriesError);
    PlotSpec short_series;
    short_series.series = {Series{"one point", {{0.0, 1.0}}}};
    CHECK_THROWS_AS(render_svg_plot(short_series), EmptySeriesError);
}

TEST_CASE("svg grid renders one panel per spec") {
    PlotSpec panel;
    panel.series = {Series{"s", {{0.0, 0.0}, {1.0, 1.0}}}};
    const std::vector<PlotSpec> panels(4, panel);
    const std::string svg = render_svg_grid(panels, 2);
    std::size_t count = 0;
    for (std::size_t pos = svg.find("class=\"panel\""); pos != std::string::npos;
         pos = svg.find("class=\"panel\"", pos + 1))
        ++count;
    CHECK(count == 4);
}

TEST_CASE("report carries units on every numeric field") {
    const StudyConfig cfg = parse_config(kBaselineJson);
    const Report report = analyze_study(cfg);
    CHECK(report.pll_gains_mapped);
    CHECK(report.pll.verdict == "stable");
    CHECK(report.ipll.verdict == "stable");

    const std::string text = format_report(report);
    CHECK(text.find("rad") != std::string::npos);
    CHECK(text.find("V*s^2/rad") != std::string::npos);
    CHECK(text.find("V*s/rad") != std::string::npos);
    CHECK(text.find("1/s") != std::string::npos);
    CHECK(text.find("(dimensionless)") != std::string::npos);
    CHECK(extract_number(text, "scr") == doctest::Approx(3.018).epsilon(1e-3));
}

TEST_CASE("cli: map-gains prints the design-point PI gains") {
    std::string out;
    const int code = run_cli({"map-gains", "--j", "20", "--d", "2", "--lg", "4.1e-3"}, &out);
    CHECK(code == 0);
    CHECK(out.find("# config:") != std::string::npos);
    CHECK(std::abs(extract_number(out, "k_ppll") - 0.1305) <= 0.0005);
    CHECK(std::abs(extract_number(out, "k_ipll") - 19.144) <= 0.01);
}

TEST_CASE("cli: find-critical locates the damping zero crossing") {
    std::string out;
    const int code = run_cli({"find-critical"}, &out);
    CHECK(code == 0);
    CHECK(std::abs(extract_number(out, "l_g_critical") - 1.121e-2) < 5e-5);
}

TEST_CASE("cli: analyze without an equilibrium exits with status 2") {
    std::string out;
    std::string err;
    const int code = run_cli({"analyze", "--lg", "13e-3"}, &out, &err);
    CHECK(code == 2);
    CHECK(err.find("no equilibrium") != std::string::npos);
}

TEST_CASE("cli: invalid parameters exit with status 1") {
    std::string err;
    CHECK(run_cli({"analyze", "--kppll", "0.1", "--kipll", "0"}, nullptr, &err) == 1);
    CHECK(err.find("k_ipll") != std::string::npos);
    CHECK(run_cli({"definitely-not-a-subcommand"}, nullptr, &err) == 1);
}

TEST_CASE("cli: help exits cleanly") {
    std::string out;
    CHECK(run_cli({"--help"}, &out) == 0);
    CHECK(out.find("analyze") != std::string::npos);
    CHECK(out.find("fig6") != std::string::npos);
}

TEST_CASE("cli: simulate writes a trajectory and treats divergence as a result") {
    const fs::path dir = fresh_dir("syncsim_cli_simulate");
    const std::string csv = (dir / "run.csv").string();
    std::string out;
    // PI gains pinned to the 4.1 mH design point; at 11.25 mH this diverges.
    const int code = run_cli({"simulate", "--model", "pll_reduced", "--lg", "11.25e-3",
                              "--kppll", "0.13048317598098635", "--kipll", "19.144030365564728",
                              "--duration", "3.0", "--offset", "0.01", "--csv", csv},
                             &out);
    CHECK(code == 0);  // divergence is a computed outcome, not a failure
    CHECK(out.find("verdict: diverged") != std::string::npos);
    REQUIRE(fs::exists(csv));
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t_s,delta_pll_rad,omega_pll_rad_s,u_q_v,l_g_henry,model");
}

TEST_CASE("cli: simulate honors config files with flag overrides") {
    const fs::path dir = fresh_dir("syncsim_cli_config");
    const fs::path config = dir / "study.json";
    {
        std::ofstream f(config);
        f << R"({"l_g_henry": 8.8e-3, "model": "ipll_reduced", "duration_s": 0.2,
                 "events": [{"time_s": 0.1, "target": "l_g_henry", "value": 9.5e-3}],
                 "csv_path": ")"
          << (dir / "a.csv").string() << R"("})";
    }
    std::string out;
    const int code =
        run_cli({"simulate", "--config", config.string(), "--lg", "4.1e-3"}, &out);
    CHECK(code == 0);
    CHECK(out.find("\"l_g_henry\":0.0041") != std::string::npos);  // flag wins
    REQUIRE(fs::exists(dir / "a.csv"));

    // The event fired: the recorded inductance column switches at 0.1 s.
    std::ifstream in(dir / "a.csv");
    std::string line;
    std::getline(in, line);  // header
    bool saw_new_value = false;
    while (std::getline(in, line)) {
        const auto fields = parse_csv_numbers(line, 5);
        if (fields[0] >= 0.1) {
            CHECK(fields[4] == 9.5e-3);
            saw_new_value = true;
        } else {
            CHECK(fields[4] == 4.1e-3);
        }
    }
    CHECK(saw_new_value);
}

TEST_CASE("cli: sweep emits csv and svg artifacts") {
    const fs::path dir = fresh_dir("syncsim_cli_sweep");
    const std::string csv = (dir / "sweep.csv").string();
    const std::string svg = (dir / "sweep.svg").string();
    std::string out;
    const int code = run_cli({"sweep", "--lg-min", "1e-3", "--lg-max", "12e-3", "--points", "23",
                              "--csv", csv, "--svg", svg},
                             &out);
    CHECK(code == 0);
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(svg));
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "l_g_henry,scr,delta0_rad,d_e_pll,d_e_ipll,j_e_pll,j_e_ipll,equilibrium_exists");
    CHECK(out.find("sign change") != std::string::npos);
}

TEST_CASE("cli: fig5 reports the similarity of the two responses") {
    const fs::path dir = fresh_dir("syncsim_cli_fig5");
    std::string out;
    const int code = run_cli({"fig5", "--out-dir", dir.string()}, &out);
    CHECK(code == 0);
    CHECK(fs::exists(dir / "fig5_pll_reduced.csv"));
    CHECK(fs::exists(dir / "fig5_ipll_reduced.csv"));
    CHECK(fs::exists(dir / "fig5.svg"));
    CHECK(out.find("similarity:") != std::string::npos);
}

TEST_CASE("cli: fig6 writes the grid-strength study artifacts") {
    const fs::path dir = fresh_dir("syncsim_cli_fig6");
    std::string out;
    const int code = run_cli({"fig6", "--out-dir", dir.string(), "--duration", "1.2"}, &out);
    CHECK(code == 0);
    CHECK(fs::exists(dir / "fig6.svg"));
    CHECK(fs::exists(dir / "fig6_lg8.8mH_pll_reduced.csv"));
    CHECK(fs::exists(dir / "fig6_lg11.25mH_ipll_reduced.csv"));
    const auto lines = split_lines(out);
    int table_rows = 0;
    for (const auto& line : lines)
        if (line.find("pll_reduced") == 8 || line.find("ipll_reduced") == 8) ++table_rows;
    CHECK(table_rows == 8);
}

TEST_CASE("cli: design-damping prints the bounds with units") {
    std::string out;
    const int code = run_cli({"design-damping", "--envelope-lg", "4.1e-3", "--envelope-lg",
                              "12.374e-3"},
                             &out);
    CHECK(code == 0);
    CHECK(std::abs(extract_number(out, "lower_conservative") - 1.980) < 1e-3);
    CHECK(std::abs(extract_number(out, "lower_exact") - 0.98992) < 1e-4);
    CHECK(std::abs(extract_number(out, "upper") - 7.661) < 1e-3);
    CHECK(std::abs(extract_number(out, "recommended d") - 1.980) < 1e-3);
}

}  // TEST_SUITE
