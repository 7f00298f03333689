#include "syncsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "syncsim/analysis.hpp"
#include "syncsim/scenario_io.hpp"
#include "syncsim/simulator.hpp"
#include "syncsim/svg.hpp"

namespace syncsim {

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<double> u_g, omega_g, omega_0, l_g, r_g, i_dref, i_qref, rated_current;
    std::optional<double> k_ppll, k_ipll, j, d, k_fluct;
    std::optional<std::string> model;
    std::optional<double> duration, dt, delta_offset, omega_offset;
    std::optional<int> decimation, points;
    std::optional<double> lg_min, lg_max;
    std::vector<double> envelope_lg;
    std::optional<std::string> csv, svg;
    std::string out_dir = ".";
};

void add_common_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON study configuration file");
    cmd->add_option("--ug", o.u_g, "grid voltage amplitude, peak phase volts [V]");
    cmd->add_option("--omega-g", o.omega_g, "actual grid angular frequency [rad/s]");
    cmd->add_option("--omega-0", o.omega_0, "nominal angular frequency [rad/s]");
    cmd->add_option("--lg", o.l_g, "grid inductance [H]");
    cmd->add_option("--rg", o.r_g, "grid resistance [Ohm]");
    cmd->add_option("--idref", o.i_dref, "d-axis current reference, peak amps [A]");
    cmd->add_option("--iqref", o.i_qref, "q-axis current reference, peak amps [A]");
    cmd->add_option("--rated-current", o.rated_current, "SCR reference current [A]");
    cmd->add_option("--kppll", o.k_ppll, "PI-PLL proportional gain [rad/(V*s)]");
    cmd->add_option("--kipll", o.k_ipll, "PI-PLL integral gain [rad/(V*s^2)]");
    cmd->add_option("--j", o.j, "IPLL integrator gain [rad/(V*s^2)]");
    cmd->add_option("--d", o.d, "IPLL damping-branch gain [V*s/rad]");
    cmd->add_option("--k-fluct", o.k_fluct, "voltage fluctuation coefficient");
}

void add_simulation_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--duration", o.duration, "simulated horizon [s]");
    cmd->add_option("--dt", o.dt, "integration step [s]");
    cmd->add_option("--decimation", o.decimation, "record every n-th step");
    cmd->add_option("--offset", o.delta_offset, "initial angle offset from equilibrium [rad]");
    cmd->add_option("--omega-offset", o.omega_offset, "initial frequency offset [rad/s]");
}

void add_output_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--csv", o.csv, "CSV output path");
    cmd->add_option("--svg", o.svg, "SVG plot output path");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
}

StudyConfig resolve_config(const CliOptions& o) {
    StudyConfig cfg;
    if (!o.config_path.empty()) cfg = parse_config(read_file(o.config_path));

    if (o.u_g) cfg.grid.u_g = *o.u_g;
    if (o.omega_g) cfg.grid.omega_g = *o.omega_g;
    if (o.omega_0) cfg.grid.omega_0 = *o.omega_0;
    if (o.l_g) cfg.grid.l_g = *o.l_g;
    if (o.r_g) cfg.grid.r_g = *o.r_g;
    if (o.i_dref) cfg.setpoint.i_dref = *o.i_dref;
    if (o.i_qref) cfg.setpoint.i_qref = *o.i_qref;
    if (o.rated_current)
        cfg.rated_current = *o.rated_current;
    else if (o.i_dref)
        cfg.rated_current = *o.i_dref;

    if (o.k_ppll.has_value() != o.k_ipll.has_value() && !cfg.pll)
        throw ConfigValidationError(
            std::vector<Violation>{{"kppll", "PI gains must be given as a pair"}});
    if (o.k_ppll || o.k_ipll) {
        PiPllGains gains = cfg.pll.value_or(PiPllGains{});
        if (o.k_ppll) gains.k_ppll = *o.k_ppll;
        if (o.k_ipll) gains.k_ipll = *o.k_ipll;
        cfg.pll = gains;
    }
    if (o.j) cfg.ipll.j = *o.j;
    if (o.d) cfg.ipll.d = *o.d;
    if (o.k_fluct) cfg.k_fluct = *o.k_fluct;

    if (o.model) {
        const auto kind = model_from_name(*o.model);
        if (!kind)
            throw ConfigValidationError(
                std::vector<Violation>{{"model", "unknown model '" + *o.model + "'"}});
        cfg.model = *kind;
    }
    if (o.duration) cfg.duration = *o.duration;
    if (o.dt) cfg.dt = *o.dt;
    if (o.decimation) cfg.decimation = *o.decimation;
    if (o.delta_offset) cfg.initial_delta_offset = *o.delta_offset;
    if (o.omega_offset) cfg.initial_omega_offset = *o.omega_offset;
    if (o.lg_min) cfg.sweep_l_min = *o.lg_min;
    if (o.lg_max) cfg.sweep_l_max = *o.lg_max;
    if (o.points) cfg.sweep_points = *o.points;
    if (o.csv) cfg.csv_path = *o.csv;
    if (o.svg) cfg.svg_path = *o.svg;

    if (auto violations = validate(cfg); !violations.empty())
        throw ConfigValidationError(std::move(violations));
    return cfg;
}

void echo_config(const StudyConfig& cfg, std::ostream& out) {
    out << "# config: " << config_to_json(cfg) << "\n";
}

PiPllGains resolve_pll_gains(StudyConfig& cfg) {
    if (!cfg.pll) cfg.pll = map_ipll_to_pll(cfg.ipll, cfg.grid, cfg.setpoint);
    return *cfg.pll;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string describe_verdict(const StabilityVerdict& v) {
    std::string s(verdict_name(v.kind));
    char buf[128];
    switch (v.kind) {
        case StabilityVerdict::Kind::Settled:
            std::snprintf(buf, sizeof(buf), " settle_time=%.4g s final_delta=%.9g rad",
                          v.settle_time, v.final_delta);
            s += buf;
            break;
        case StabilityVerdict::Kind::Diverged:
            std::snprintf(buf, sizeof(buf), " detect_time=%.4g s (%s)", v.detect_time,
                          v.reason.c_str());
            s += buf;
            break;
        case StabilityVerdict::Kind::Marginal: break;
    }
    return s;
}

Series trajectory_series(const Trajectory& traj, const std::string& label) {
    Series s;
    s.label = label;
    s.points.reserve(traj.rows.size());
    for (const auto& row : traj.rows) s.points.emplace_back(row.t, row.delta_pll);
    return s;
}

Scenario scenario_from_config(const StudyConfig& cfg, const PiPllGains& pll) {
    Scenario sc;
    sc.model = cfg.model;
    sc.grid = cfg.grid;
    sc.setpoint = cfg.setpoint;
    if (cfg.model == ModelKind::PllReduced || cfg.model == ModelKind::PllSignal)
        sc.gains = pll;
    else
        sc.gains = cfg.ipll;
    const OperatingPoint op = solve_equilibrium(cfg.grid, cfg.setpoint);
    sc.initial = SyncState{op.delta0 + cfg.initial_delta_offset,
                           cfg.grid.omega_g + cfg.initial_omega_offset};
    sc.duration = cfg.duration;
    sc.dt = cfg.dt;
    sc.decimation = cfg.decimation;
    sc.events = cfg.events;
    return sc;
}

int run_analyze(StudyConfig cfg, std::ostream& out) {
    const Report report = analyze_study(cfg);
    if (!cfg.pll) cfg.pll = report.pll_gains;
    echo_config(cfg, out);
    out << format_report(report);
    return 0;
}

int run_map_gains(StudyConfig cfg, std::ostream& out) {
    const PiPllGains mapped = map_ipll_to_pll(cfg.ipll, cfg.grid, cfg.setpoint);
    cfg.pll = mapped;
    echo_config(cfg, out);
    out << "k_ppll = " << format_value(mapped.k_ppll) << " rad/(V*s)\n";
    out << "k_ipll = " << format_value(mapped.k_ipll) << " rad/(V*s^2)\n";
    return 0;
}

int run_design_damping(StudyConfig cfg, const CliOptions& opts, std::ostream& out) {
    echo_config(cfg, out);
    std::vector<EnvelopePoint> envelope;
    std::vector<double> lgs = opts.envelope_lg;
    if (lgs.empty()) lgs.push_back(cfg.grid.l_g);
    for (double l_g : lgs) {
        GridParams grid = cfg.grid;
        grid.l_g = l_g;
        envelope.push_back(EnvelopePoint{grid, cfg.setpoint});
    }
    const DampingBounds bounds =
        damping_bounds(cfg.grid, cfg.setpoint, cfg.ipll, envelope, cfg.k_fluct);
    out << "lower_exact        = " << format_value(bounds.lower_exact)
        << " V*s/rad  (max l_g*i_dref over the envelope)\n";
    out << "lower_conservative = " << format_value(bounds.lower_conservative)
        << " V*s/rad  (k_fluct*u_g/omega_0, k_fluct = " << format_value(bounds.k_fluct) << ")\n";
    out << "upper              = " << format_value(bounds.upper)
        << " V*s/rad  (conjugate-roots limit at the operating point)\n";
    const double recommended = bounds.lower_conservative;
    out << "recommended d      = " << format_value(recommended) << " V*s/rad\n";
    if (recommended >= bounds.upper)
        out << "note: recommended d is at or above the conjugate-roots limit; the response "
               "will not ring\n";
    return 0;
}

int run_find_critical(StudyConfig cfg, const CliOptions& opts, std::ostream& out) {
    const PiPllGains pll = resolve_pll_gains(cfg);
    echo_config(cfg, out);
    const double lo = opts.lg_min.value_or(4.1e-3);
    const double hi = opts.lg_max.value_or(12.3e-3);
    const CriticalImpedance crit = critical_impedance(cfg.grid, cfg.setpoint, pll, lo, hi);
    GridParams at_root = cfg.grid;
    at_root.l_g = crit.l_g;
    out << "l_g_critical = " << format_value(crit.l_g) << " H  (scr = "
        << format_value(scr_from_grid(at_root, cfg.rated_current)) << ")\n";
    const CriticalImpedance ipll_crit =
        ipll_critical_impedance(cfg.grid, cfg.setpoint, cfg.ipll);
    out << "ipll d_e root = " << format_value(ipll_crit.l_g) << " H"
        << (ipll_crit.equilibrium_exists ? "" : "  (beyond the equilibrium-existence boundary)")
        << "\n";
    return 0;
}

int run_sweep(StudyConfig cfg, std::ostream& out) {
    const PiPllGains pll = resolve_pll_gains(cfg);
    echo_config(cfg, out);
    const auto rows = damping_sweep(cfg.grid, cfg.setpoint, pll, cfg.ipll, cfg.sweep_l_min,
                                    cfg.sweep_l_max, cfg.sweep_points);
    const std::string csv_path = cfg.csv_path.empty() ? "sweep.csv" : cfg.csv_path;
    write_file(csv_path, emit_sweep_csv(rows));
    out << "wrote " << csv_path << " (" << rows.size() << " rows)\n";

    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].equilibrium_exists && rows[i + 1].equilibrium_exists &&
            rows[i].d_e_pll > 0.0 && rows[i + 1].d_e_pll <= 0.0) {
            out << "pi-pll damping sign change between l_g = " << format_value(rows[i].l_g)
                << " H and " << format_value(rows[i + 1].l_g) << " H\n";
        }
        if (rows[i].equilibrium_exists && !rows[i + 1].equilibrium_exists) {
            out << "equilibrium lost between l_g = " << format_value(rows[i].l_g) << " H and "
                << format_value(rows[i + 1].l_g) << " H\n";
        }
    }

    if (!cfg.svg_path.empty()) {
        PlotSpec spec;
        spec.title = "equivalent damping vs grid inductance";
        spec.x_label = "l_g [H]";
        spec.y_label = "d_e [V*s/rad]";
        Series pll_series{"pi-pll d_e", {}};
        Series ipll_series{"ipll d_e", {}};
        for (const auto& row : rows) {
            pll_series.points.emplace_back(row.l_g, row.d_e_pll);
            ipll_series.points.emplace_back(row.l_g, row.d_e_ipll);
        }
        spec.series = {pll_series, ipll_series};
        write_file(cfg.svg_path, render_svg_plot(spec, config_to_json(cfg)));
        out << "wrote " << cfg.svg_path << "\n";
    }
    return 0;
}

int run_simulate(StudyConfig cfg, std::ostream& out) {
    PiPllGains pll{};
    if (cfg.model == ModelKind::PllReduced || cfg.model == ModelKind::PllSignal)
        pll = resolve_pll_gains(cfg);
    echo_config(cfg, out);
    const Scenario scenario = scenario_from_config(cfg, pll);
    if (auto violations = validate(scenario); !violations.empty())
        throw ConfigValidationError(std::move(violations));
    const Trajectory traj = integrate(scenario);

    const std::string csv_path = cfg.csv_path.empty() ? "trajectory.csv" : cfg.csv_path;
    write_file(csv_path, emit_trajectory_csv(traj));
    out << "wrote " << csv_path << " (" << traj.rows.size() << " rows)\n";
    if (!cfg.svg_path.empty()) {
        PlotSpec spec;
        spec.title = std::string(model_name(cfg.model)) + " response";
        spec.x_label = "t [s]";
        spec.y_label = "delta_pll [rad]";
        spec.series = {trajectory_series(traj, std::string(model_name(cfg.model)))};
        write_file(cfg.svg_path, render_svg_plot(spec, config_to_json(cfg)));
        out << "wrote " << cfg.svg_path << "\n";
    }
    out << "verdict: " << describe_verdict(traj.verdict) << "\n";
    try {
        const DampingEstimate est = measure_damping(traj);
        out << "measured: omega_d = " << format_value(est.omega_d_est)
            << " rad/s, zeta = " << format_value(est.zeta_est) << " (" << est.n_peaks_used
            << " extrema)\n";
    } catch (const InsufficientOscillationError&) {
        out << "measured: no usable oscillation train\n";
    }
    return 0;
}

int run_fig5(StudyConfig cfg, const CliOptions& opts, std::ostream& out) {
    cfg.duration = opts.duration.value_or(1.0);
    const PiPllGains pll = resolve_pll_gains(cfg);
    echo_config(cfg, out);

    cfg.model = ModelKind::PllReduced;
    const Trajectory pll_traj = integrate(scenario_from_config(cfg, pll));
    cfg.model = ModelKind::IpllReduced;
    const Trajectory ipll_traj = integrate(scenario_from_config(cfg, pll));

    const std::filesystem::path dir(opts.out_dir);
    write_file(dir / "fig5_pll_reduced.csv", emit_trajectory_csv(pll_traj));
    write_file(dir / "fig5_ipll_reduced.csv", emit_trajectory_csv(ipll_traj));

    PlotSpec spec;
    spec.title = "design-point response, both controllers";
    spec.x_label = "t [s]";
    spec.y_label = "delta_pll [rad]";
    spec.series = {trajectory_series(pll_traj, "pi-pll"), trajectory_series(ipll_traj, "ipll")};
    write_file(dir / "fig5.svg", render_svg_plot(spec, config_to_json(cfg)));
    out << "wrote fig5_pll_reduced.csv, fig5_ipll_reduced.csv, fig5.svg in " << opts.out_dir
        << "\n";

    const std::size_t n = std::min(pll_traj.rows.size(), ipll_traj.rows.size());
    double sup_diff = 0.0;
    double peak_dev = 0.0;
    const double delta_final = ipll_traj.rows.back().delta_pll;
    for (std::size_t i = 0; i < n; ++i) {
        sup_diff = std::max(sup_diff,
                            std::abs(pll_traj.rows[i].delta_pll - ipll_traj.rows[i].delta_pll));
        peak_dev = std::max(peak_dev, std::abs(ipll_traj.rows[i].delta_pll - delta_final));
        peak_dev = std::max(peak_dev, std::abs(pll_traj.rows[i].delta_pll - delta_final));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "similarity: sup|delta_pll - delta_ipll| = %.6g rad = %.3g%% of peak deviation\n",
                  sup_diff, 100.0 * sup_diff / peak_dev);
    out << buf;
    out << "pi-pll verdict: " << describe_verdict(pll_traj.verdict) << "\n";
    out << "ipll verdict:   " << describe_verdict(ipll_traj.verdict) << "\n";
    return 0;
}

int run_fig6(StudyConfig cfg, const CliOptions& opts, std::ostream& out) {
    GridStrengthStudy study;
    study.grid_template = cfg.grid;
    study.setpoint = cfg.setpoint;
    study.pll = resolve_pll_gains(cfg);  // fixed at the configured design point
    study.ipll = cfg.ipll;
    study.delta_offset = cfg.initial_delta_offset;
    study.duration = opts.duration.value_or(3.0);
    study.dt = cfg.dt;
    study.decimation = cfg.decimation;
    echo_config(cfg, out);

    const auto runs = run_figure6_suite(study);

    const std::filesystem::path dir(opts.out_dir);
    std::vector<PlotSpec> panels;
    for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
        const auto& pll_run = runs[i];
        const auto& ipll_run = runs[i + 1];
        char name[128];
        std::snprintf(name, sizeof(name), "l_g = %.4g mH", pll_run.l_g * 1e3);
        PlotSpec spec;
        spec.title = name;
        spec.x_label = "t [s]";
        spec.y_label = "delta_pll [rad]";
        spec.series = {trajectory_series(pll_run.trajectory, "pi-pll"),
                       trajectory_series(ipll_run.trajectory, "ipll")};
        panels.push_back(std::move(spec));
    }
    for (const auto& run : runs) {
        char name[128];
        std::snprintf(name, sizeof(name), "fig6_lg%.4gmH_%s.csv", run.l_g * 1e3,
                      std::string(model_name(run.model)).c_str());
        write_file(dir / name, emit_trajectory_csv(run.trajectory));
    }
    write_file(dir / "fig6.svg", render_svg_grid(panels, 2, config_to_json(cfg)));
    out << "wrote " << runs.size() << " trajectory CSVs and fig6.svg in " << opts.out_dir << "\n";

    out << "l_g_mH  model         verdict\n";
    for (const auto& run : runs) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-7.4g %-13s %s\n", run.l_g * 1e3,
                      std::string(model_name(run.model)).c_str(),
                      describe_verdict(run.trajectory.verdict).c_str());
        out << line;
    }
    return 0;
}

}  // namespace

int cli_dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"synchronization stability lab for grid-following inverters"};
    app.name("syncsim");
    app.require_subcommand(1);

    CliOptions opts;

    CLI::App* analyze = app.add_subcommand(
        "analyze", "equilibrium, coefficients, eigenvalues and bounds at one operating point");
    add_common_options(analyze, opts);

    CLI::App* sweep =
        app.add_subcommand("sweep", "damping coefficients over a grid-inductance range (CSV/SVG)");
    add_common_options(sweep, opts);
    sweep->add_option("--lg-min", opts.lg_min, "sweep start [H]");
    sweep->add_option("--lg-max", opts.lg_max, "sweep end [H]");
    sweep->add_option("--points", opts.points, "number of sweep rows");
    add_output_options(sweep, opts);

    CLI::App* simulate =
        app.add_subcommand("simulate", "time-domain run of one model with optional events (CSV/SVG)");
    add_common_options(simulate, opts);
    add_simulation_options(simulate, opts);
    simulate->add_option("--model", opts.model,
                         "pll_reduced | ipll_reduced | pll_signal | ipll_signal");
    add_output_options(simulate, opts);

    CLI::App* fig5 = app.add_subcommand(
        "fig5", "canned design-point comparison: both controllers, same disturbance");
    add_common_options(fig5, opts);
    add_simulation_options(fig5, opts);
    fig5->add_option("--out-dir", opts.out_dir, "output directory");

    CLI::App* fig6 = app.add_subcommand(
        "fig6", "canned grid-strength study: both controllers across four grid inductances");
    add_common_options(fig6, opts);
    add_simulation_options(fig6, opts);
    fig6->add_option("--out-dir", opts.out_dir, "output directory");

    CLI::App* map_gains = app.add_subcommand(
        "map-gains", "PI gains matching the IPLL coefficients at the operating point");
    add_common_options(map_gains, opts);

    CLI::App* design_damping = app.add_subcommand(
        "design-damping", "IPLL damping-gain bounds and a recommended value");
    add_common_options(design_damping, opts);
    design_damping->add_option("--envelope-lg", opts.envelope_lg,
                               "operating-envelope inductances [H] (repeatable)");

    CLI::App* find_critical = app.add_subcommand(
        "find-critical", "grid inductance where the PI-PLL damping crosses zero");
    add_common_options(find_critical, opts);
    find_critical->add_option("--lg-min", opts.lg_min, "search interval start [H]");
    find_critical->add_option("--lg-max", opts.lg_max, "search interval end [H]");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        StudyConfig cfg = resolve_config(opts);
        if (analyze->parsed()) return run_analyze(std::move(cfg), out);
        if (sweep->parsed()) return run_sweep(std::move(cfg), out);
        if (simulate->parsed()) return run_simulate(std::move(cfg), out);
        if (fig5->parsed()) return run_fig5(std::move(cfg), opts, out);
        if (fig6->parsed()) return run_fig6(std::move(cfg), opts, out);
        if (map_gains->parsed()) return run_map_gains(std::move(cfg), out);
        if (design_damping->parsed()) return run_design_damping(std::move(cfg), opts, out);
        if (find_critical->parsed()) return run_find_critical(std::move(cfg), opts, out);
        err << "error: no subcommand\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace syncsim
