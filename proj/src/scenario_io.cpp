#include "syncsim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace syncsim {

namespace {

using json = nlohmann::ordered_json;

// 1-based line number of a byte offset, for parse diagnostics.
int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

double read_number(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ParseError(key, 0, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
}

int read_int(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ParseError(key, 0, "expected an integer");
    return v.get<int>();
}

std::string read_string(const json& j, const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ParseError(key, 0, "expected a string");
    return v.get<std::string>();
}

const char* const kKnownKeys[] = {
    "u_g_volt",      "omega_g_rad_s",     "omega_0_rad_s",
    "l_g_henry",     "r_g_ohm",           "i_dref_amp",
    "i_qref_amp",    "rated_current_amp", "k_ppll_rad_per_v_s",
    "k_ipll_rad_per_v_s2", "j_rad_per_v_s2", "d_v_s_per_rad",
    "k_fluct",       "model",             "duration_s",
    "dt_s",          "decimation",        "initial_delta_offset_rad",
    "initial_omega_offset_rad_s", "events", "sweep_l_g_min_henry",
    "sweep_l_g_max_henry", "sweep_points", "csv_path",
    "svg_path",
};

bool known_key(const std::string& key) {
    for (const char* k : kKnownKeys)
        if (key == k) return true;
    return false;
}

std::string format_field(const char* name, double value, const char* unit) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %-22s = %16.9e %s\n", name, value, unit);
    return buf;
}

std::string format_complex(const char* name, const std::complex<double>& value) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-22s = %16.9e %+.9e i 1/s\n", name, value.real(),
                  value.imag());
    return buf;
}

std::string controller_verdict(const Eigenpair& eigen) {
    const double re1 = eigen.lambda1.real();
    const double re2 = eigen.lambda2.real();
    if (re1 < 0.0 && re2 < 0.0) return "stable";
    if (re1 > 0.0 || re2 > 0.0) return "unstable";
    return "marginal";
}

ControllerReport make_controller_report(std::string name, const EquivalentCoefficients& coeffs,
                                        const GridParams& grid, double delta0) {
    ControllerReport r;
    r.name = std::move(name);
    r.coeffs = coeffs;
    r.eigen = eigenvalues(coeffs, grid, delta0);
    if (coeffs.j_e > 0.0 && std::cos(delta0) > 0.0)
        r.characteristics = second_order_characteristics(coeffs, grid, delta0);
    r.verdict = controller_verdict(r.eigen);
    return r;
}

}  // namespace

StudyConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", line_of_byte(text, e.byte), e.what());
    }
    if (!root.is_object()) throw ParseError("", 1, "top level must be a JSON object");

    for (const auto& [key, value] : root.items())
        if (!known_key(key)) throw ParseError(key, 0, "unknown key");

    StudyConfig cfg;
    if (root.contains("u_g_volt")) cfg.grid.u_g = read_number(root, "u_g_volt");
    if (root.contains("omega_g_rad_s")) cfg.grid.omega_g = read_number(root, "omega_g_rad_s");
    if (root.contains("omega_0_rad_s")) cfg.grid.omega_0 = read_number(root, "omega_0_rad_s");
    if (root.contains("l_g_henry")) cfg.grid.l_g = read_number(root, "l_g_henry");
    if (root.contains("r_g_ohm")) cfg.grid.r_g = read_number(root, "r_g_ohm");
    if (root.contains("i_dref_amp")) cfg.setpoint.i_dref = read_number(root, "i_dref_amp");
    if (root.contains("i_qref_amp")) cfg.setpoint.i_qref = read_number(root, "i_qref_amp");
    cfg.rated_current =
        root.contains("rated_current_amp") ? read_number(root, "rated_current_amp")
                                           : cfg.setpoint.i_dref;

    const bool has_kp = root.contains("k_ppll_rad_per_v_s");
    const bool has_ki = root.contains("k_ipll_rad_per_v_s2");
    if (has_kp != has_ki)
        throw ParseError(has_kp ? "k_ipll_rad_per_v_s2" : "k_ppll_rad_per_v_s", 0,
                         "PI gains must be given as a pair");
    if (has_kp)
        cfg.pll = PiPllGains{read_number(root, "k_ppll_rad_per_v_s"),
                             read_number(root, "k_ipll_rad_per_v_s2")};

    if (root.contains("j_rad_per_v_s2")) cfg.ipll.j = read_number(root, "j_rad_per_v_s2");
    if (root.contains("d_v_s_per_rad")) cfg.ipll.d = read_number(root, "d_v_s_per_rad");
    if (root.contains("k_fluct")) cfg.k_fluct = read_number(root, "k_fluct");

    if (root.contains("model")) {
        const std::string name = read_string(root, "model");
        const auto kind = model_from_name(name);
        if (!kind) throw ParseError("model", 0, "unknown model '" + name + "'");
        cfg.model = *kind;
    }
    if (root.contains("duration_s")) cfg.duration = read_number(root, "duration_s");
    if (root.contains("dt_s")) cfg.dt = read_number(root, "dt_s");
    if (root.contains("decimation")) cfg.decimation = read_int(root, "decimation");
    if (root.contains("initial_delta_offset_rad"))
        cfg.initial_delta_offset = read_number(root, "initial_delta_offset_rad");
    if (root.contains("initial_omega_offset_rad_s"))
        cfg.initial_omega_offset = read_number(root, "initial_omega_offset_rad_s");

    if (root.contains("events")) {
        const auto& events = root.at("events");
        if (!events.is_array()) throw ParseError("events", 0, "expected an array");
        for (std::size_t i = 0; i < events.size(); ++i) {
            const std::string where = "events[" + std::to_string(i) + "]";
            const auto& e = events[i];
            if (!e.is_object()) throw ParseError(where, 0, "expected an object");
            for (const auto& [key, value] : e.items())
                if (key != "time_s" && key != "target" && key != "value")
                    throw ParseError(where + "." + key, 0, "unknown key");
            if (!e.contains("time_s") || !e.contains("target") || !e.contains("value"))
                throw ParseError(where, 0, "needs time_s, target and value");
            if (!e.at("time_s").is_number() || !e.at("value").is_number())
                throw ParseError(where, 0, "time_s and value must be numbers");
            if (!e.at("target").is_string()) throw ParseError(where + ".target", 0, "expected a string");
            const std::string target_name = e.at("target").get<std::string>();
            const auto target = event_target_from_name(target_name);
            if (!target)
                throw ParseError(where + ".target", 0, "unknown target '" + target_name + "'");
            cfg.events.push_back(
                Event{e.at("time_s").get<double>(), *target, e.at("value").get<double>()});
        }
    }

    if (root.contains("sweep_l_g_min_henry"))
        cfg.sweep_l_min = read_number(root, "sweep_l_g_min_henry");
    if (root.contains("sweep_l_g_max_henry"))
        cfg.sweep_l_max = read_number(root, "sweep_l_g_max_henry");
    if (root.contains("sweep_points")) cfg.sweep_points = read_int(root, "sweep_points");
    if (root.contains("csv_path")) cfg.csv_path = read_string(root, "csv_path");
    if (root.contains("svg_path")) cfg.svg_path = read_string(root, "svg_path");

    if (auto violations = validate(cfg); !violations.empty())
        throw ConfigValidationError(std::move(violations));
    return cfg;
}

std::vector<Violation> validate(const StudyConfig& cfg) {
    std::vector<Violation> out = validate(cfg.grid, cfg.setpoint, cfg.ipll);
    if (cfg.pll) {
        auto vs = validate(cfg.grid, cfg.setpoint, *cfg.pll);
        for (auto& v : vs) {
            const bool duplicate =
                std::any_of(out.begin(), out.end(), [&](const Violation& o) {
                    return o.field == v.field && o.message == v.message;
                });
            if (!duplicate) out.push_back(std::move(v));
        }
    }
    if (!(cfg.rated_current > 0.0)) out.push_back({"rated_current_amp", "must be > 0"});
    if (!(cfg.k_fluct > 0.0)) out.push_back({"k_fluct", "must be > 0"});
    if (!(cfg.duration > 0.0)) out.push_back({"duration_s", "must be > 0"});
    if (!(cfg.dt > 0.0) || cfg.dt > cfg.duration)
        out.push_back({"dt_s", "must satisfy 0 < dt <= duration"});
    if (cfg.decimation < 1) out.push_back({"decimation", "must be >= 1"});
    if (!std::isfinite(cfg.initial_delta_offset))
        out.push_back({"initial_delta_offset_rad", "must be finite"});
    if (!std::isfinite(cfg.initial_omega_offset))
        out.push_back({"initial_omega_offset_rad_s", "must be finite"});
    if (!(cfg.sweep_l_min < cfg.sweep_l_max))
        out.push_back({"sweep_l_g_min_henry", "must be < sweep_l_g_max_henry"});
    if (cfg.sweep_points < 2) out.push_back({"sweep_points", "must be >= 2"});
    return out;
}

std::string config_to_json(const StudyConfig& cfg) {
    json root;
    root["u_g_volt"] = cfg.grid.u_g;
    root["omega_g_rad_s"] = cfg.grid.omega_g;
    root["omega_0_rad_s"] = cfg.grid.omega_0;
    root["l_g_henry"] = cfg.grid.l_g;
    root["r_g_ohm"] = cfg.grid.r_g;
    root["i_dref_amp"] = cfg.setpoint.i_dref;
    root["i_qref_amp"] = cfg.setpoint.i_qref;
    root["rated_current_amp"] = cfg.rated_current;
    if (cfg.pll) {
        root["k_ppll_rad_per_v_s"] = cfg.pll->k_ppll;
        root["k_ipll_rad_per_v_s2"] = cfg.pll->k_ipll;
    }
    root["j_rad_per_v_s2"] = cfg.ipll.j;
    root["d_v_s_per_rad"] = cfg.ipll.d;
    root["k_fluct"] = cfg.k_fluct;
    root["model"] = std::string(model_name(cfg.model));
    root["duration_s"] = cfg.duration;
    root["dt_s"] = cfg.dt;
    root["decimation"] = cfg.decimation;
    root["initial_delta_offset_rad"] = cfg.initial_delta_offset;
    root["initial_omega_offset_rad_s"] = cfg.initial_omega_offset;
    root["events"] = json::array();
    for (const Event& e : cfg.events) {
        json ev;
        ev["time_s"] = e.time;
        ev["target"] = std::string(event_target_name(e.target));
        ev["value"] = e.value;
        root["events"].push_back(ev);
    }
    root["sweep_l_g_min_henry"] = cfg.sweep_l_min;
    root["sweep_l_g_max_henry"] = cfg.sweep_l_max;
    root["sweep_points"] = cfg.sweep_points;
    root["csv_path"] = cfg.csv_path;
    root["svg_path"] = cfg.svg_path;
    return root.dump();
}

std::string emit_trajectory_csv(const Trajectory& trajectory) {
    std::string out = "t_s,delta_pll_rad,omega_pll_rad_s,u_q_v,l_g_henry,model\n";
    out.reserve(out.size() + trajectory.rows.size() * 120);
    const std::string model(model_name(trajectory.model));
    char buf[160];
    for (const auto& row : trajectory.rows) {
        std::snprintf(buf, sizeof(buf), "%.17e,%.17e,%.17e,%.17e,%.17e,", row.t, row.delta_pll,
                      row.omega_pll, row.u_q, row.l_g);
        out += buf;
        out += model;
        out += '\n';
    }
    return out;
}

std::string emit_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "l_g_henry,scr,delta0_rad,d_e_pll,d_e_ipll,j_e_pll,j_e_ipll,equilibrium_exists\n";
    out.reserve(out.size() + rows.size() * 150);
    char buf[220];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%d\n", row.l_g,
                      row.scr, row.delta0, row.d_e_pll, row.d_e_ipll, row.j_e_pll, row.j_e_ipll,
                      row.equilibrium_exists ? 1 : 0);
        out += buf;
    }
    return out;
}

Report analyze_study(const StudyConfig& cfg) {
    Report report;
    report.op = solve_equilibrium(cfg.grid, cfg.setpoint);
    report.ipll_gains = cfg.ipll;
    report.pll_gains_mapped = !cfg.pll.has_value();
    report.pll_gains = cfg.pll ? *cfg.pll : map_ipll_to_pll(cfg.ipll, cfg.grid, cfg.setpoint);

    report.pll = make_controller_report(
        "pi_pll", pll_coefficients(cfg.grid, cfg.setpoint, report.pll_gains, report.op.delta0),
        cfg.grid, report.op.delta0);
    report.ipll = make_controller_report(
        "ipll", ipll_coefficients(cfg.grid, cfg.setpoint, cfg.ipll), cfg.grid, report.op.delta0);

    const EnvelopePoint envelope[] = {{cfg.grid, cfg.setpoint}};
    report.bounds = damping_bounds(cfg.grid, cfg.setpoint, cfg.ipll, envelope, cfg.k_fluct);
    return report;
}

std::string format_report(const Report& report) {
    std::string out;
    out += "operating point\n";
    out += format_field("delta_0", report.op.delta0, "rad");
    out += format_field("p_in", report.op.p_in, "V");
    out += format_field("scr", report.op.scr, "(dimensionless)");
    out += std::string("  marginal               = ") + (report.op.marginal ? "yes" : "no") + "\n";

    char gains[256];
    std::snprintf(gains, sizeof(gains),
                  "pi-pll  (k_ppll = %.9g rad/(V*s), k_ipll = %.9g rad/(V*s^2)%s)\n",
                  report.pll_gains.k_ppll, report.pll_gains.k_ipll,
                  report.pll_gains_mapped ? ", mapped from ipll gains" : "");
    out += gains;
    std::snprintf(gains, sizeof(gains), "ipll    (j = %.9g rad/(V*s^2), d = %.9g V*s/rad)\n",
                  report.ipll_gains.j, report.ipll_gains.d);
    out += gains;

    for (const ControllerReport* c : {&report.pll, &report.ipll}) {
        out += c->name + " coefficients and modes\n";
        out += format_field("j_e", c->coeffs.j_e, "V*s^2/rad");
        out += format_field("d_e", c->coeffs.d_e, "V*s/rad");
        out += format_field("d_e1", c->coeffs.d_e1, "V*s/rad");
        out += format_field("d_e2", c->coeffs.d_e2, "V*s/rad");
        out += format_complex("lambda_1", c->eigen.lambda1);
        out += format_complex("lambda_2", c->eigen.lambda2);
        out += std::string("  conjugate pair         = ") +
               (c->eigen.is_conjugate ? "yes" : "no") + "\n";
        if (c->characteristics) {
            out += format_field("omega_n", c->characteristics->omega_n, "rad/s");
            out += format_field("zeta", c->characteristics->zeta, "(dimensionless)");
            out += format_field("omega_d", c->characteristics->omega_d, "rad/s");
        }
        out += "  verdict                = " + c->verdict + "\n";
    }

    out += "ipll damping design bounds\n";
    out += format_field("lower_exact", report.bounds.lower_exact, "V*s/rad");
    out += format_field("lower_conservative", report.bounds.lower_conservative, "V*s/rad");
    out += format_field("upper", report.bounds.upper, "V*s/rad");
    out += format_field("k_fluct", report.bounds.k_fluct, "(dimensionless)");
    return out;
}

}  // namespace syncsim
