#include "syncsim/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>

#include "syncsim/analysis.hpp"

namespace syncsim {

namespace {

constexpr double kSettleBand = 1e-3;          // [rad] band around the final angle
constexpr double kSettleWindow = 0.10;        // fraction of the run that must hold the band
constexpr double kEnvelopeGrowth = 1.01;      // growth over 3 consecutive peaks => diverged
constexpr double kResidualTolFactor = 2e-3;   // residual tolerance as a fraction of u_g
constexpr double kPeakNoiseFloor = 1e-9;      // [rad] extrema below this are ignored
constexpr double kEventTimeTol = 1e-9;        // event times must sit on the step grid

using State = std::array<double, 2>;

struct ModelContext {
    ModelKind model;
    GridParams grid;
    InverterSetpoint setpoint;
    PiPllGains pll{};
    IpllGains ipll{};
};

State eval_rhs(const ModelContext& ctx, const State& y) {
    StateDerivative d{};
    switch (ctx.model) {
        case ModelKind::PllReduced:
            d = pll_reduced_rhs(ctx.grid, ctx.setpoint, ctx.pll, SyncState{y[0], y[1]});
            break;
        case ModelKind::IpllReduced:
            d = ipll_reduced_rhs(ctx.grid, ctx.setpoint, ctx.ipll, SyncState{y[0], y[1]});
            break;
        case ModelKind::PllSignal:
            d = pll_signal_rhs(ctx.grid, ctx.setpoint, ctx.pll, SignalPllState{y[0], y[1]});
            break;
        case ModelKind::IpllSignal:
            d = ipll_signal_rhs(ctx.grid, ctx.setpoint, ctx.ipll, SyncState{y[0], y[1]});
            break;
    }
    return State{d.d_delta, d.d_aux};
}

State rk4_step(const ModelContext& ctx, const State& y, double dt) {
    const State k1 = eval_rhs(ctx, y);
    const State k2 = eval_rhs(ctx, {y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]});
    const State k3 = eval_rhs(ctx, {y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]});
    const State k4 = eval_rhs(ctx, {y[0] + dt * k3[0], y[1] + dt * k3[1]});
    return State{y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                 y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

void apply_event(ModelContext& ctx, const Event& event) {
    switch (event.target) {
        case Event::Target::GridInductance: ctx.grid.l_g = event.value; break;
        case Event::Target::GridVoltage: ctx.grid.u_g = event.value; break;
        case Event::Target::GridFrequency: ctx.grid.omega_g = event.value; break;
        case Event::Target::CurrentD: ctx.setpoint.i_dref = event.value; break;
        case Event::Target::CurrentQ: ctx.setpoint.i_qref = event.value; break;
    }
}

bool uses_pi_gains(ModelKind model) {
    return model == ModelKind::PllReduced || model == ModelKind::PllSignal;
}

double resolved_omega(const ModelContext& ctx, const State& y) {
    if (ctx.model == ModelKind::PllSignal)
        return pll_signal_omega(ctx.grid, ctx.setpoint, ctx.pll, SignalPllState{y[0], y[1]});
    return y[1];
}

struct Extremum {
    double time;
    double amplitude;  // |delta - reference| at the refined vertex
    double value;      // signed refined value
    bool is_max;       // local maximum of (delta - reference), else minimum
};

// Local extrema of x_i = value_i - reference over uniformly sampled rows,
// refined by a parabola through the three samples around each vertex.
std::vector<Extremum> find_extrema(const std::vector<TrajectoryRow>& rows, double reference,
                                   double floor) {
    std::vector<Extremum> out;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double y0 = rows[i - 1].delta_pll - reference;
        const double y1 = rows[i].delta_pll - reference;
        const double y2 = rows[i + 1].delta_pll - reference;
        const bool is_max = y1 >= y0 && y1 > y2;
        const bool is_min = y1 <= y0 && y1 < y2;
        if (!is_max && !is_min) continue;
        const double h = rows[i].t - rows[i - 1].t;
        const double curvature = y0 - 2.0 * y1 + y2;
        double t_star = rows[i].t;
        double v_star = y1;
        if (curvature != 0.0) {
            t_star += 0.5 * h * (y0 - y2) / curvature;
            v_star -= (y0 - y2) * (y0 - y2) / (8.0 * curvature);
        }
        if (std::abs(v_star) <= floor) continue;
        out.push_back(Extremum{t_star, std::abs(v_star), v_star, is_max});
    }
    return out;
}

// First extremum completing a run of 3 consecutive same-kind peaks whose
// amplitude is strictly increasing and grows by more than kEnvelopeGrowth
// overall. Maxima and minima are tracked separately: around a large
// steady-state angle the two envelope sides differ by more than the growth
// threshold, so mixing them would mask slow divergence.
const Extremum* find_envelope_growth(const std::vector<Extremum>& peaks, bool want_max) {
    const Extremum* prev2 = nullptr;
    const Extremum* prev1 = nullptr;
    for (const auto& peak : peaks) {
        if (peak.is_max != want_max) continue;
        if (prev2 != nullptr && prev2->amplitude < prev1->amplitude &&
            prev1->amplitude < peak.amplitude &&
            peak.amplitude > kEnvelopeGrowth * prev2->amplitude)
            return &peak;
        prev2 = prev1;
        prev1 = &peak;
    }
    return nullptr;
}

}  // namespace

std::string_view event_target_name(Event::Target target) {
    switch (target) {
        case Event::Target::GridInductance: return "l_g_henry";
        case Event::Target::GridVoltage: return "u_g_volt";
        case Event::Target::GridFrequency: return "omega_g_rad_s";
        case Event::Target::CurrentD: return "i_dref_amp";
        case Event::Target::CurrentQ: return "i_qref_amp";
    }
    return "unknown";
}

std::optional<Event::Target> event_target_from_name(std::string_view name) {
    if (name == "l_g_henry") return Event::Target::GridInductance;
    if (name == "u_g_volt") return Event::Target::GridVoltage;
    if (name == "omega_g_rad_s") return Event::Target::GridFrequency;
    if (name == "i_dref_amp") return Event::Target::CurrentD;
    if (name == "i_qref_amp") return Event::Target::CurrentQ;
    return std::nullopt;
}

std::string_view verdict_name(StabilityVerdict::Kind kind) {
    switch (kind) {
        case StabilityVerdict::Kind::Settled: return "settled";
        case StabilityVerdict::Kind::Diverged: return "diverged";
        case StabilityVerdict::Kind::Marginal: return "marginal";
    }
    return "unknown";
}

std::vector<Violation> validate(const Scenario& scenario) {
    std::vector<Violation> out;
    if (!(scenario.duration > 0.0)) out.push_back({"duration", "must be > 0"});
    if (!(scenario.dt > 0.0) || scenario.dt > scenario.duration)
        out.push_back({"dt", "must satisfy 0 < dt <= duration"});
    if (scenario.decimation < 1) out.push_back({"decimation", "must be >= 1"});
    if (!std::isfinite(scenario.initial.delta_pll) || !std::isfinite(scenario.initial.omega_pll))
        out.push_back({"initial", "must be finite"});

    const bool pi_model = uses_pi_gains(scenario.model);
    if (pi_model && !std::holds_alternative<PiPllGains>(scenario.gains))
        out.push_back({"gains", "model requires PI-PLL gains"});
    if (!pi_model && !std::holds_alternative<IpllGains>(scenario.gains))
        out.push_back({"gains", "model requires IPLL gains"});

    GridParams grid = scenario.grid;
    InverterSetpoint setpoint = scenario.setpoint;
    auto check_params = [&](const std::string& where) {
        std::vector<Violation> vs;
        if (pi_model && std::holds_alternative<PiPllGains>(scenario.gains))
            vs = validate(grid, setpoint, std::get<PiPllGains>(scenario.gains));
        else if (!pi_model && std::holds_alternative<IpllGains>(scenario.gains))
            vs = validate(grid, setpoint, std::get<IpllGains>(scenario.gains));
        else
            vs = validate(grid);
        for (auto& v : vs) out.push_back({where + v.field, v.message});
    };
    check_params("");

    double prev_time = -1.0;
    for (std::size_t i = 0; i < scenario.events.size(); ++i) {
        const Event& e = scenario.events[i];
        const std::string where = "events[" + std::to_string(i) + "].";
        if (!(e.time >= 0.0) || e.time > scenario.duration)
            out.push_back({where + "time", "must lie in [0, duration]"});
        if (e.time <= prev_time) out.push_back({where + "time", "must be strictly increasing"});
        prev_time = e.time;
        if (scenario.dt > 0.0) {
            const double steps = e.time / scenario.dt;
            if (std::abs(steps - std::round(steps)) > kEventTimeTol * std::max(1.0, steps))
                out.push_back({where + "time", "must be an integer multiple of dt"});
        }
        if (!std::isfinite(e.value)) {
            out.push_back({where + "value", "must be finite"});
            continue;
        }
        Event applied = e;
        ModelContext ctx{scenario.model, grid, setpoint, {}, {}};
        apply_event(ctx, applied);
        grid = ctx.grid;
        setpoint = ctx.setpoint;
        check_params(where);
    }
    return out;
}

Trajectory integrate(const Scenario& scenario) {
    if (auto violations = validate(scenario); !violations.empty())
        throw ScenarioError(violations.front().field + ": " + violations.front().message);

    ModelContext ctx{scenario.model, scenario.grid, scenario.setpoint, {}, {}};
    if (uses_pi_gains(scenario.model))
        ctx.pll = std::get<PiPllGains>(scenario.gains);
    else
        ctx.ipll = std::get<IpllGains>(scenario.gains);

    State y{scenario.initial.delta_pll, scenario.initial.omega_pll};
    if (scenario.model == ModelKind::PllSignal)
        y[1] = pll_signal_state_from_sync(ctx.grid, ctx.setpoint, ctx.pll, scenario.initial).x_int;

    const long n_steps = static_cast<long>(std::floor(scenario.duration / scenario.dt + 1e-9));

    // Events indexed by the step at which they fire.
    std::vector<std::pair<long, Event>> events;
    events.reserve(scenario.events.size());
    for (const Event& e : scenario.events)
        events.emplace_back(static_cast<long>(std::llround(e.time / scenario.dt)), e);

    Trajectory traj;
    traj.model = scenario.model;
    traj.rows.reserve(static_cast<std::size_t>(n_steps / scenario.decimation) + 2);

    std::size_t next_event = 0;
    bool aborted = false;
    double abort_time = 0.0;
    for (long k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * scenario.dt;
        while (next_event < events.size() && events[next_event].first == k)
            apply_event(ctx, events[next_event++].second);
        if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
            aborted = true;
            abort_time = t;
            break;
        }
        if (k % scenario.decimation == 0) {
            const double omega = resolved_omega(ctx, y);
            traj.rows.push_back(TrajectoryRow{t, y[0], omega,
                                              pcc_uq(ctx.grid, ctx.setpoint, y[0], omega),
                                              ctx.grid.l_g});
        }
        if (k < n_steps) y = rk4_step(ctx, y, scenario.dt);
    }

    if (aborted || traj.rows.empty()) {
        traj.verdict.kind = StabilityVerdict::Kind::Diverged;
        traj.verdict.detect_time = abort_time;
        traj.verdict.reason = "non-finite state";
        return traj;
    }
    traj.verdict = detect_instability(traj, driving_term(ctx.grid, ctx.setpoint), ctx.grid.u_g);
    return traj;
}

StabilityVerdict detect_instability(const Trajectory& trajectory, double p_in, double u_g) {
    const auto& rows = trajectory.rows;
    if (rows.empty()) throw Error("detect_instability requires a non-empty trajectory");

    const double delta_ref =
        std::abs(p_in) <= u_g ? std::asin(p_in / u_g) : std::copysign(kPi / 2.0, p_in);

    for (const auto& row : rows) {
        if (std::abs(row.delta_pll) > kPi) {
            StabilityVerdict v;
            v.kind = StabilityVerdict::Kind::Diverged;
            v.detect_time = row.t;
            v.reason = "|delta| exceeded pi: loss of synchronism";
            return v;
        }
    }

    const auto peaks = find_extrema(rows, delta_ref, kPeakNoiseFloor);
    const Extremum* growth = find_envelope_growth(peaks, true);
    if (growth == nullptr) growth = find_envelope_growth(peaks, false);
    if (growth != nullptr) {
        StabilityVerdict v;
        v.kind = StabilityVerdict::Kind::Diverged;
        v.detect_time = growth->time;
        v.reason = "growing oscillation envelope";
        return v;
    }

    const double delta_final = rows.back().delta_pll;
    const double t_end = rows.back().t;
    const double window_start = t_end - kSettleWindow * (t_end - rows.front().t);
    bool window_ok = true;
    for (auto it = rows.rbegin(); it != rows.rend() && it->t >= window_start; ++it) {
        if (std::abs(it->delta_pll - delta_final) > kSettleBand) {
            window_ok = false;
            break;
        }
    }
    const double residual = std::abs(u_g * std::sin(delta_final) - p_in);
    if (window_ok && residual < kResidualTolFactor * u_g) {
        double settle_time = rows.front().t;
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            if (std::abs(it->delta_pll - delta_final) > kSettleBand) {
                settle_time = it->t + (rows.size() > 1 ? rows[1].t - rows[0].t : 0.0);
                break;
            }
        }
        StabilityVerdict v;
        v.kind = StabilityVerdict::Kind::Settled;
        v.settle_time = settle_time;
        v.final_delta = delta_final;
        return v;
    }
    return StabilityVerdict{};  // Marginal
}

DampingEstimate measure_damping(const Trajectory& trajectory) {
    const auto& rows = trajectory.rows;
    if (rows.size() < 3) throw InsufficientOscillationError(0);
    const double delta_final = rows.back().delta_pll;
    const auto extrema = find_extrema(rows, delta_final, kPeakNoiseFloor);
    const int n = static_cast<int>(extrema.size());
    if (n < 3) throw InsufficientOscillationError(n);

    const double mean_interval =
        (extrema.back().time - extrema.front().time) / static_cast<double>(n - 1);
    const double omega_d = kPi / mean_interval;

    // Log decrement over same-sign peak pairs (one full period apart).
    double log_sum = 0.0;
    int pairs = 0;
    for (int i = 0; i + 2 < n; ++i) {
        if ((extrema[i].value > 0.0) != (extrema[i + 2].value > 0.0)) continue;
        log_sum += std::log(extrema[i].amplitude / extrema[i + 2].amplitude);
        ++pairs;
    }
    if (pairs == 0) throw InsufficientOscillationError(n);
    const double decrement = log_sum / static_cast<double>(pairs);
    const double zeta = decrement / std::sqrt(4.0 * kPi * kPi + decrement * decrement);
    return DampingEstimate{omega_d, zeta, n};
}

std::vector<GridStrengthRun> run_figure6_suite(const GridStrengthStudy& study) {
    std::vector<Scenario> scenarios;
    scenarios.reserve(study.l_g_values.size() * 2);
    for (double l_g : study.l_g_values) {
        GridParams grid = study.grid_template;
        grid.l_g = l_g;
        const OperatingPoint op = solve_equilibrium(grid, study.setpoint);
        const SyncState initial{op.delta0 + study.delta_offset, grid.omega_g};
        for (ModelKind model : {ModelKind::PllReduced, ModelKind::IpllReduced}) {
            Scenario scenario;
            scenario.model = model;
            scenario.grid = grid;
            scenario.setpoint = study.setpoint;
            if (model == ModelKind::PllReduced)
                scenario.gains = study.pll;
            else
                scenario.gains = study.ipll;
            scenario.initial = initial;
            scenario.duration = study.duration;
            scenario.dt = study.dt;
            scenario.decimation = study.decimation;
            scenarios.push_back(std::move(scenario));
        }
    }

    // Each run owns its state; fan out and join by index.
    std::vector<std::future<Trajectory>> futures;
    futures.reserve(scenarios.size());
    for (const Scenario& scenario : scenarios)
        futures.push_back(std::async(std::launch::async, [&scenario] { return integrate(scenario); }));

    std::vector<GridStrengthRun> runs;
    runs.reserve(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        runs.push_back(GridStrengthRun{scenarios[i].grid.l_g, scenarios[i].model,
                                       futures[i].get()});
    return runs;
}

}  // namespace syncsim
