// cosimlab command-line front end: simulate | analyze | design.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cosimlab/cosimlab.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace cosimlab;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kDiverged = 3,
    kMarginal = 4,
    kNoImprovement = 5,
};

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool deterministic_training = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config, "Scenario file (JSON with comments)")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--out", args.out, "Output directory (default: output.dir of the scenario)");
    cmd->add_option("--seed", args.seed, "Seed for optimizer starts, training shuffles and random weights");
    cmd->add_flag("--deterministic-training", args.deterministic_training,
                  "Apply trained weights at fixed macro steps instead of on arrival");
}

ScenarioFile load(const CommonArgs& args, fs::path& out_dir) {
    ScenarioFile sc = load_scenario(args.config, environ);
    if (args.seed) {
        sc.seed = *args.seed;
    }
    if (args.deterministic_training) {
        sc.coupling.training.deterministic = true;
    }
    out_dir = args.out.empty() ? sc.resolve(sc.output.dir) : fs::path(args.out);
    fs::create_directories(out_dir);
    return sc;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
}

int cmd_simulate(const CommonArgs& args) {
    fs::path out_dir;
    const ScenarioFile sc = load(args, out_dir);
    CompensatorSet comps = make_compensators(sc);
    CosimOptions options;
    options.trainer = sc.trainer_config();

    const SimulationTrace trace = run_cosim(sc.coupling, sc.plant_setup(), comps, options);

    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const auto& ch = trace.channels[c];
        write_csv(out_dir / ("channel_" + std::string(kChannelNames[c]) + ".csv"),
                  {"time", "sent", "delayed", "compensated"}, {trace.time, ch.sent, ch.delayed, ch.compensated});
    }
    std::vector<double> x1, x2, v1, v2;
    for (const auto& s : trace.states) {
        x1.push_back(s.x1);
        x2.push_back(s.x2);
        v1.push_back(s.v1);
        v2.push_back(s.v2);
    }
    write_csv(out_dir / "states.csv", {"time", "x1", "x2", "v1", "v2"}, {trace.time, x1, x2, v1, v2});

    json summary;
    summary["duration"] = trace.size() * trace.macro_step;
    summary["steps"] = trace.size();
    summary["diverged"] = trace.diverged();
    summary["diverged_at"] = trace.diverged_at ? json(*trace.diverged_at) : json(nullptr);
    const AmplitudeTrend trend = amplitude_trend(trace, sc.output.amplitude_window);
    summary["amplitude"] = {{"window", sc.output.amplitude_window},
                            {"first", trend.first},
                            {"last", trend.last},
                            {"ratio", trend.ratio},
                            {"trend", trend.ratio < 1.0 ? "decaying" : "growing"},
                            {"windows", trend.windows}};
    json bounces = json::array();
    for (std::size_t i = 0; i < trace.stop_events.size(); ++i) {
        const auto& e = trace.stop_events[i];
        json b = {{"time", e.time}, {"velocity_before", e.velocity_before}, {"velocity_after", e.velocity_after}};
        const auto o = bounce_overshoot(trace, i, sc.coupling.delay_steps);
        b["overshoot_factor"] = o.factor;
        b["overshoot_excess"] = o.excess;
        bounces.push_back(std::move(b));
    }
    summary["stop_events"] = std::move(bounces);
    json cycles = json::array();
    for (const auto& l : trace.training) {
        cycles.push_back({{"channel", l.channel},
                          {"trigger_step", l.trigger_step},
                          {"applied_step", l.applied_step},
                          {"samples", l.sample_count},
                          {"cost_before", l.cost_before},
                          {"cost_after", l.cost_after},
                          {"accepted", l.accepted}});
    }
    summary["training"] = std::move(cycles);
    write_json(out_dir / "summary.json", summary);

    if (sc.compensator.kind == CompensatorKind::Network) {
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            std::ofstream w(out_dir / ("weights_" + std::string(kChannelNames[c]) + ".txt"));
            write_weights(w, *comps[c].network());
        }
    }

    std::cout << "simulated " << trace.size() << " steps, amplitude ratio " << trend.ratio << " ("
              << (trend.ratio < 1.0 ? "decaying" : "growing") << "), " << trace.stop_events.size()
              << " stop events, " << trace.training.size() << " training cycles\n";
    if (trace.diverged()) {
        std::cout << "diverged at t = " << *trace.diverged_at << " s\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_analyze(const CommonArgs& args) {
    fs::path out_dir;
    const ScenarioFile sc = load(args, out_dir);
    const auto tf = derive_plant_tf(sc.plant);
    const double dt = sc.coupling.macro_step;
    const double tau = sc.coupling.delay();
    const double w_hi = sc.analysis.omega_max > 0.0 ? sc.analysis.omega_max : 2.0 * std::numbers::pi / dt;
    const ExtrapolatorParams faults = ExtrapolatorParams::zoh(sc.coupling.history_len);
    const ExtrapolatorParams compensated = linear_params(sc);

    struct Case {
        const char* label;
        CouplingProcess process;
    };
    const Case cases[] = {{"reference", CouplingProcess::ideal()},
                          {"faults", {faults, dt, tau}},
                          {"compensated", {compensated, dt, tau}}};

    const auto grid = FrequencyGrid::log_spaced(sc.analysis.omega_min, w_hi, sc.analysis.points);
    bool marginal = false;
    json verdicts;
    for (const auto& c : cases) {
        const auto bode = sample_curve(c.label, grid, [&](double w) { return eval_open_loop(w, tf, c.process); });
        write_curve_csv(out_dir / (std::string("bode_") + c.label + ".csv"), bode);
        const auto nyq = open_loop_curve(c.label, tf, c.process, sc.analysis.omega_min, w_hi, sc.analysis.points);
        write_curve_csv(out_dir / (std::string("nyquist_") + c.label + ".csv"), nyq);
        const auto v = nyquist_verdict(nyq, {-1.0, 0.0}, sc.analysis.marginal_distance);
        marginal = marginal || v.verdict == StabilityVerdict::Marginal;
        verdicts[c.label] = {{"verdict", to_string(v.verdict)},
                             {"encirclements", v.encirclements},
                             {"min_distance", v.min_distance}};
        std::cout << c.label << ": " << to_string(v.verdict) << " (encirclements " << v.encirclements
                  << ", min distance to -1 " << v.min_distance << ")"
                  << (v.verdict == StabilityVerdict::Marginal ? "  MARGINAL: verdict unreliable" : "") << '\n';
    }

    // Analytic G_p against the time-domain oracle.
    const auto check_grid =
        FrequencyGrid::log_spaced(sc.analysis.empirical_min, sc.analysis.empirical_max, sc.analysis.empirical_points);
    for (const auto& [label, params] : {std::pair{"faults", faults}, std::pair{"compensated", compensated}}) {
        std::vector<double> are, aim, ere, eim, mag_err, phase_err;
        for (double w : check_grid.omega) {
            const cplx a = eval_gp(w, params, dt, tau);
            const cplx e = empirical_frequency_response(params, dt, tau, w);
            are.push_back(a.real());
            aim.push_back(a.imag());
            ere.push_back(e.real());
            eim.push_back(e.imag());
            mag_err.push_back(std::abs(std::abs(e) - std::abs(a)) / std::abs(a));
            phase_err.push_back(std::abs(std::arg(e / a)) * 180.0 / std::numbers::pi);
        }
        write_csv(out_dir / (std::string("gp_check_") + label + ".csv"),
                  {"omega", "analytic_re", "analytic_im", "empirical_re", "empirical_im", "mag_rel_err",
                   "phase_err_deg"},
                  {check_grid.omega, are, aim, ere, eim, mag_err, phase_err});
    }

    const auto alias = aliasing_check(sc.design.band_max, dt, sc.analysis.aliasing_margin);
    std::cout << "aliasing: omega_bar*dT = " << alias.ratio << " (margin " << alias.margin << ") "
              << (alias.pass ? "pass" : "fail") << '\n';
    verdicts["aliasing"] = {{"ratio", alias.ratio}, {"margin", alias.margin}, {"pass", alias.pass}};
    write_json(out_dir / "verdicts.json", verdicts);
    return marginal ? kMarginal : kOk;
}

json breakdown_json(const ObjectiveBreakdown& b) {
    return {{"J_a", b.ja}, {"J_p", b.jp}, {"J_r", b.jr}, {"J", b.total}};
}

int cmd_design(const CommonArgs& args) {
    fs::path out_dir;
    const ScenarioFile sc = load(args, out_dir);
    const DesignSpec spec = sc.design_spec();
    const std::size_t p = spec.p;
    ExtrapolatorParams init = ExtrapolatorParams::zoh(p);
    if (sc.design.init == "foh") {
        init = ExtrapolatorParams::foh_for_delay(p, sc.coupling.delay_steps);
    } else if (sc.design.init == "compensator") {
        init = sc.compensator.linear;
    }
    OptimizerConfig cfg;
    cfg.starts = sc.design.starts;
    cfg.seed = sc.seed;
    const DesignResult result = optimize(spec, init, cfg);
    const ObjectiveBreakdown zoh = objective(ExtrapolatorParams::zoh(p), spec);
    const BandDeviation dev = band_deviation(result.params, spec);

    write_json(out_dir / "design_params.json",
               {{"a", result.params.a}, {"b", result.params.b}, {"objective", breakdown_json(result.breakdown)}});
    ScenarioFile designed = sc;
    designed.compensator.kind = CompensatorKind::LinearAR;
    designed.coupling.compensator = CompensatorKind::LinearAR;
    designed.compensator.linear = result.params;
    designed.compensator.params_file = "design_params.json";
    designed.coupling.training.enabled = false;
    designed.output.dir = "simulate";
    {
        std::ofstream f(out_dir / "design_scenario.jsonc");
        f << "// Scenario using the designed extrapolator; reload with --config.\n" << emit_scenario(designed);
    }
    write_json(out_dir / "design_report.json", {{"improved", result.improved},
                                                {"result", breakdown_json(result.breakdown)},
                                                {"init", breakdown_json(result.initial)},
                                                {"zoh", breakdown_json(zoh)},
                                                {"band_max_phase_deg", dev.max_phase_deg},
                                                {"band_max_magnitude_error", dev.max_magnitude_error}});

    std::cout.precision(10);
    std::cout << "a =";
    for (double a : result.params.a) {
        std::cout << ' ' << a;
    }
    std::cout << ", b = " << result.params.b << '\n';
    std::cout << "J = " << result.breakdown.total << " (J_a " << result.breakdown.ja << ", J_p " << result.breakdown.jp
              << ", J_r " << result.breakdown.jr << ")\n";
    std::cout << "ZOH baseline J = " << zoh.total << " (J_a " << zoh.ja << ", J_p " << zoh.jp << ", J_r " << zoh.jr
              << ")\n";
    std::cout << "band max |phase| " << dev.max_phase_deg << " deg, band max ||G_p|-1| " << dev.max_magnitude_error
              << '\n';
    if (!result.improved) {
        std::cout << "warning: no start improved on the initial parameters; returning them unchanged\n";
        return kNoImprovement;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-compensated co-simulation of a split two-mass oscillator"};
    app.require_subcommand(1);
    CommonArgs sim_args, ana_args, des_args;
    auto* sim = app.add_subcommand("simulate", "Run the co-simulation and export traces");
    auto* ana = app.add_subcommand("analyze", "Bode/Nyquist data, stability verdicts and aliasing check");
    auto* des = app.add_subcommand("design", "Optimize the extrapolator coefficients");
    add_common(sim, sim_args);
    add_common(ana, ana_args);
    add_common(des, des_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (ana->parsed()) return cmd_analyze(ana_args);
        if (des->parsed()) return cmd_design(des_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
