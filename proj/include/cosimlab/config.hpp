#pragma once

// Scenario files are JSON with // and /* */ comments. Every section and key is
// optional; missing keys take the documented defaults, unknown keys are
// rejected. Environment variables COSIMLAB_<SECTION>__<KEY> override single
// keys (value parsed as JSON, else taken as a string); COSIMLAB_SEED sets the
// top-level seed.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "cosimlab/compensator.hpp"
#include "cosimlab/cosim.hpp"
#include "cosimlab/design.hpp"
#include "cosimlab/error.hpp"
#include "cosimlab/network.hpp"
#include "cosimlab/plants.hpp"
#include "cosimlab/scenario.hpp"
#include "cosimlab/training.hpp"
#include "cosimlab/transfer.hpp"

namespace cosimlab {

using json = nlohmann::json;

struct CompensatorConfig {
    CompensatorKind kind = CompensatorKind::None;
    ExtrapolatorParams linear = ExtrapolatorParams::zoh(4);
    std::string params_file;   ///< JSON {"a": [...], "b": ...}; overrides a and b
    std::string weights_file;  ///< network weights table; overrides network_init
    std::string network_init = "linear";  ///< "linear" (from a, b) or "random"
    std::size_t hidden = 2;
    Activation activation = Activation::LeakyReLU;
    double slope = kDefaultLeakySlope;
};

struct DesignConfig {
    double band_min = 1.0;
    double band_max = 6.0;
    int relative_degree = 2;
    double alpha = 100.0;
    double beta = 1.0;
    double gamma = 1e4;
    std::size_t starts = 20;
    std::string init = "zoh";  ///< "zoh", "foh" or "compensator" (the compensator section's a, b)
};

struct AnalysisConfig {
    double omega_min = 1e-2;
    double omega_max = 0.0;  ///< 0 means the sampling frequency 2 pi / macro_step
    std::size_t points = 2000;
    double marginal_distance = kMarginalDistance;
    double aliasing_margin = kDefaultAliasingMargin;
    std::size_t empirical_points = 30;
    double empirical_min = 0.1;
    double empirical_max = 100.0;
};

struct OutputConfig {
    std::string dir = "out";
    double amplitude_window = 50.0;
};

struct ScenarioFile {
    std::uint64_t seed = 1;
    OscillatorParams plant;
    bool stop_enabled = false;
    StopParams stop;
    TwoMassState initial{1.0, 1.0, 0.0, 0.0};
    CouplingScenario coupling;
    CompensatorConfig compensator;
    TrainerConfig trainer;
    DesignConfig design;
    AnalysisConfig analysis;
    OutputConfig output;
    std::filesystem::path base_dir;  ///< relative file references resolve here

    [[nodiscard]] PlantSetup plant_setup() const {
        return {plant, stop_enabled ? std::optional<StopParams>(stop) : std::nullopt, initial};
    }

    [[nodiscard]] DesignSpec design_spec() const {
        DesignSpec s;
        s.band_min = design.band_min;
        s.band_max = design.band_max;
        s.relative_degree = design.relative_degree;
        s.alpha = design.alpha;
        s.beta = design.beta;
        s.gamma = design.gamma;
        s.p = coupling.history_len;
        s.macro_step = coupling.macro_step;
        s.delay = coupling.delay();
        return s;
    }

    [[nodiscard]] TrainerConfig trainer_config() const {
        TrainerConfig t = trainer;
        t.seed = seed;
        return t;
    }

    [[nodiscard]] std::filesystem::path resolve(const std::string& file) const {
        const std::filesystem::path p(file);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
};

namespace detail {

class SectionReader {
public:
    SectionReader(const json& root, std::string name, std::initializer_list<std::string_view> keys)
        : name_(std::move(name)) {
        if (!root.contains(name_)) {
            return;
        }
        node_ = &root.at(name_);
        if (!node_->is_object()) {
            throw ConfigError(name_, "", "section must be an object");
        }
        for (const auto& [key, value] : node_->items()) {
            bool known = false;
            for (auto k : keys) {
                known = known || key == k;
            }
            if (!known) {
                throw ConfigError(name_, key, "unknown key");
            }
        }
    }

    template <class T>
    void get(std::string_view key, T& out) const {
        if (node_ == nullptr || !node_->contains(key)) {
            return;
        }
        const json& v = node_->at(std::string(key));
        try {
            if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_unsigned()) {
                    throw ConfigError(name_, std::string(key), "expected a non-negative integer");
                }
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer()) {
                    throw ConfigError(name_, std::string(key), "expected an integer");
                }
            }
            out = v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(name_, std::string(key), std::string("wrong type: ") + e.what());
        }
    }

    [[nodiscard]] bool has(std::string_view key) const { return node_ != nullptr && node_->contains(key); }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    const json* node_ = nullptr;
};

[[nodiscard]] inline json read_json_file(const std::filesystem::path& path, const std::string& section,
                                         const std::string& key) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(section, key, "cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(section, key, "cannot parse '" + path.string() + "': " + e.what());
    }
}

[[nodiscard]] inline ExtrapolatorParams read_params_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("a")) {
        throw ConfigError("compensator", "params_file", where + ": expected an object with key 'a'");
    }
    for (const auto& [key, value] : j.items()) {
        if (key != "a" && key != "b" && key != "objective") {
            throw ConfigError("compensator", "params_file", where + ": unknown key '" + key + "'");
        }
    }
    try {
        ExtrapolatorParams p{j.at("a").get<std::vector<double>>(), j.value("b", 0.0)};
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ConfigError("compensator", "params_file", where + ": " + e.what());
    }
}

inline void apply_env_overrides(json& root, char** envp) {
    if (envp == nullptr) {
        return;
    }
    constexpr std::string_view prefix = "COSIMLAB_";
    for (char** e = envp; *e != nullptr; ++e) {
        const std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq == std::string::npos || entry.compare(0, prefix.size(), prefix) != 0) {
            continue;
        }
        std::string name = entry.substr(prefix.size(), eq - prefix.size());
        const std::string raw = entry.substr(eq + 1);
        for (auto& c : name) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) {
            value = raw;
        }
        if (name == "seed") {
            root["seed"] = value;
            continue;
        }
        const auto sep = name.find("__");
        if (sep == std::string::npos) {
            continue;
        }
        root[name.substr(0, sep)][name.substr(sep + 2)] = value;
    }
}

}  // namespace detail

/// Builds a scenario from parsed JSON. Relative file references resolve
/// against `base_dir`.
[[nodiscard]] inline ScenarioFile parse_scenario(const json& root, const std::filesystem::path& base_dir = {}) {
    if (!root.is_object()) {
        throw ConfigError("", "", "scenario must be a JSON object");
    }
    static constexpr std::string_view sections[] = {"seed",       "plant",    "stop",     "initial",
                                                    "coupling",   "compensator", "training", "design",
                                                    "analysis",   "output"};
    for (const auto& [key, value] : root.items()) {
        bool known = false;
        for (auto s : sections) {
            known = known || key == s;
        }
        if (!known) {
            throw ConfigError(key, "", "unknown section");
        }
    }

    ScenarioFile sc;
    sc.base_dir = base_dir;
    if (root.contains("seed")) {
        if (!root.at("seed").is_number_unsigned()) {
            throw ConfigError("seed", "", "seed must be a non-negative integer");
        }
        sc.seed = root.at("seed").get<std::uint64_t>();
    }

    {
        detail::SectionReader r(root, "plant", {"m1", "m2", "c1", "c2", "cc", "d1", "d2", "dc"});
        auto& p = sc.plant;
        r.get("m1", p.m1);
        r.get("m2", p.m2);
        r.get("c1", p.c1);
        r.get("c2", p.c2);
        r.get("cc", p.cc);
        r.get("d1", p.d1);
        r.get("d2", p.d2);
        r.get("dc", p.dc);
        p.validate();
    }
    {
        detail::SectionReader r(root, "stop", {"enabled", "position", "restitution"});
        r.get("enabled", sc.stop_enabled);
        r.get("position", sc.stop.position);
        r.get("restitution", sc.stop.restitution);
        sc.stop.validate();
    }
    {
        detail::SectionReader r(root, "initial", {"x1", "x2", "v1", "v2"});
        r.get("x1", sc.initial.x1);
        r.get("x2", sc.initial.x2);
        r.get("v1", sc.initial.v1);
        r.get("v2", sc.initial.v2);
    }
    {
        detail::SectionReader r(root, "coupling",
                                {"macro_step", "delay_steps", "history_len", "reconstruction", "duration", "micro_steps"});
        auto& c = sc.coupling;
        r.get("macro_step", c.macro_step);
        r.get("delay_steps", c.delay_steps);
        r.get("history_len", c.history_len);
        r.get("duration", c.duration);
        r.get("micro_steps", c.micro_steps);
        if (r.has("reconstruction")) {
            std::string s;
            r.get("reconstruction", s);
            c.reconstruction = parse_reconstruction(s);
        }
    }
    {
        detail::SectionReader r(root, "compensator", {"kind", "a", "b", "params_file", "weights_file", "network_init",
                                                      "hidden", "activation", "slope"});
        auto& c = sc.compensator;
        if (r.has("kind")) {
            std::string s;
            r.get("kind", s);
            c.kind = parse_compensator_kind(s);
        }
        if (r.has("a")) {
            r.get("a", c.linear.a);
        } else {
            c.linear = ExtrapolatorParams::zoh(sc.coupling.history_len);
        }
        r.get("b", c.linear.b);
        r.get("params_file", c.params_file);
        r.get("weights_file", c.weights_file);
        r.get("network_init", c.network_init);
        r.get("hidden", c.hidden);
        r.get("slope", c.slope);
        if (r.has("activation")) {
            std::string s;
            r.get("activation", s);
            c.activation = parse_activation(s);
        }
        if (!c.params_file.empty()) {
            const auto path = sc.resolve(c.params_file);
            c.linear = detail::read_params_json(detail::read_json_file(path, "compensator", "params_file"),
                                                path.string());
        }
        c.linear.validate();
        if (c.network_init != "linear" && c.network_init != "random") {
            throw ConfigError("compensator", "network_init", "expected 'linear' or 'random'");
        }
        if (c.hidden == 0) {
            throw ConfigError("compensator", "hidden", "at least one hidden unit is required");
        }
        if (!(c.slope > 0.0 && c.slope < 1.0)) {
            throw ConfigError("compensator", "slope", "leaky slope must lie in (0, 1)");
        }
        if (c.linear.size() != sc.coupling.history_len) {
            throw ConfigError("compensator", "a", "coefficient count must equal coupling.history_len");
        }
        sc.coupling.compensator = c.kind;
    }
    {
        detail::SectionReader r(root, "training",
                                {"enabled", "first_trigger", "interval", "apply_latency", "deterministic", "epochs",
                                 "batch_size", "max_samples", "adam_step", "adam_beta1", "adam_beta2", "adam_epsilon"});
        auto& s = sc.coupling.training;
        r.get("enabled", s.enabled);
        r.get("first_trigger", s.first_trigger);
        r.get("interval", s.interval);
        r.get("apply_latency", s.apply_latency);
        r.get("deterministic", s.deterministic);
        auto& t = sc.trainer;
        r.get("epochs", t.epochs);
        r.get("batch_size", t.batch_size);
        r.get("max_samples", t.max_samples);
        r.get("adam_step", t.adam.step);
        r.get("adam_beta1", t.adam.beta1);
        r.get("adam_beta2", t.adam.beta2);
        r.get("adam_epsilon", t.adam.epsilon);
        t.validate(sc.coupling.history_len, sc.coupling.delay_steps);
        if (s.enabled && sc.compensator.kind != CompensatorKind::Network) {
            throw ConfigError("training", "enabled", "online training needs compensator.kind = network");
        }
    }
    {
        detail::SectionReader r(root, "design", {"band_min", "band_max", "relative_degree", "alpha", "beta", "gamma",
                                                 "starts", "init"});
        auto& d = sc.design;
        r.get("band_min", d.band_min);
        r.get("band_max", d.band_max);
        r.get("relative_degree", d.relative_degree);
        r.get("alpha", d.alpha);
        r.get("beta", d.beta);
        r.get("gamma", d.gamma);
        r.get("starts", d.starts);
        r.get("init", d.init);
        if (d.init != "zoh" && d.init != "foh" && d.init != "compensator") {
            throw ConfigError("design", "init", "expected 'zoh', 'foh' or 'compensator'");
        }
        if (d.starts == 0) {
            throw ConfigError("design", "starts", "at least one start is required");
        }
    }
    {
        detail::SectionReader r(root, "analysis", {"omega_min", "omega_max", "points", "marginal_distance",
                                                   "aliasing_margin", "empirical_points", "empirical_min",
                                                   "empirical_max"});
        auto& a = sc.analysis;
        r.get("omega_min", a.omega_min);
        r.get("omega_max", a.omega_max);
        r.get("points", a.points);
        r.get("marginal_distance", a.marginal_distance);
        r.get("aliasing_margin", a.aliasing_margin);
        r.get("empirical_points", a.empirical_points);
        r.get("empirical_min", a.empirical_min);
        r.get("empirical_max", a.empirical_max);
        if (!(a.omega_min > 0.0) || a.points < 2) {
            throw ConfigError("analysis", "omega_min", "need omega_min > 0 and at least two points");
        }
        if (!(a.empirical_min > 0.0 && a.empirical_max > a.empirical_min) || a.empirical_points < 2) {
            throw ConfigError("analysis", "empirical_min", "need 0 < empirical_min < empirical_max, two points");
        }
    }
    {
        detail::SectionReader r(root, "output", {"dir", "amplitude_window"});
        r.get("dir", sc.output.dir);
        r.get("amplitude_window", sc.output.amplitude_window);
        if (!(sc.output.amplitude_window > 0.0)) {
            throw ConfigError("output", "amplitude_window", "window must be positive");
        }
    }

    sc.coupling.validate();
    if (sc.stop_enabled && sc.initial.x1 < sc.stop.position) {
        throw ConfigError("initial", "x1", "initial position lies beyond the mechanical stop");
    }
    return sc;
}

[[nodiscard]] inline ScenarioFile parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir = {},
                                                      char** envp = nullptr) {
    json root = json::parse(text, nullptr, false, true);
    if (root.is_discarded()) {
        throw ConfigError("", "", "scenario is not valid JSON");
    }
    detail::apply_env_overrides(root, envp);
    return parse_scenario(root, base_dir);
}

[[nodiscard]] inline ScenarioFile load_scenario(const std::filesystem::path& path, char** envp = nullptr) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "", "cannot open config '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path.parent_path(), envp);
}

[[nodiscard]] inline json to_json(const ScenarioFile& sc) {
    json j;
    j["seed"] = sc.seed;
    const auto& p = sc.plant;
    j["plant"] = {{"m1", p.m1}, {"m2", p.m2}, {"c1", p.c1}, {"c2", p.c2},
                  {"cc", p.cc}, {"d1", p.d1}, {"d2", p.d2}, {"dc", p.dc}};
    j["stop"] = {{"enabled", sc.stop_enabled}, {"position", sc.stop.position}, {"restitution", sc.stop.restitution}};
    j["initial"] = {{"x1", sc.initial.x1}, {"x2", sc.initial.x2}, {"v1", sc.initial.v1}, {"v2", sc.initial.v2}};
    const auto& c = sc.coupling;
    j["coupling"] = {{"macro_step", c.macro_step},         {"delay_steps", c.delay_steps},
                     {"history_len", c.history_len},       {"reconstruction", to_string(c.reconstruction)},
                     {"duration", c.duration},             {"micro_steps", c.micro_steps}};
    const auto& k = sc.compensator;
    j["compensator"] = {{"kind", to_string(k.kind)},  {"a", k.linear.a},          {"b", k.linear.b},
                        {"network_init", k.network_init}, {"hidden", k.hidden},
                        {"activation", to_string(k.activation)}, {"slope", k.slope}};
    if (!k.params_file.empty()) {
        j["compensator"]["params_file"] = k.params_file;
    }
    if (!k.weights_file.empty()) {
        j["compensator"]["weights_file"] = k.weights_file;
    }
    const auto& s = c.training;
    const auto& t = sc.trainer;
    j["training"] = {{"enabled", s.enabled},
                     {"first_trigger", s.first_trigger},
                     {"interval", s.interval},
                     {"apply_latency", s.apply_latency},
                     {"deterministic", s.deterministic},
                     {"epochs", t.epochs},
                     {"batch_size", t.batch_size},
                     {"max_samples", t.max_samples},
                     {"adam_step", t.adam.step},
                     {"adam_beta1", t.adam.beta1},
                     {"adam_beta2", t.adam.beta2},
                     {"adam_epsilon", t.adam.epsilon}};
    const auto& d = sc.design;
    j["design"] = {{"band_min", d.band_min}, {"band_max", d.band_max}, {"relative_degree", d.relative_degree},
                   {"alpha", d.alpha},       {"beta", d.beta},         {"gamma", d.gamma},
                   {"starts", d.starts},     {"init", d.init}};
    const auto& a = sc.analysis;
    j["analysis"] = {{"omega_min", a.omega_min},
                     {"omega_max", a.omega_max},
                     {"points", a.points},
                     {"marginal_distance", a.marginal_distance},
                     {"aliasing_margin", a.aliasing_margin},
                     {"empirical_points", a.empirical_points},
                     {"empirical_min", a.empirical_min},
                     {"empirical_max", a.empirical_max}};
    j["output"] = {{"dir", sc.output.dir}, {"amplitude_window", sc.output.amplitude_window}};
    return j;
}

[[nodiscard]] inline std::string emit_scenario(const ScenarioFile& sc) { return to_json(sc).dump(2) + "\n"; }

/// Extrapolator used for the compensated analysis curve and as design start.
[[nodiscard]] inline ExtrapolatorParams linear_params(const ScenarioFile& sc) {
    switch (sc.compensator.kind) {
        case CompensatorKind::None: return ExtrapolatorParams::zoh(sc.coupling.history_len);
        case CompensatorKind::FOH: return ExtrapolatorParams::foh_for_delay(sc.coupling.history_len, sc.coupling.delay_steps);
        case CompensatorKind::LinearAR:
        case CompensatorKind::Network: return sc.compensator.linear;
    }
    return sc.compensator.linear;
}

[[nodiscard]] inline CompensatorNet make_network(const ScenarioFile& sc) {
    const auto& c = sc.compensator;
    if (!c.weights_file.empty()) {
        const auto path = sc.resolve(c.weights_file);
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("compensator", "weights_file", "cannot open '" + path.string() + "'");
        }
        CompensatorNet net = read_weights(in);
        if (net.inputs() != sc.coupling.history_len) {
            throw ConfigError("compensator", "weights_file", "network input width must equal coupling.history_len");
        }
        return net;
    }
    if (c.network_init == "random") {
        std::mt19937_64 rng(sc.seed);
        return random_net(sc.coupling.history_len, c.hidden, rng, c.activation, c.slope);
    }
    if (c.hidden != 2) {
        throw ConfigError("compensator", "hidden", "linear initialization needs exactly two hidden units");
    }
    return init_from_linear(c.linear, c.slope, c.activation);
}

/// One compensator instance per coupling input.
[[nodiscard]] inline CompensatorSet make_compensators(const ScenarioFile& sc) {
    const auto& c = sc.coupling;
    if (sc.compensator.kind == CompensatorKind::Network) {
        return uniform_compensators(Compensator(make_network(sc)));
    }
    return uniform_compensators(Compensator::of_kind(sc.compensator.kind, c.history_len, c.delay_steps, sc.compensator.linear));
}

}  // namespace cosimlab
