#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "cosimlab/error.hpp"

namespace cosimlab {

enum class Reconstruction { ZOH, FOH };

enum class CompensatorKind {
    None,      ///< pass-through of the newest delayed sample (trivial ZOH)
    FOH,       ///< linear extrapolation over the delay
    LinearAR,  ///< autoregressive extrapolator with given coefficients
    Network,   ///< feedforward network, optionally adapted online
};

/// When online training cycles start and when their weights are applied.
struct TrainingSchedule {
    bool enabled = false;
    std::size_t first_trigger = 5000;  ///< macro step of the first cycle
    std::size_t interval = 5000;       ///< macro steps between cycles; 0 = single cycle
    std::size_t apply_latency = 1000;  ///< deterministic mode: steps from trigger to weight swap
    bool deterministic = true;
};

struct CouplingScenario {
    double macro_step = 1e-3;
    std::size_t delay_steps = 3;
    std::size_t history_len = 4;
    Reconstruction reconstruction = Reconstruction::ZOH;
    CompensatorKind compensator = CompensatorKind::None;
    double duration = 500.0;
    int micro_steps = 10;
    TrainingSchedule training;

    [[nodiscard]] double delay() const noexcept { return static_cast<double>(delay_steps) * macro_step; }

    [[nodiscard]] std::size_t step_count() const noexcept {
        return static_cast<std::size_t>(std::llround(duration / macro_step));
    }

    void validate() const {
        if (!(macro_step > 0.0) || !std::isfinite(macro_step)) {
            throw ConfigError("coupling", "macro_step", "macro step must be positive");
        }
        if (history_len < 1) {
            throw ConfigError("coupling", "history_len", "history length must be at least 1");
        }
        if (!(duration >= macro_step)) {
            throw ConfigError("coupling", "duration", "duration must be at least one macro step");
        }
        if (micro_steps < 1) {
            throw ConfigError("coupling", "micro_steps", "at least one micro step per macro step is required");
        }
        if (compensator == CompensatorKind::FOH && history_len < 2) {
            throw ConfigError("compensator", "kind", "FOH extrapolation needs history_len >= 2");
        }
    }
};

[[nodiscard]] inline std::string_view to_string(Reconstruction r) noexcept {
    return r == Reconstruction::ZOH ? "zoh" : "foh";
}

[[nodiscard]] inline std::string_view to_string(CompensatorKind k) noexcept {
    switch (k) {
        case CompensatorKind::None: return "none";
        case CompensatorKind::FOH: return "foh";
        case CompensatorKind::LinearAR: return "linear_ar";
        case CompensatorKind::Network: return "network";
    }
    return "none";
}

[[nodiscard]] inline Reconstruction parse_reconstruction(std::string_view s) {
    if (s == "zoh") return Reconstruction::ZOH;
    if (s == "foh") return Reconstruction::FOH;
    throw ConfigError("coupling", "reconstruction", "expected 'zoh' or 'foh', got '" + std::string(s) + "'");
}

[[nodiscard]] inline CompensatorKind parse_compensator_kind(std::string_view s) {
    if (s == "none") return CompensatorKind::None;
    if (s == "foh") return CompensatorKind::FOH;
    if (s == "linear_ar") return CompensatorKind::LinearAR;
    if (s == "network") return CompensatorKind::Network;
    throw ConfigError("compensator", "kind",
                      "expected one of none|foh|linear_ar|network, got '" + std::string(s) + "'");
}

}  // namespace cosimlab
