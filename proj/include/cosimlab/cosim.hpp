#pragma once

// Macro-step co-simulation of the split two-mass oscillator. Per step both
// sides are sampled first, then every input receives its delayed, compensated
// value (Jacobi exchange), then both plants advance by one macro step with the
// input reconstructed by zero- or first-order hold.
//
// Channels: x1 and v1 travel from mass 1 to mass 2, the coupling force from
// mass 2 to mass 1. Each channel has its own compensator.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cosimlab/compensator.hpp"
#include "cosimlab/online_trainer.hpp"
#include "cosimlab/plants.hpp"
#include "cosimlab/scenario.hpp"
#include "cosimlab/signal_history.hpp"

namespace cosimlab {

enum class CouplingChannel : std::size_t { Position = 0, Velocity = 1, Force = 2 };

inline constexpr std::size_t kChannelCount = 3;
inline constexpr std::array<std::string_view, kChannelCount> kChannelNames{"x1", "v1", "force"};

[[nodiscard]] constexpr std::size_t index(CouplingChannel c) noexcept { return static_cast<std::size_t>(c); }

struct PlantSetup {
    OscillatorParams params;
    std::optional<StopParams> stop;
    TwoMassState initial{1.0, 1.0, 0.0, 0.0};
};

struct ChannelSeries {
    std::vector<double> sent;         ///< y_t, sampled at the sender
    std::vector<double> delayed;      ///< u_{t - tau}, newest sample at the receiver
    std::vector<double> compensated;  ///< u_hat_t, applied by the receiver

    friend bool operator==(const ChannelSeries&, const ChannelSeries&) = default;
};

/// Series on the macro time base; states are recorded at the start of each step.
struct SimulationTrace {
    double macro_step = 0.0;
    std::vector<double> time;
    std::array<ChannelSeries, kChannelCount> channels;
    std::vector<TwoMassState> states;
    std::vector<StopEvent> stop_events;
    std::vector<TrainingCycleLog> training;
    std::optional<double> diverged_at;  ///< time of the first non-finite value

    [[nodiscard]] bool diverged() const noexcept { return diverged_at.has_value(); }

    [[nodiscard]] const ChannelSeries& channel(CouplingChannel c) const { return channels[index(c)]; }
    [[nodiscard]] std::size_t size() const noexcept { return time.size(); }

    friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

using CompensatorSet = std::array<Compensator, kChannelCount>;

struct CosimOptions {
    TrainerConfig trainer;
    /// Optional hook on each sampled output before it enters the channel.
    std::function<double(CouplingChannel, std::int64_t, double)> sample_hook;
};

[[nodiscard]] inline CompensatorSet uniform_compensators(const Compensator& c) { return {c, c, c}; }

[[nodiscard]] inline bool all_finite(std::initializer_list<double> values) noexcept {
    for (double v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

/// Runs one experiment. Network compensators adapted online are updated in
/// place, so `compensators` holds the final weights afterwards.
[[nodiscard]] inline SimulationTrace run_cosim(const CouplingScenario& scenario, const PlantSetup& plant,
                                               CompensatorSet& compensators, const CosimOptions& options = {}) {
    scenario.validate();
    plant.params.validate();
    if (plant.stop) {
        plant.stop->validate();
        if (plant.initial.x1 < plant.stop->position) {
            throw ConfigError("initial", "x1", "initial position lies beyond the mechanical stop");
        }
    }
    const auto& p = plant.params;
    const std::size_t k = scenario.delay_steps;
    const double dt = scenario.macro_step;
    const std::size_t steps = scenario.step_count();

    MassState mass1{plant.initial.x1, plant.initial.v1};
    MassState mass2{plant.initial.x2, plant.initial.v2};
    double force_out = coupling_force(p, mass1.x, mass1.v, mass2);

    // Before delayed samples exist every input sees the sender's initial output.
    const std::array<double, kChannelCount> initial_outputs{mass1.x, mass1.v, force_out};
    std::vector<SignalHistory> histories;
    std::array<std::vector<double>, kChannelCount> windows;
    std::array<std::unique_ptr<OnlineAdapter>, kChannelCount> adapters;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        const std::size_t taps = compensators[c].history_len();
        histories.push_back(SignalHistory::for_delay(k, taps, initial_outputs[c]));
        windows[c].assign(taps, 0.0);
        if (scenario.training.enabled && compensators[c].is_network()) {
            TrainerConfig cfg = options.trainer;
            cfg.validate(taps, k);
            cfg.seed += c;
            adapters[c] = std::make_unique<OnlineAdapter>(std::string(kChannelNames[c]), cfg, scenario.training, taps, k);
        }
    }

    SimulationTrace trace;
    trace.macro_step = dt;
    trace.time.reserve(steps);
    trace.states.reserve(steps);
    for (auto& ch : trace.channels) {
        ch.sent.reserve(steps);
        ch.delayed.reserve(steps);
        ch.compensated.reserve(steps);
    }

    std::array<double, kChannelCount> previous_applied{};
    for (std::size_t step = 0; step < steps; ++step) {
        const auto n = static_cast<std::int64_t>(step);
        const double t = static_cast<double>(step) * dt;
        trace.time.push_back(t);
        trace.states.push_back({mass1.x, mass2.x, mass1.v, mass2.v});

        std::array<double, kChannelCount> outputs{mass1.x, mass1.v, force_out};
        std::array<double, kChannelCount> applied{};
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            if (options.sample_hook) {
                outputs[c] = options.sample_hook(static_cast<CouplingChannel>(c), n, outputs[c]);
            }
            auto& series = trace.channels[c];
            histories[c].push(n, outputs[c]);
            series.sent.push_back(outputs[c]);

            histories[c].delayed_read(n, k, windows[c]);
            series.delayed.push_back(windows[c].front());
            if (adapters[c]) {
                adapters[c]->on_step_boundary(n, series.delayed, *compensators[c].network(), trace.training);
            }
            applied[c] = compensators[c].predict(windows[c]);
            series.compensated.push_back(applied[c]);
        }

        std::array<InputRamp, kChannelCount> ramps{};
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            ramps[c] = scenario.reconstruction == Reconstruction::ZOH || step == 0
                           ? InputRamp::hold(applied[c])
                           : InputRamp{previous_applied[c], applied[c]};
        }
        previous_applied = applied;

        mass1 = step_mass1(p, mass1, ramps[index(CouplingChannel::Force)], dt, scenario.micro_steps, plant.stop, t,
                           &trace.stop_events);
        const Mass2Step m2 = step_mass2(p, mass2, ramps[index(CouplingChannel::Position)],
                                        ramps[index(CouplingChannel::Velocity)], dt, scenario.micro_steps);
        mass2 = m2.state;
        force_out = m2.force;

        if (!all_finite({mass1.x, mass1.v, mass2.x, mass2.v, force_out, applied[0], applied[1], applied[2]})) {
            trace.diverged_at = t + dt;
            break;
        }
    }
    for (auto& adapter : adapters) {
        if (adapter) {
            adapter->drain(trace.training);
        }
    }
    return trace;
}

[[nodiscard]] inline SimulationTrace run_cosim(const CouplingScenario& scenario, const PlantSetup& plant,
                                               CompensatorSet&& compensators, const CosimOptions& options = {}) {
    return run_cosim(scenario, plant, compensators, options);
}

}  // namespace cosimlab
