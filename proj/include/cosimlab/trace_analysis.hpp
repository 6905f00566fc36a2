#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cosimlab/cosim.hpp"

namespace cosimlab {

/// Largest |x1| with time in [t0, t1).
[[nodiscard]] inline double window_amplitude(const SimulationTrace& trace, double t0, double t1) {
    double out = 0.0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.time[i] >= t0 && trace.time[i] < t1) {
            out = std::max(out, std::abs(trace.states[i].x1));
        }
    }
    return out;
}

struct AmplitudeTrend {
    double first = 0.0;  ///< amplitude in the first window
    double last = 0.0;   ///< amplitude in the last complete window
    double ratio = 0.0;  ///< last / first; below one means decaying
    std::vector<double> windows;
};

[[nodiscard]] inline AmplitudeTrend amplitude_trend(const SimulationTrace& trace, double window = 50.0) {
    if (!(window > 0.0)) {
        throw std::invalid_argument("amplitude_trend: window must be positive");
    }
    AmplitudeTrend out;
    if (trace.size() == 0) {
        return out;
    }
    const double end = trace.time.back() + trace.macro_step;
    const auto count = static_cast<std::size_t>(std::floor(end / window + 1e-9));
    for (std::size_t w = 0; w < std::max<std::size_t>(count, 1); ++w) {
        const double t0 = static_cast<double>(w) * window;
        out.windows.push_back(window_amplitude(trace, t0, t0 + window));
    }
    out.first = out.windows.front();
    out.last = out.windows.back();
    out.ratio = out.first > 0.0 ? out.last / out.first : (out.last > 0.0 ? INFINITY : 0.0);
    return out;
}

/// Response of the compensated velocity channel to one stop impact.
struct BounceOvershoot {
    std::size_t ordinal = 0;    ///< index into trace.stop_events
    std::size_t step = 0;       ///< macro step in which the impact happened
    double velocity_before = 0.0;
    double velocity_after = 0.0;
    double peak = 0.0;          ///< extreme compensated value in the direction of the jump
    double factor = 0.0;        ///< (peak - v_before) / (v_after - v_before)
    double excess = 0.0;        ///< max(u_hat - y) / (v_after - v_before), overshoot beyond the true signal
};

/// Looks at the compensated velocity channel from the impact until `span`
/// steps after the jump has reached the receiver.
[[nodiscard]] inline BounceOvershoot bounce_overshoot(const SimulationTrace& trace, std::size_t ordinal,
                                                      std::size_t delay_steps, std::size_t span = 20) {
    if (ordinal >= trace.stop_events.size()) {
        throw std::out_of_range("bounce_overshoot: no such stop event");
    }
    const auto& ev = trace.stop_events[ordinal];
    const auto& ch = trace.channel(CouplingChannel::Velocity);
    BounceOvershoot out;
    out.ordinal = ordinal;
    out.step = static_cast<std::size_t>(std::floor(ev.time / trace.macro_step));
    out.velocity_before = ev.velocity_before;
    out.velocity_after = ev.velocity_after;
    const double jump = ev.velocity_after - ev.velocity_before;
    const std::size_t begin = out.step + 1;
    const std::size_t end = std::min(ch.compensated.size(), begin + delay_steps + span);
    if (begin >= end || jump == 0.0) {
        return out;
    }
    const double sign = jump > 0.0 ? 1.0 : -1.0;
    out.peak = ch.compensated[begin];
    double excess = -INFINITY;
    for (std::size_t n = begin; n < end; ++n) {
        if (sign * ch.compensated[n] > sign * out.peak) {
            out.peak = ch.compensated[n];
        }
        excess = std::max(excess, sign * (ch.compensated[n] - ch.sent[n]));
    }
    out.factor = (out.peak - ev.velocity_before) / jump;
    out.excess = excess / std::abs(jump);
    return out;
}

/// Index of the first stop event at or after macro step `step`.
[[nodiscard]] inline std::optional<std::size_t> first_event_after(const SimulationTrace& trace, std::size_t step) {
    for (std::size_t i = 0; i < trace.stop_events.size(); ++i) {
        if (trace.stop_events[i].time >= static_cast<double>(step) * trace.macro_step) {
            return i;
        }
    }
    return std::nullopt;
}

}  // namespace cosimlab
