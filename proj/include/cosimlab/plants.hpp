#pragma once

// Two-mass oscillator split at the coupling spring/damper (force/displacement
// coupling): mass 1 receives the coupling force, mass 2 receives position and
// velocity of mass 1 and computes the coupling force. An optional mechanical
// stop limits mass 1 from below and reflects its velocity with restitution e.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "cosimlab/error.hpp"
#include "cosimlab/integrator.hpp"

namespace cosimlab {

struct OscillatorParams {
    double m1 = 100.0;
    double m2 = 1.0;
    double c1 = 10.0;
    double c2 = 10.0;
    double cc = 10.0;
    double d1 = 0.01;
    double d2 = 0.01;
    double dc = 0.01;

    void validate() const {
        if (!(m1 > 0.0) || !(m2 > 0.0)) {
            throw ConfigError("plant", "m1/m2", "masses must be positive");
        }
        if (!(c1 > 0.0) || !(c2 > 0.0)) {
            throw ConfigError("plant", "c1/c2", "stiffnesses must be positive");
        }
        if (!(cc >= 0.0)) {
            throw ConfigError("plant", "cc", "coupling stiffness must be non-negative");
        }
        if (!(d1 >= 0.0) || !(d2 >= 0.0) || !(dc >= 0.0)) {
            throw ConfigError("plant", "d1/d2/dc", "dampings must be non-negative");
        }
    }
};

struct StopParams {
    double position = -0.1;  ///< lower bound for x1 [m]
    double restitution = 0.7;

    void validate() const {
        if (!(restitution > 0.0 && restitution <= 1.0)) {
            throw ConfigError("stop", "restitution", "restitution must lie in (0, 1]");
        }
        if (!std::isfinite(position)) {
            throw ConfigError("stop", "position", "stop position must be finite");
        }
    }
};

/// Position and velocity of one half-plant.
struct MassState {
    double x = 0.0;
    double v = 0.0;

    friend bool operator==(const MassState&, const MassState&) = default;
};

/// Full state of the uncoupled reference system.
struct TwoMassState {
    double x1 = 0.0;
    double x2 = 0.0;
    double v1 = 0.0;
    double v2 = 0.0;

    friend bool operator==(const TwoMassState&, const TwoMassState&) = default;
};

/// Input applied across one macro step; linear in the step fraction.
/// start == end is a zero-order hold.
struct InputRamp {
    double start = 0.0;
    double end = 0.0;

    [[nodiscard]] static constexpr InputRamp hold(double value) noexcept { return {value, value}; }
    [[nodiscard]] constexpr double at(double fraction) const noexcept { return start + (end - start) * fraction; }
};

struct StopEvent {
    double time = 0.0;
    double velocity_before = 0.0;
    double velocity_after = 0.0;

    friend bool operator==(const StopEvent&, const StopEvent&) = default;
};

/// Clamp to the stop and reflect an approaching velocity: v' = -e v.
[[nodiscard]] inline MassState apply_stop_event(MassState state, const StopParams& stop) noexcept {
    state.x = stop.position;
    if (state.v < 0.0) {
        state.v = -stop.restitution * state.v;
    }
    return state;
}

/// Coupling force computed by mass 2; acts with +F on mass 2 and -F on mass 1.
[[nodiscard]] inline double coupling_force(const OscillatorParams& p, double x1, double v1, const MassState& m2) noexcept {
    return p.cc * (x1 - m2.x) + p.dc * (v1 - m2.v);
}

namespace detail {

// Advances one micro step and resolves a stop crossing of component `pos`
// (velocity `vel`). The crossing time is located by linear interpolation inside
// the step; the remainder of the step is integrated from the reflected state.
template <std::size_t N, class Rhs>
StateVec<N> micro_step_with_stop(Rhs&& rhs, double t, const StateVec<N>& s, double h,
                                 const std::optional<StopParams>& stop, std::size_t pos, std::size_t vel,
                                 std::vector<StopEvent>* events) {
    StateVec<N> next = rk4_step(rhs, t, s, h);
    if (!stop || !(next[pos] < stop->position)) {
        return next;
    }
    const double drop = s[pos] - next[pos];
    double theta = drop > 0.0 ? (s[pos] - stop->position) / drop : 0.0;
    theta = std::clamp(theta, 0.0, 1.0);
    const double tc = t + theta * h;

    StateVec<N> at_stop{};
    for (std::size_t i = 0; i < N; ++i) {
        at_stop[i] = s[i] + theta * (next[i] - s[i]);
    }
    const MassState hit{stop->position, at_stop[vel]};
    const MassState bounced = apply_stop_event(hit, *stop);
    if (events != nullptr && hit.v < 0.0) {
        events->push_back({tc, hit.v, bounced.v});
    }
    at_stop[pos] = bounced.x;
    at_stop[vel] = bounced.v;

    const double rest = (1.0 - theta) * h;
    StateVec<N> out = rest > 0.0 ? rk4_step(rhs, tc, at_stop, rest) : at_stop;
    if (out[pos] < stop->position) {
        // Resting against the stop: the remaining motion is absorbed.
        const MassState again = apply_stop_event({out[pos], out[vel]}, *stop);
        if (events != nullptr && out[vel] < 0.0) {
            events->push_back({t + h, out[vel], again.v});
        }
        out[pos] = again.x;
        out[vel] = again.v;
    }
    return out;
}

}  // namespace detail

/// Advances mass 1 over one macro step `dt` with `micro_steps` RK4 sub-steps:
/// m1 x1'' = -c1 x1 - d1 v1 - F, where F is the coupling force sent by mass 2.
[[nodiscard]] inline MassState step_mass1(const OscillatorParams& p, MassState state, InputRamp force, double dt,
                                          int micro_steps = 10, const std::optional<StopParams>& stop = std::nullopt,
                                          double t0 = 0.0, std::vector<StopEvent>* events = nullptr) {
    const double h = dt / micro_steps;
    auto rhs = [&](double t, const StateVec<2>& s) {
        const double f = force.at((t - t0) / dt);
        return StateVec<2>{s[1], (-p.c1 * s[0] - p.d1 * s[1] - f) / p.m1};
    };
    StateVec<2> s{state.x, state.v};
    for (int i = 0; i < micro_steps; ++i) {
        s = detail::micro_step_with_stop(rhs, t0 + i * h, s, h, stop, 0, 1, events);
    }
    return {s[0], s[1]};
}

struct Mass2Step {
    MassState state;
    double force = 0.0;  ///< coupling force at the end of the step
};

/// Advances mass 2 over one macro step given the (held or ramped) position and
/// velocity of mass 1: m2 x2'' = -c2 x2 - d2 v2 + cc (x1 - x2) + dc (v1 - v2).
[[nodiscard]] inline Mass2Step step_mass2(const OscillatorParams& p, MassState state, InputRamp x1_in, InputRamp v1_in,
                                          double dt, int micro_steps = 10) {
    const double h = dt / micro_steps;
    auto rhs = [&](double t, const StateVec<2>& s) {
        const double frac = t / dt;
        const double f = p.cc * (x1_in.at(frac) - s[0]) + p.dc * (v1_in.at(frac) - s[1]);
        return StateVec<2>{s[1], (-p.c2 * s[0] - p.d2 * s[1] + f) / p.m2};
    };
    StateVec<2> s{state.x, state.v};
    for (int i = 0; i < micro_steps; ++i) {
        s = rk4_step(rhs, i * h, s, h);
    }
    const MassState out{s[0], s[1]};
    return {out, coupling_force(p, x1_in.end, v1_in.end, out)};
}

/// Right-hand side of the undivided two-mass system, state (x1, x2, v1, v2).
[[nodiscard]] inline StateVec<4> monolithic_rhs(const OscillatorParams& p, const StateVec<4>& s) noexcept {
    const double f = p.cc * (s[0] - s[1]) + p.dc * (s[2] - s[3]);
    return {s[2], s[3], (-p.c1 * s[0] - p.d1 * s[2] - f) / p.m1, (-p.c2 * s[1] - p.d2 * s[3] + f) / p.m2};
}

struct MonolithicTrace {
    std::vector<double> time;
    std::vector<TwoMassState> state;
    std::vector<StopEvent> events;
};

/// Integrates the full coupled system in one process (no sampling, no delay).
/// Samples are recorded every `stride` steps, including t = 0.
[[nodiscard]] inline MonolithicTrace run_monolithic(const OscillatorParams& p, const std::optional<StopParams>& stop,
                                                    TwoMassState x0, double duration, double dt = 1e-4,
                                                    std::size_t stride = 1) {
    p.validate();
    if (stop) {
        stop->validate();
    }
    if (!(duration > 0.0) || !(dt > 0.0) || stride == 0) {
        throw ConfigError("monolithic", "duration/dt", "duration, step and stride must be positive");
    }
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    MonolithicTrace out;
    out.time.reserve(steps / stride + 2);
    out.state.reserve(steps / stride + 2);

    auto rhs = [&](double, const StateVec<4>& s) { return monolithic_rhs(p, s); };
    StateVec<4> s{x0.x1, x0.x2, x0.v1, x0.v2};
    for (std::size_t n = 0; n <= steps; ++n) {
        if (n % stride == 0) {
            out.time.push_back(n * dt);
            out.state.push_back({s[0], s[1], s[2], s[3]});
        }
        if (n == steps) {
            break;
        }
        s = detail::micro_step_with_stop(rhs, n * dt, s, dt, stop, 0, 2, &out.events);
    }
    return out;
}

}  // namespace cosimlab
