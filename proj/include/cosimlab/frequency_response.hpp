#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosimlab/transfer.hpp"

namespace cosimlab {

struct FrequencyGrid {
    std::vector<double> omega;

    [[nodiscard]] static FrequencyGrid log_spaced(double lo, double hi, std::size_t n) {
        if (!(lo > 0.0) || !(hi > lo) || n < 2) {
            throw std::invalid_argument("FrequencyGrid::log_spaced: need 0 < lo < hi and n >= 2");
        }
        FrequencyGrid g;
        g.omega.resize(n);
        const double l0 = std::log10(lo);
        const double step = (std::log10(hi) - l0) / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            g.omega[i] = std::pow(10.0, l0 + step * static_cast<double>(i));
        }
        g.omega.front() = lo;
        g.omega.back() = hi;
        return g;
    }

    [[nodiscard]] static FrequencyGrid linear(double lo, double hi, std::size_t n) {
        if (!(hi > lo) || n < 2) {
            throw std::invalid_argument("FrequencyGrid::linear: need lo < hi and n >= 2");
        }
        FrequencyGrid g;
        g.omega.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            g.omega[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        g.omega.back() = hi;
        return g;
    }

    [[nodiscard]] bool strictly_increasing() const {
        return std::adjacent_find(omega.begin(), omega.end(), std::greater_equal<>()) == omega.end();
    }
};

struct FrequencyResponseCurve {
    std::string label;
    std::vector<double> omega;
    std::vector<cplx> value;

    [[nodiscard]] std::size_t size() const noexcept { return omega.size(); }
    [[nodiscard]] double magnitude_db(std::size_t i) const { return 20.0 * std::log10(std::abs(value[i])); }
    [[nodiscard]] double phase_deg(std::size_t i) const { return std::arg(value[i]) * 180.0 / std::numbers::pi; }
};

[[nodiscard]] inline FrequencyResponseCurve sample_curve(std::string label, const FrequencyGrid& grid,
                                                         const std::function<cplx(double)>& f) {
    FrequencyResponseCurve c{std::move(label), grid.omega, {}};
    c.value.reserve(grid.omega.size());
    for (double w : grid.omega) {
        c.value.push_back(f(w));
    }
    return c;
}

struct AdaptiveSampling {
    double max_phase_step = 0.05;  ///< rad, wrapped arg increment of (value - critical)
    double min_relative_gap = 1e-12;
    std::size_t max_points = 2'000'000;
    std::size_t minima_densify = 10;
};

/// Samples f on the base grid plus `focus` frequencies, then bisects every
/// interval in which the locus turns by more than max_phase_step around the
/// critical point. Local minima of |f - critical| get `minima_densify` extra
/// points on each side.
[[nodiscard]] inline FrequencyResponseCurve sample_adaptive(std::string label, const FrequencyGrid& base,
                                                            const std::function<cplx(double)>& f,
                                                            std::span<const double> focus, cplx critical,
                                                            const AdaptiveSampling& opt = {}) {
    std::vector<double> nodes = base.omega;
    const double lo = base.omega.front();
    const double hi = base.omega.back();
    for (double w : focus) {
        if (w > lo && w < hi) {
            // A narrow resonance between two base nodes can otherwise be missed.
            for (int i = -50; i <= 50; ++i) {
                nodes.push_back(w * (1.0 + 1e-5 * static_cast<double>(i)));
            }
        }
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    struct Node {
        double w;
        cplx v;
    };
    std::vector<Node> pts;
    pts.reserve(nodes.size());
    for (double w : nodes) {
        pts.push_back({w, f(w)});
    }

    auto turn = [&](const Node& a, const Node& b) { return std::abs(std::arg((b.v - critical) / (a.v - critical))); };

    std::vector<Node> refined;
    refined.reserve(pts.size() * 2);
    std::vector<Node> stack;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        refined.push_back(pts[i]);
        stack.assign({pts[i + 1]});
        Node left = pts[i];
        while (!stack.empty()) {
            const Node right = stack.back();
            const bool too_coarse = turn(left, right) > opt.max_phase_step;
            const bool can_split = (right.w - left.w) > opt.min_relative_gap * right.w;
            if (too_coarse && can_split && refined.size() + stack.size() < opt.max_points) {
                const double mid = 0.5 * (left.w + right.w);
                stack.push_back({mid, f(mid)});
            } else {
                stack.pop_back();
                refined.push_back(right);
                left = right;
            }
        }
        refined.pop_back();
    }
    refined.push_back(pts.back());

    if (opt.minima_densify > 0 && refined.size() >= 3) {
        std::vector<Node> extra;
        for (std::size_t i = 1; i + 1 < refined.size(); ++i) {
            const double d = std::abs(refined[i].v - critical);
            if (d <= std::abs(refined[i - 1].v - critical) && d <= std::abs(refined[i + 1].v - critical)) {
                for (std::size_t side = 0; side < 2; ++side) {
                    const double a = refined[i - 1 + side].w;
                    const double b = refined[i + side].w;
                    for (std::size_t j = 1; j <= opt.minima_densify; ++j) {
                        const double w = a + (b - a) * static_cast<double>(j) / static_cast<double>(opt.minima_densify + 1);
                        extra.push_back({w, f(w)});
                    }
                }
            }
        }
        refined.insert(refined.end(), extra.begin(), extra.end());
        std::sort(refined.begin(), refined.end(), [](const Node& a, const Node& b) { return a.w < b.w; });
        refined.erase(std::unique(refined.begin(), refined.end(),
                                  [](const Node& a, const Node& b) { return a.w == b.w; }),
                      refined.end());
    }

    FrequencyResponseCurve out{std::move(label), {}, {}};
    out.omega.reserve(refined.size());
    out.value.reserve(refined.size());
    for (const auto& n : refined) {
        out.omega.push_back(n.w);
        out.value.push_back(n.v);
    }
    return out;
}

/// Signed number of counter-clockwise turns of a closed path around `point`
/// (the path is closed implicitly from its last to its first vertex).
[[nodiscard]] inline double winding_number(std::span<const cplx> path, cplx point) {
    if (path.size() < 2) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const cplx a = path[i] - point;
        const cplx b = path[(i + 1) % path.size()] - point;
        total += std::arg(b / a);
    }
    return total / (2.0 * std::numbers::pi);
}

enum class StabilityVerdict { Stable, Unstable, Marginal };

[[nodiscard]] inline const char* to_string(StabilityVerdict v) noexcept {
    switch (v) {
        case StabilityVerdict::Stable: return "stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Marginal: return "marginal";
    }
    return "marginal";
}

struct NyquistResult {
    StabilityVerdict verdict = StabilityVerdict::Marginal;
    int encirclements = 0;  ///< counter-clockwise positive
    double min_distance = 0.0;
};

inline constexpr double kMarginalDistance = 1e-3;

/// Nyquist test for an open loop without unstable poles: the positive-frequency
/// curve is mirrored by conjugate symmetry and the closed contour must not
/// encircle the critical point.
[[nodiscard]] inline NyquistResult nyquist_verdict(const FrequencyResponseCurve& curve, cplx critical = {-1.0, 0.0},
                                                   double marginal_distance = kMarginalDistance) {
    if (curve.value.size() < 2) {
        throw std::invalid_argument("nyquist_verdict: curve needs at least two samples");
    }
    std::vector<cplx> path;
    path.reserve(2 * curve.value.size());
    for (auto it = curve.value.rbegin(); it != curve.value.rend(); ++it) {
        path.push_back(std::conj(*it));
    }
    path.insert(path.end(), curve.value.begin(), curve.value.end());

    NyquistResult r;
    r.min_distance = std::numeric_limits<double>::infinity();
    for (const cplx& v : curve.value) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw std::invalid_argument("nyquist_verdict: curve contains non-finite values");
        }
        r.min_distance = std::min(r.min_distance, std::abs(v - critical));
    }
    r.encirclements = static_cast<int>(std::lround(winding_number(path, critical)));
    if (r.min_distance < marginal_distance) {
        r.verdict = StabilityVerdict::Marginal;
    } else {
        r.verdict = r.encirclements == 0 ? StabilityVerdict::Stable : StabilityVerdict::Unstable;
    }
    return r;
}

/// Open-loop Nyquist curve of the split oscillator with one coupling process
/// per direction, sampled adaptively up to the sampling frequency.
[[nodiscard]] inline FrequencyResponseCurve open_loop_curve(std::string label, const PlantTransfer& plant,
                                                            const CouplingProcess& process, double omega_lo,
                                                            double omega_hi, std::size_t points,
                                                            const AdaptiveSampling& opt = {}) {
    std::vector<double> focus;
    for (const auto* den : {&plant.mass1.den, &plant.mass2.den}) {
        for (const cplx& pole : den->roots()) {
            focus.push_back(std::abs(pole.imag()));
        }
    }
    for (const cplx& pole : closed_loop_characteristic(plant).roots()) {
        focus.push_back(std::abs(pole.imag()));
    }
    const auto grid = FrequencyGrid::log_spaced(omega_lo, omega_hi, points);
    return sample_adaptive(std::move(label), grid, [&](double w) { return eval_open_loop(w, plant, process); },
                           focus, {-1.0, 0.0}, opt);
}

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-domain oracle for G_p: a unit sine is sampled every dT, delayed by
/// round(tau/dT) steps, extrapolated and held. The held output is projected
/// onto e^{j omega t} over whole periods; two consecutive windows must agree.
/// A constant bias has no content at omega > 0 and drops out of the projection.
[[nodiscard]] inline cplx empirical_frequency_response(const ExtrapolatorParams& params, double dt, double tau,
                                                       double omega, std::size_t min_samples = 4000) {
    params.validate();
    if (!(dt > 0.0) || !(tau >= 0.0)) {
        throw std::invalid_argument("empirical_frequency_response: need dT > 0 and tau >= 0");
    }
    if (omega == 0.0) {
        return params.dc_gain();
    }
    if (!(omega > 0.0) || !(omega * dt < std::numbers::pi)) {
        throw std::invalid_argument("empirical_frequency_response: need 0 < omega dT < pi");
    }
    const auto k = static_cast<long long>(std::llround(tau / dt));
    const auto p = static_cast<long long>(params.size());
    const double period = 2.0 * std::numbers::pi / omega;
    const double periods = std::max(1.0, std::ceil(static_cast<double>(min_samples) * dt / period));
    const double window = periods * period;

    // Held output on [n dT, (n+1) dT); the sine exists for all t, so there is
    // no start-up transient to discard.
    auto held = [&](long long n) {
        double acc = params.b;
        for (long long i = 0; i < p; ++i) {
            acc += params.a[static_cast<std::size_t>(i)] * std::sin(omega * static_cast<double>(n - k - i) * dt);
        }
        return acc;
    };
    // (2/T) * integral of u(t) e^{-j omega t} over [t0, t0 + T]; for
    // u = Im(G e^{j omega t}) this equals G / j.
    auto project = [&](double t0) {
        const double t1 = t0 + window;
        cplx acc = 0.0;
        auto n = static_cast<long long>(std::floor(t0 / dt));
        for (;; ++n) {
            const double a = std::max(t0, static_cast<double>(n) * dt);
            const double b = std::min(t1, static_cast<double>(n + 1) * dt);
            if (a >= t1) {
                break;
            }
            if (b > a) {
                const cplx seg = (std::exp(cplx(0.0, -omega * a)) - std::exp(cplx(0.0, -omega * b))) / cplx(0.0, omega);
                acc += held(n) * seg;
            }
        }
        return cplx(0.0, 1.0) * acc * (2.0 / window);
    };
    const cplx first = project(0.0);
    const cplx second = project(window);
    // The sampling grid is not commensurate with the period, so the windows
    // differ by a small leakage term.
    if (!(std::abs(first - second) <= 1e-4 * std::max(1.0, std::abs(first)))) {
        throw OracleError("empirical_frequency_response: projection did not converge");
    }
    return second;
}

}  // namespace cosimlab
