#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "cosimlab/error.hpp"

namespace cosimlab {

/// Linear autoregressive extrapolator u_hat = a . u + b, where u holds the p
/// newest delayed samples, newest first.
struct ExtrapolatorParams {
    std::vector<double> a;
    double b = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return a.size(); }

    /// Sum a + b; equals one for designs that reproduce constant signals.
    [[nodiscard]] double dc_gain() const noexcept { return std::accumulate(a.begin(), a.end(), 0.0) + b; }

    void validate() const {
        if (a.empty()) {
            throw ConfigError("compensator", "a", "at least one coefficient is required");
        }
        for (double v : a) {
            if (!std::isfinite(v)) {
                throw ConfigError("compensator", "a", "coefficients must be finite");
            }
        }
        if (!std::isfinite(b)) {
            throw ConfigError("compensator", "b", "bias must be finite");
        }
    }

    /// Hold the newest delayed sample: a = [1, 0, ..., 0].
    [[nodiscard]] static ExtrapolatorParams zoh(std::size_t p) {
        ExtrapolatorParams out{std::vector<double>(p, 0.0), 0.0};
        out.a.at(0) = 1.0;
        return out;
    }

    /// Linear extrapolation across k delay steps from the two newest samples:
    /// a = [1 + k, -k, 0, ...]; exact on ramps.
    [[nodiscard]] static ExtrapolatorParams foh_for_delay(std::size_t p, std::size_t k) {
        if (p < 2) {
            throw ConfigError("compensator", "history_len", "first-order extrapolation needs p >= 2");
        }
        ExtrapolatorParams out{std::vector<double>(p, 0.0), 0.0};
        out.a[0] = 1.0 + static_cast<double>(k);
        out.a[1] = -static_cast<double>(k);
        return out;
    }

    friend bool operator==(const ExtrapolatorParams&, const ExtrapolatorParams&) = default;
};

[[nodiscard]] inline double extrapolate_ar(const ExtrapolatorParams& params, std::span<const double> window) {
    if (window.size() != params.a.size()) {
        throw std::invalid_argument("extrapolate_ar: window length does not match coefficient count");
    }
    return std::inner_product(params.a.begin(), params.a.end(), window.begin(), params.b);
}

}  // namespace cosimlab
