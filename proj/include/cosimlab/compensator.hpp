#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>

#include "cosimlab/extrapolator.hpp"
#include "cosimlab/network.hpp"
#include "cosimlab/scenario.hpp"

namespace cosimlab {

/// Delay compensator at one coupling input: either a fixed autoregressive
/// extrapolator or a (possibly online-adapted) network.
class Compensator {
public:
    explicit Compensator(ExtrapolatorParams params) : impl_(std::move(params)) {
        std::get<ExtrapolatorParams>(impl_).validate();
    }
    explicit Compensator(CompensatorNet net) : impl_(std::move(net)) {}

    [[nodiscard]] static Compensator pass_through(std::size_t p = 1) { return Compensator(ExtrapolatorParams::zoh(p)); }

    /// Compensator for one of the non-network kinds.
    [[nodiscard]] static Compensator of_kind(CompensatorKind kind, std::size_t p, std::size_t k,
                                             const ExtrapolatorParams& linear = {}) {
        switch (kind) {
            case CompensatorKind::None: return pass_through(p);
            case CompensatorKind::FOH: return Compensator(ExtrapolatorParams::foh_for_delay(p, k));
            case CompensatorKind::LinearAR:
                if (linear.size() != p) {
                    throw ConfigError("compensator", "a", "coefficient count must equal history_len");
                }
                return Compensator(linear);
            case CompensatorKind::Network:
                throw std::invalid_argument("Compensator::of_kind: network compensators need weights");
        }
        throw std::invalid_argument("Compensator::of_kind: unknown kind");
    }

    [[nodiscard]] std::size_t history_len() const {
        if (const auto* net = network()) {
            return net->inputs();
        }
        return std::get<ExtrapolatorParams>(impl_).size();
    }

    [[nodiscard]] double predict(std::span<const double> window) const {
        if (const auto* net = network()) {
            return net->forward(window);
        }
        return extrapolate_ar(std::get<ExtrapolatorParams>(impl_), window);
    }

    [[nodiscard]] bool is_network() const noexcept { return std::holds_alternative<CompensatorNet>(impl_); }
    [[nodiscard]] CompensatorNet* network() noexcept { return std::get_if<CompensatorNet>(&impl_); }
    [[nodiscard]] const CompensatorNet* network() const noexcept { return std::get_if<CompensatorNet>(&impl_); }
    [[nodiscard]] const ExtrapolatorParams* linear() const noexcept { return std::get_if<ExtrapolatorParams>(&impl_); }

private:
    std::variant<ExtrapolatorParams, CompensatorNet> impl_;
};

}  // namespace cosimlab
