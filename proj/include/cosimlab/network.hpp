#pragma once

// Small feedforward extrapolator: p inputs, one hidden layer, one output.
// With linear activation it is an autoregressive model; with leaky ReLU it is
// piecewise linear, one affine map per hidden-unit activation pattern.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cosimlab/error.hpp"
#include "cosimlab/extrapolator.hpp"

namespace cosimlab {

enum class Activation { Linear, LeakyReLU };

inline constexpr double kDefaultLeakySlope = 0.01;

[[nodiscard]] constexpr double leaky_relu(double z, double slope) noexcept { return z > 0.0 ? z : slope * z; }

[[nodiscard]] inline std::string_view to_string(Activation a) noexcept {
    return a == Activation::Linear ? "linear" : "leaky_relu";
}

[[nodiscard]] inline Activation parse_activation(std::string_view s) {
    if (s == "linear") return Activation::Linear;
    if (s == "leaky_relu") return Activation::LeakyReLU;
    throw ConfigError("compensator", "activation", "expected 'linear' or 'leaky_relu', got '" + std::string(s) + "'");
}

class CompensatorNet {
public:
    CompensatorNet(std::size_t inputs, std::size_t hidden, Activation activation = Activation::LeakyReLU,
                   double slope = kDefaultLeakySlope)
        : inputs_(inputs), hidden_(hidden), activation_(activation), slope_(slope),
          params_(hidden * inputs + 2 * hidden + 1, 0.0) {
        if (inputs == 0 || hidden == 0) {
            throw ConfigError("compensator", "hidden", "network needs at least one input and one hidden unit");
        }
        if (hidden > 31) {
            throw ConfigError("compensator", "hidden", "at most 31 hidden units are supported");
        }
        if (!(slope > 0.0 && slope < 1.0)) {
            throw ConfigError("compensator", "slope", "leaky slope must lie in (0, 1)");
        }
    }

    [[nodiscard]] std::size_t inputs() const noexcept { return inputs_; }
    [[nodiscard]] std::size_t hidden() const noexcept { return hidden_; }
    [[nodiscard]] Activation activation() const noexcept { return activation_; }
    [[nodiscard]] double slope() const noexcept { return slope_; }

    /// Flat parameters in row-major layer order: W1 (hidden x inputs), b1, w2, b2.
    [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
    [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }

    [[nodiscard]] double& w1(std::size_t unit, std::size_t input) { return params_[unit * inputs_ + input]; }
    [[nodiscard]] double w1(std::size_t unit, std::size_t input) const { return params_[unit * inputs_ + input]; }
    [[nodiscard]] double& b1(std::size_t unit) { return params_[hidden_ * inputs_ + unit]; }
    [[nodiscard]] double b1(std::size_t unit) const { return params_[hidden_ * inputs_ + unit]; }
    [[nodiscard]] double& w2(std::size_t unit) { return params_[hidden_ * inputs_ + hidden_ + unit]; }
    [[nodiscard]] double w2(std::size_t unit) const { return params_[hidden_ * inputs_ + hidden_ + unit]; }
    [[nodiscard]] double& b2() { return params_.back(); }
    [[nodiscard]] double b2() const { return params_.back(); }

    [[nodiscard]] double pre_activation(std::size_t unit, std::span<const double> window) const {
        double z = b1(unit);
        for (std::size_t i = 0; i < inputs_; ++i) {
            z += w1(unit, i) * window[i];
        }
        return z;
    }

    [[nodiscard]] double forward(std::span<const double> window) const {
        check_window(window);
        double out = b2();
        for (std::size_t j = 0; j < hidden_; ++j) {
            out += w2(j) * activate(pre_activation(j, window));
        }
        return out;
    }

    /// Output and its gradient with respect to parameters(); `grad` is overwritten.
    double forward_with_gradient(std::span<const double> window, std::span<double> grad) const {
        check_window(window);
        if (grad.size() != params_.size()) {
            throw std::invalid_argument("CompensatorNet: gradient buffer has wrong size");
        }
        double out = b2();
        for (std::size_t j = 0; j < hidden_; ++j) {
            const double z = pre_activation(j, window);
            const double d = derivative(z);
            const double back = w2(j) * d;
            for (std::size_t i = 0; i < inputs_; ++i) {
                grad[j * inputs_ + i] = back * window[i];
            }
            grad[hidden_ * inputs_ + j] = back;
            const double act = activate(z);
            grad[hidden_ * inputs_ + hidden_ + j] = act;
            out += w2(j) * act;
        }
        grad.back() = 1.0;
        return out;
    }

    /// Bit j set when hidden unit j is in its positive (identity) region.
    [[nodiscard]] std::uint32_t activation_pattern(std::span<const double> window) const {
        check_window(window);
        std::uint32_t mask = 0;
        for (std::size_t j = 0; j < hidden_; ++j) {
            if (pre_activation(j, window) > 0.0) {
                mask |= 1u << j;
            }
        }
        return mask;
    }

    [[nodiscard]] std::size_t region_count() const noexcept {
        return activation_ == Activation::Linear ? 1 : (std::size_t{1} << hidden_);
    }

    /// Affine map (a, b) realized on the region with activation pattern `mask`.
    [[nodiscard]] ExtrapolatorParams region_params(std::uint32_t mask) const {
        ExtrapolatorParams out{std::vector<double>(inputs_, 0.0), b2()};
        for (std::size_t j = 0; j < hidden_; ++j) {
            const bool active = activation_ == Activation::Linear || ((mask >> j) & 1u) != 0;
            const double gain = w2(j) * (active ? 1.0 : slope_);
            for (std::size_t i = 0; i < inputs_; ++i) {
                out.a[i] += gain * w1(j, i);
            }
            out.b += gain * b1(j);
        }
        return out;
    }

    /// Coefficients of the equivalent autoregressive model; linear activation only.
    [[nodiscard]] ExtrapolatorParams linear_equivalent() const {
        if (activation_ != Activation::Linear) {
            throw std::logic_error("CompensatorNet: linear_equivalent requires linear activation");
        }
        return region_params(0);
    }

    friend bool operator==(const CompensatorNet&, const CompensatorNet&) = default;

private:
    [[nodiscard]] double activate(double z) const noexcept {
        return activation_ == Activation::Linear ? z : leaky_relu(z, slope_);
    }
    [[nodiscard]] double derivative(double z) const noexcept {
        return activation_ == Activation::Linear || z > 0.0 ? 1.0 : slope_;
    }
    void check_window(std::span<const double> window) const {
        if (window.size() != inputs_) {
            throw std::invalid_argument("CompensatorNet: window length does not match input width");
        }
    }

    std::size_t inputs_;
    std::size_t hidden_;
    Activation activation_;
    double slope_;
    std::vector<double> params_;
};

[[nodiscard]] inline double mlp_forward(const CompensatorNet& net, std::span<const double> window) {
    return net.forward(window);
}

/// Two-unit network that reproduces (a, b) exactly with both units carrying
/// signal: W1 = [a; -a], b1 = 0, w2 = [1, -1] / (1 + slope), b2 = b, using
/// LReLU(z) - LReLU(-z) = (1 + slope) z.
[[nodiscard]] inline CompensatorNet init_from_linear(const ExtrapolatorParams& params,
                                                     double slope = kDefaultLeakySlope,
                                                     Activation activation = Activation::LeakyReLU) {
    params.validate();
    CompensatorNet net(params.size(), 2, activation, slope);
    // Linear units pass z unchanged, so the output scale is 1 / 2 instead.
    const double scale = activation == Activation::Linear ? 0.5 : 1.0 / (1.0 + slope);
    for (std::size_t i = 0; i < params.size(); ++i) {
        net.w1(0, i) = params.a[i];
        net.w1(1, i) = -params.a[i];
    }
    net.w2(0) = scale;
    net.w2(1) = -scale;
    net.b2() = params.b;
    return net;
}

/// Glorot-uniform weights, zero biases.
[[nodiscard]] inline CompensatorNet random_net(std::size_t inputs, std::size_t hidden, std::mt19937_64& rng,
                                               Activation activation = Activation::LeakyReLU,
                                               double slope = kDefaultLeakySlope) {
    CompensatorNet net(inputs, hidden, activation, slope);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    std::uniform_real_distribution<double> u1(-lim1, lim1);
    std::uniform_real_distribution<double> u2(-lim2, lim2);
    for (std::size_t j = 0; j < hidden; ++j) {
        for (std::size_t i = 0; i < inputs; ++i) {
            net.w1(j, i) = u1(rng);
        }
        net.w2(j) = u2(rng);
    }
    return net;
}

// Text table of weights, one layer block per line group.
inline void write_weights(std::ostream& os, const CompensatorNet& net) {
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << "# cosimlab compensator network\n";
    os << "inputs " << net.inputs() << "\n";
    os << "hidden " << net.hidden() << "\n";
    os << "activation " << to_string(net.activation()) << "\n";
    os << "slope " << net.slope() << "\n";
    for (std::size_t j = 0; j < net.hidden(); ++j) {
        os << "W1";
        for (std::size_t i = 0; i < net.inputs(); ++i) {
            os << ' ' << net.w1(j, i);
        }
        os << "\n";
    }
    auto row = [&](const char* name, auto get) {
        os << name;
        for (std::size_t j = 0; j < net.hidden(); ++j) {
            os << ' ' << get(j);
        }
        os << "\n";
    };
    row("b1", [&](std::size_t j) { return net.b1(j); });
    row("w2", [&](std::size_t j) { return net.w2(j); });
    os << "b2 " << net.b2() << "\n";
    os.precision(old_precision);
}

[[nodiscard]] inline CompensatorNet read_weights(std::istream& is) {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    Activation activation = Activation::LeakyReLU;
    double slope = kDefaultLeakySlope;
    std::vector<std::vector<double>> w1_rows;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
    bool have_b2 = false;

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        auto values = [&] {
            std::vector<double> v;
            double x = 0.0;
            while (ls >> x) {
                v.push_back(x);
            }
            return v;
        };
        if (key == "inputs") {
            ls >> inputs;
        } else if (key == "hidden") {
            ls >> hidden;
        } else if (key == "activation") {
            std::string a;
            ls >> a;
            activation = parse_activation(a);
        } else if (key == "slope") {
            ls >> slope;
        } else if (key == "W1") {
            w1_rows.push_back(values());
        } else if (key == "b1") {
            b1 = values();
        } else if (key == "w2") {
            w2 = values();
        } else if (key == "b2") {
            ls >> b2;
            have_b2 = true;
        } else {
            throw ConfigError("weights", key, "unknown row in weights table");
        }
    }
    CompensatorNet net(inputs, hidden, activation, slope);
    if (w1_rows.size() != hidden || b1.size() != hidden || w2.size() != hidden || !have_b2) {
        throw ConfigError("weights", "", "weights table is incomplete");
    }
    for (std::size_t j = 0; j < hidden; ++j) {
        if (w1_rows[j].size() != inputs) {
            throw ConfigError("weights", "W1", "row " + std::to_string(j) + " has wrong width");
        }
        for (std::size_t i = 0; i < inputs; ++i) {
            net.w1(j, i) = w1_rows[j][i];
        }
        net.b1(j) = b1[j];
        net.w2(j) = w2[j];
    }
    net.b2() = b2;
    return net;
}

}  // namespace cosimlab
