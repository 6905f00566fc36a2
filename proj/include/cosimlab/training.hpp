#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "cosimlab/error.hpp"
#include "cosimlab/network.hpp"

namespace cosimlab {

/// Input window of p consecutive samples (newest first) and the sample k
/// steps after the newest entry.
struct TrainingSample {
    std::vector<double> x;
    double y = 0.0;
};

struct AdamConfig {
    double step = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainerConfig {
    AdamConfig adam;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;  ///< 0 = full batch
    std::size_t max_samples = 5000;
    std::uint64_t seed = 1;

    void validate(std::size_t p, std::size_t k) const {
        if (!(adam.step > 0.0) || !(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0) ||
            !(adam.epsilon > 0.0)) {
            throw ConfigError("training", "adam", "optimizer constants must be positive with decays in (0, 1)");
        }
        if (epochs == 0) {
            throw ConfigError("training", "epochs", "at least one epoch is required");
        }
        if (max_samples < p + k + 1) {
            throw ConfigError("training", "max_samples", "buffer must hold at least p + k + 1 samples");
        }
    }
};

/// Sliding-window samples from one contiguous signal (oldest first in time);
/// keeps the `max_samples` most recent. Too short a signal gives an empty set.
[[nodiscard]] inline std::vector<TrainingSample> build_training_set(std::span<const double> signal, std::size_t p,
                                                                    std::size_t k, std::size_t max_samples) {
    std::vector<TrainingSample> out;
    if (p == 0 || signal.size() < p + k + 1 || max_samples == 0) {
        return out;
    }
    // The window ends at index e (newest), target at e + k.
    const std::size_t first_end = p - 1;
    const std::size_t last_end = signal.size() - 1 - k;
    const std::size_t count = last_end - first_end + 1;
    const std::size_t start = count > max_samples ? last_end + 1 - max_samples : first_end;
    out.reserve(std::min(count, max_samples));
    for (std::size_t e = start; e <= last_end; ++e) {
        TrainingSample s;
        s.x.resize(p);
        for (std::size_t i = 0; i < p; ++i) {
            s.x[i] = signal[e - i];
        }
        s.y = signal[e + k];
        out.push_back(std::move(s));
    }
    return out;
}

/// Mean squared error of the network over `samples`.
[[nodiscard]] inline double mse(const CompensatorNet& net, std::span<const TrainingSample> samples) {
    if (samples.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& s : samples) {
        const double r = net.forward(s.x) - s.y;
        acc += r * r;
    }
    return acc / static_cast<double>(samples.size());
}

struct TrainResult {
    CompensatorNet net;
    double cost_before = 0.0;
    double cost_after = 0.0;
    bool accepted = false;
};

/// Adam on the mean squared error. A cycle that ends with a higher or
/// non-finite training cost is discarded and the input weights are returned.
[[nodiscard]] inline TrainResult train(const CompensatorNet& net, std::span<const TrainingSample> samples,
                                       const TrainerConfig& cfg) {
    TrainResult result{net, 0.0, 0.0, false};
    if (samples.empty()) {
        throw std::invalid_argument("train: no training samples");
    }
    result.cost_before = mse(net, samples);
    result.cost_after = result.cost_before;

    CompensatorNet work = net;
    const std::size_t n_params = work.parameter_count();
    std::vector<double> m(n_params, 0.0);
    std::vector<double> v(n_params, 0.0);
    std::vector<double> grad(n_params, 0.0);
    std::vector<double> g_sample(n_params, 0.0);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    const std::size_t batch = cfg.batch_size == 0 ? samples.size() : std::min(cfg.batch_size, samples.size());
    const auto& adam = cfg.adam;
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < samples.size()) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (std::size_t begin = 0; begin < samples.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, samples.size());
            std::fill(grad.begin(), grad.end(), 0.0);
            const double scale = 2.0 / static_cast<double>(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                const auto& s = samples[order[i]];
                const double r = work.forward_with_gradient(s.x, g_sample) - s.y;
                for (std::size_t q = 0; q < n_params; ++q) {
                    grad[q] += scale * r * g_sample[q];
                }
            }
            beta1_t *= adam.beta1;
            beta2_t *= adam.beta2;
            auto params = work.parameters();
            for (std::size_t q = 0; q < n_params; ++q) {
                m[q] = adam.beta1 * m[q] + (1.0 - adam.beta1) * grad[q];
                v[q] = adam.beta2 * v[q] + (1.0 - adam.beta2) * grad[q] * grad[q];
                const double m_hat = m[q] / (1.0 - beta1_t);
                const double v_hat = v[q] / (1.0 - beta2_t);
                params[q] -= adam.step * m_hat / (std::sqrt(v_hat) + adam.epsilon);
            }
        }
    }

    const double after = mse(work, samples);
    if (std::isfinite(after) && after <= result.cost_before) {
        result.net = std::move(work);
        result.cost_after = after;
        result.accepted = true;
    }
    return result;
}

}  // namespace cosimlab
