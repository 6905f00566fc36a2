#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosimlab/error.hpp"

namespace cosimlab {

/// Fixed-capacity ring buffer of samples, one per macro step, written in
/// strictly increasing macro index starting at 0. Indices before the start of
/// the simulation read as the declared initial value.
class SignalHistory {
public:
    SignalHistory(std::size_t capacity, double initial_value) : buffer_(capacity, initial_value), initial_(initial_value) {
        if (capacity == 0) {
            throw ConfigError("coupling", "history", "signal history capacity must be positive");
        }
    }

    /// History sized for `delay_steps` of transport delay and `history_len` taps.
    [[nodiscard]] static SignalHistory for_delay(std::size_t delay_steps, std::size_t history_len, double initial_value) {
        if (history_len == 0) {
            throw ConfigError("coupling", "history_len", "history length must be at least 1");
        }
        return SignalHistory(delay_steps + history_len, initial_value);
    }

    [[nodiscard]] std::size_t capacity() const noexcept { return buffer_.size(); }
    [[nodiscard]] double initial_value() const noexcept { return initial_; }
    /// Index of the next sample to be written.
    [[nodiscard]] std::int64_t next_index() const noexcept { return next_; }

    void push(std::int64_t index, double value) {
        if (index != next_) {
            throw std::logic_error("SignalHistory: expected macro index " + std::to_string(next_) + ", got " +
                                   std::to_string(index));
        }
        buffer_[slot(index)] = value;
        ++next_;
    }

    /// Sample written at macro step `index`; nullopt before the start (index < 0).
    [[nodiscard]] std::optional<double> at(std::int64_t index) const {
        if (index < 0) {
            return std::nullopt;
        }
        check_readable(index);
        return buffer_[slot(index)];
    }

    /// [u(now-k), u(now-k-1), ..., u(now-k-p+1)], newest first; pre-start
    /// entries hold the initial value.
    void delayed_read(std::int64_t now, std::size_t k, std::span<double> out) const {
        if (k + out.size() > capacity()) {
            throw ConfigError("coupling", "history", "history capacity too small for delay plus window");
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            const std::int64_t idx = now - static_cast<std::int64_t>(k + i);
            out[i] = idx < 0 ? initial_ : *at(idx);
        }
    }

    [[nodiscard]] std::vector<double> delayed_read(std::int64_t now, std::size_t k, std::size_t p) const {
        std::vector<double> out(p);
        delayed_read(now, k, out);
        return out;
    }

private:
    [[nodiscard]] std::size_t slot(std::int64_t index) const noexcept {
        return static_cast<std::size_t>(index) % buffer_.size();
    }

    void check_readable(std::int64_t index) const {
        if (index >= next_) {
            throw std::out_of_range("SignalHistory: sample " + std::to_string(index) + " not yet written");
        }
        if (next_ - index > static_cast<std::int64_t>(buffer_.size())) {
            throw std::out_of_range("SignalHistory: sample " + std::to_string(index) + " already evicted");
        }
    }

    std::vector<double> buffer_;
    double initial_;
    std::int64_t next_ = 0;
};

}  // namespace cosimlab
