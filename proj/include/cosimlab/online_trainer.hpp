#pragma once

// Online adaptation of a network compensator. Training runs on a worker
// thread; the simulation only exchanges immutable messages with it (signal
// snapshot and weights out, trained weights back) and swaps weights at
// macro-step boundaries.

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cosimlab/network.hpp"
#include "cosimlab/scenario.hpp"
#include "cosimlab/training.hpp"

namespace cosimlab {

/// Unbounded multi-producer queue; receive() blocks until a value arrives or
/// the queue is closed and drained.
template <class T>
class MessageQueue {
public:
    void send(T value) {
        {
            std::lock_guard lock(mutex_);
            items_.push_back(std::move(value));
        }
        cv_.notify_one();
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    [[nodiscard]] std::optional<T> receive() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
        return pop_locked();
    }

    [[nodiscard]] std::optional<T> try_receive() {
        std::lock_guard lock(mutex_);
        return pop_locked();
    }

private:
    std::optional<T> pop_locked() {
        if (items_.empty()) {
            return std::nullopt;
        }
        T out = std::move(items_.front());
        items_.pop_front();
        return out;
    }

    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> items_;
    bool closed_ = false;
};

struct TrainingJob {
    std::int64_t trigger_step = 0;
    CompensatorNet net;
    std::vector<double> signal;
};

struct TrainingOutcome {
    std::int64_t trigger_step = 0;
    TrainResult result;
    std::size_t sample_count = 0;
};

/// Worker thread: duplicates the received network, trains it on samples built
/// from the received signal and sends the result back.
class TrainerWorker {
public:
    TrainerWorker(TrainerConfig cfg, std::size_t p, std::size_t k)
        : cfg_(cfg), p_(p), k_(k), thread_([this](std::stop_token) { run(); }) {}

    TrainerWorker(const TrainerWorker&) = delete;
    TrainerWorker& operator=(const TrainerWorker&) = delete;

    ~TrainerWorker() {
        jobs_.close();
        // jthread joins on destruction
    }

    void submit(TrainingJob job) { jobs_.send(std::move(job)); }
    [[nodiscard]] std::optional<TrainingOutcome> try_receive() { return results_.try_receive(); }
    [[nodiscard]] std::optional<TrainingOutcome> receive() { return results_.receive(); }

private:
    void run() {
        while (auto job = jobs_.receive()) {
            const auto samples = build_training_set(job->signal, p_, k_, cfg_.max_samples);
            TrainingOutcome out{job->trigger_step, TrainResult{job->net, 0.0, 0.0, false}, samples.size()};
            if (!samples.empty()) {
                out.result = train(job->net, samples, cfg_);
            }
            results_.send(std::move(out));
        }
        results_.close();
    }

    TrainerConfig cfg_;
    std::size_t p_;
    std::size_t k_;
    MessageQueue<TrainingJob> jobs_;
    MessageQueue<TrainingOutcome> results_;
    std::jthread thread_;
};

struct TrainingCycleLog {
    std::string channel;
    std::int64_t trigger_step = 0;
    std::int64_t applied_step = -1;  ///< -1 if the weights were never applied
    std::size_t sample_count = 0;
    double cost_before = 0.0;
    double cost_after = 0.0;
    bool accepted = false;

    friend bool operator==(const TrainingCycleLog&, const TrainingCycleLog&) = default;
};

/// Drives one network compensator's training cycles from the simulation loop.
class OnlineAdapter {
public:
    OnlineAdapter(std::string channel, TrainerConfig cfg, TrainingSchedule schedule, std::size_t p, std::size_t k)
        : channel_(std::move(channel)), schedule_(schedule), worker_(cfg, p, k) {}

    /// Called at each macro-step boundary before the compensator is evaluated.
    /// `received` is the delayed signal seen so far by this input.
    void on_step_boundary(std::int64_t step, std::span<const double> received, CompensatorNet& net,
                          std::vector<TrainingCycleLog>& log) {
        if (is_trigger(step)) {
            worker_.submit({step, net, std::vector<double>(received.begin(), received.end())});
            pending_.push_back(step);
        }
        if (pending_.empty()) {
            return;
        }
        std::optional<TrainingOutcome> outcome;
        if (schedule_.deterministic) {
            if (step == pending_.front() + static_cast<std::int64_t>(schedule_.apply_latency)) {
                outcome = worker_.receive();
            }
        } else {
            outcome = worker_.try_receive();
        }
        if (outcome) {
            pending_.pop_front();
            apply(step, std::move(*outcome), net, log);
        }
    }

    /// Waits for cycles still in flight and records them as not applied.
    void drain(std::vector<TrainingCycleLog>& log) {
        while (!pending_.empty()) {
            pending_.pop_front();
            if (auto outcome = worker_.receive()) {
                log.push_back({channel_, outcome->trigger_step, -1, outcome->sample_count, outcome->result.cost_before,
                               outcome->result.cost_after, outcome->result.accepted});
            }
        }
    }

private:
    [[nodiscard]] bool is_trigger(std::int64_t step) const {
        const auto first = static_cast<std::int64_t>(schedule_.first_trigger);
        if (step < first) {
            return false;
        }
        if (step == first) {
            return true;
        }
        return schedule_.interval > 0 && (step - first) % static_cast<std::int64_t>(schedule_.interval) == 0;
    }

    void apply(std::int64_t step, TrainingOutcome outcome, CompensatorNet& net, std::vector<TrainingCycleLog>& log) {
        TrainingCycleLog entry{channel_,
                               outcome.trigger_step,
                               step,
                               outcome.sample_count,
                               outcome.result.cost_before,
                               outcome.result.cost_after,
                               outcome.result.accepted};
        if (outcome.result.accepted) {
            net = std::move(outcome.result.net);
        }
        log.push_back(std::move(entry));
    }

    std::string channel_;
    TrainingSchedule schedule_;
    TrainerWorker worker_;
    std::deque<std::int64_t> pending_;
};

}  // namespace cosimlab
