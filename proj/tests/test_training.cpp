#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "cosimlab/online_trainer.hpp"
#include "cosimlab/training.hpp"

using namespace cosimlab;

namespace {

std::vector<TrainingSample> ar_law_samples(std::size_t n, std::uint64_t seed) {
    const ExtrapolatorParams law{{2.4748, -0.6470, -0.1664, -0.6664}, 0.0};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<TrainingSample> out(n);
    for (auto& s : out) {
        s.x = {u(rng), u(rng), u(rng), u(rng)};
        s.y = extrapolate_ar(law, s.x);
    }
    return out;
}

}  // namespace

TEST(TrainingSet, WindowAndTargetIndices) {
    std::vector<double> s(10);
    for (int i = 0; i < 10; ++i) s[static_cast<std::size_t>(i)] = i;
    const auto set = build_training_set(s, 4, 3, 100);
    ASSERT_EQ(set.size(), 4u);
    EXPECT_EQ(set.front().x, (std::vector<double>{3, 2, 1, 0}));
    EXPECT_EQ(set.front().y, 6.0);
    EXPECT_EQ(set.back().x, (std::vector<double>{6, 5, 4, 3}));
    EXPECT_EQ(set.back().y, 9.0);
}

TEST(TrainingSet, ConstantSignal) {
    for (const auto& smp : build_training_set(std::vector<double>(50, 2.5), 4, 3, 100)) {
        EXPECT_EQ(smp.x, std::vector<double>(4, 2.5));
        EXPECT_EQ(smp.y, 2.5);
    }
}

TEST(TrainingSet, RampTargetsAreExactlyAhead) {
    const double dt = 1e-3, slope = 0.5;
    std::vector<double> s(64);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = slope * static_cast<double>(i) * dt;
    for (const auto& smp : build_training_set(s, 4, 3, 100)) {
        EXPECT_NEAR(smp.y, smp.x[0] + 3.0 * slope * dt, 1e-15);
    }
}

TEST(TrainingSet, ShortSignalGivesEmptySetAndCapKeepsNewest) {
    EXPECT_TRUE(build_training_set(std::vector<double>(7, 1.0), 4, 3, 100).empty());
    std::vector<double> s(100);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i);
    const auto set = build_training_set(s, 4, 3, 10);
    ASSERT_EQ(set.size(), 10u);
    EXPECT_EQ(set.back().y, 99.0);
    EXPECT_EQ(set.front().y, 90.0);
}

TEST(Train, RecoversLinearLawFromRandomInit) {
    const auto samples = ar_law_samples(2000, 3);
    std::mt19937_64 rng(9);
    const auto net = random_net(4, 2, rng);
    TrainerConfig cfg;
    cfg.epochs = 1500;
    cfg.adam.step = 3e-3;
    const auto r = train(net, samples, cfg);
    EXPECT_TRUE(r.accepted);
    EXPECT_LT(r.cost_after, 1e-6);
    EXPECT_DOUBLE_EQ(r.cost_after, mse(r.net, samples));
}

TEST(Train, OverfitsASingleSample) {
    const std::vector<TrainingSample> one{{{0.3, -0.2, 0.9, 0.1}, 1.7}};
    std::mt19937_64 rng(2);
    TrainerConfig cfg;
    cfg.epochs = 5000;
    const auto r = train(random_net(4, 2, rng), one, cfg);
    EXPECT_LT(std::abs(r.net.forward(one[0].x) - one[0].y), 1e-6);
}

TEST(Train, NeverReturnsAWorseNetwork) {
    std::mt19937_64 rng(4);
    for (double step : {1e-4, 1e-2, 1.0, 1e3}) {
        TrainerConfig cfg;
        cfg.adam.step = step;
        cfg.epochs = 20;
        const auto net = random_net(4, 3, rng);
        const auto samples = ar_law_samples(300, 5);
        const auto r = train(net, samples, cfg);
        EXPECT_LE(r.cost_after, r.cost_before);
        EXPECT_LE(mse(r.net, samples), mse(net, samples));
        if (!r.accepted) {
            EXPECT_EQ(r.net, net);
        }
    }
}

TEST(Train, NonFiniteLossIsDiscarded) {
    auto samples = ar_law_samples(50, 6);
    samples[10].y = std::numeric_limits<double>::quiet_NaN();
    std::mt19937_64 rng(1);
    const auto net = random_net(4, 2, rng);
    const auto r = train(net, samples, TrainerConfig{});
    EXPECT_FALSE(r.accepted);
    EXPECT_EQ(r.net, net);
    EXPECT_THROW((void)train(net, std::vector<TrainingSample>{}, TrainerConfig{}), std::invalid_argument);
}

TEST(Train, SameSeedSameWeights) {
    const auto samples = ar_law_samples(500, 8);
    std::mt19937_64 rng(1);
    const auto net = random_net(4, 2, rng);
    TrainerConfig cfg;
    cfg.epochs = 10;
    EXPECT_EQ(train(net, samples, cfg).net, train(net, samples, cfg).net);
}

TEST(TrainerConfig, Validation) {
    TrainerConfig cfg;
    EXPECT_NO_THROW(cfg.validate(4, 3));
    cfg.max_samples = 7;
    EXPECT_THROW(cfg.validate(4, 3), ConfigError);
    cfg = {};
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(4, 3), ConfigError);
    cfg = {};
    cfg.adam.beta1 = 1.0;
    EXPECT_THROW(cfg.validate(4, 3), ConfigError);
}

TEST(MessageQueue, DeliversInOrderAcrossThreads) {
    MessageQueue<int> q;
    std::jthread producer([&] {
        for (int i = 0; i < 100; ++i) q.send(i);
        q.close();
    });
    int expected = 0;
    while (auto v = q.receive()) {
        EXPECT_EQ(*v, expected++);
    }
    EXPECT_EQ(expected, 100);
    EXPECT_FALSE(q.try_receive().has_value());
}

TEST(OnlineAdapter, DeterministicScheduleAppliesAtFixedStep) {
    TrainingSchedule sched;
    sched.enabled = true;
    sched.first_trigger = 100;
    sched.interval = 0;
    sched.apply_latency = 50;
    TrainerConfig cfg;
    cfg.epochs = 5;
    cfg.max_samples = 100;
    OnlineAdapter adapter("v1", cfg, sched, 4, 3);

    std::mt19937_64 rng(3);
    CompensatorNet net = random_net(4, 2, rng);
    const CompensatorNet before = net;
    std::vector<double> received;
    std::vector<TrainingCycleLog> log;
    for (std::int64_t n = 0; n < 300; ++n) {
        received.push_back(std::sin(0.05 * static_cast<double>(n)));
        adapter.on_step_boundary(n, received, net, log);
        if (n < 150) {
            ASSERT_EQ(net, before);
        }
    }
    adapter.drain(log);
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(log[0].trigger_step, 100);
    EXPECT_EQ(log[0].applied_step, 150);
    EXPECT_EQ(log[0].sample_count, 95u);
    EXPECT_LE(log[0].cost_after, log[0].cost_before);
    EXPECT_EQ(log[0].accepted, !(net == before));
}
