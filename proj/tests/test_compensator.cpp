#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "cosimlab/compensator.hpp"
#include "cosimlab/extrapolator.hpp"
#include "cosimlab/network.hpp"

using namespace cosimlab;

namespace {

const ExtrapolatorParams kOpt{{6.5103, -1.5509, -9.9296, 5.9702}, 0.0};

std::vector<double> random_window(std::mt19937_64& rng, std::size_t p, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    std::vector<double> w(p);
    for (auto& v : w) v = n(rng);
    return w;
}

}  // namespace

TEST(Extrapolator, ZohReturnsNewestSample) {
    const std::vector<double> w{0.3, -1.0, 2.0, 5.0};
    EXPECT_EQ(extrapolate_ar(ExtrapolatorParams::zoh(4), w), 0.3);
}

TEST(Extrapolator, FohIsExactOnRamps) {
    const double dt = 1e-3;
    for (std::size_t k : {0u, 1u, 3u, 7u}) {
        const auto foh = ExtrapolatorParams::foh_for_delay(4, k);
        for (int now = 10; now < 200; now += 17) {
            // Ramp u(t) = t; the newest received sample is u((now - k) dT).
            std::vector<double> w(4);
            for (std::size_t i = 0; i < 4; ++i) {
                w[i] = static_cast<double>(now - static_cast<int>(k + i)) * dt;
            }
            EXPECT_NEAR(extrapolate_ar(foh, w), now * dt, 1e-15);
        }
    }
}

TEST(Extrapolator, OptimalCoefficientsAreAnInnerProduct) {
    const std::vector<double> w{0.5, 0.4, 0.2, -0.1};
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) expected += kOpt.a[i] * w[i];
    EXPECT_DOUBLE_EQ(extrapolate_ar(kOpt, w), expected);
}

TEST(Extrapolator, BiasOnlyGivesConstant) {
    const ExtrapolatorParams bias{{0.0, 0.0, 0.0, 0.0}, 1.0};
    EXPECT_EQ(extrapolate_ar(bias, std::vector<double>{3, 4, 5, 6}), 1.0);
}

TEST(Extrapolator, ZeroBiasUnitGainIsExactOnConstants) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        ExtrapolatorParams prm{{u(rng), u(rng), u(rng), 0.0}, 0.0};
        prm.a[3] = 1.0 - prm.a[0] - prm.a[1] - prm.a[2];
        for (double c : {-2.0, 0.0, 1.0, 37.5}) {
            EXPECT_NEAR(extrapolate_ar(prm, std::vector<double>(4, c)), c, 1e-12 * (1.0 + std::abs(c)) * 40.0);
        }
    }
}

TEST(Extrapolator, WindowLengthMismatchThrows) {
    EXPECT_THROW((void)extrapolate_ar(kOpt, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW((void)ExtrapolatorParams::foh_for_delay(1, 3), ConfigError);
    EXPECT_THROW((ExtrapolatorParams{{NAN}, 0.0}).validate(), ConfigError);
}

TEST(Network, LeakyReluDefinition) {
    EXPECT_DOUBLE_EQ(leaky_relu(-1.0, 0.01), -0.01);
    EXPECT_EQ(leaky_relu(2.0, 0.01), 2.0);
}

TEST(Network, ZeroWeightsGiveOutputBias) {
    CompensatorNet net(4, 3);
    net.b2() = 0.75;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(mlp_forward(net, random_window(rng, 4, 5.0)), 0.75);
    }
}

TEST(Network, LinearInitReproducesAutoregression) {
    std::mt19937_64 rng(11);
    for (auto act : {Activation::LeakyReLU, Activation::Linear}) {
        const auto net = init_from_linear(kOpt, kDefaultLeakySlope, act);
        for (int i = 0; i < 1000; ++i) {
            const auto w = random_window(rng, 4, 3.0);
            ASSERT_NEAR(net.forward(w), extrapolate_ar(kOpt, w), 1e-12);
        }
    }
    const auto bias = init_from_linear({{0.0, 0.0, 0.0, 0.0}, 1.0});
    EXPECT_EQ(bias.forward(std::vector<double>{1, 2, 3, 4}), 1.0);
}

TEST(Network, BothHiddenUnitsCarrySignalAtInit) {
    const auto net = init_from_linear(kOpt);
    std::mt19937_64 rng(5);
    std::map<std::uint32_t, int> seen;
    for (int i = 0; i < 200; ++i) {
        ++seen[net.activation_pattern(random_window(rng, 4))];
    }
    EXPECT_GT(seen[1u], 0);
    EXPECT_GT(seen[2u], 0);
}

TEST(Network, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(21);
    for (auto act : {Activation::LeakyReLU, Activation::Linear}) {
        auto net = random_net(4, 5, rng, act);
        for (auto& b : net.parameters()) b += 0.1;
        for (int trial = 0; trial < 20; ++trial) {
            const auto w = random_window(rng, 4);
            std::vector<double> grad(net.parameter_count());
            (void)net.forward_with_gradient(w, grad);
            for (std::size_t q = 0; q < net.parameter_count(); ++q) {
                // Central differences are exact for piecewise-linear maps
                // unless the step crosses a kink.
                const double h = 1e-6;
                auto plus = net, minus = net;
                plus.parameters()[q] += h;
                minus.parameters()[q] -= h;
                if (act == Activation::LeakyReLU &&
                    (plus.activation_pattern(w) != net.activation_pattern(w) ||
                     minus.activation_pattern(w) != net.activation_pattern(w))) {
                    continue;
                }
                const double fd = (plus.forward(w) - minus.forward(w)) / (2.0 * h);
                ASSERT_NEAR(fd, grad[q], 1e-6 * std::max(1.0, std::abs(grad[q])));
            }
        }
    }
}

TEST(Network, EachActivationRegionIsAffine) {
    std::mt19937_64 rng(31);
    const auto net = random_net(4, 3, rng);
    EXPECT_EQ(net.region_count(), 8u);
    std::map<std::uint32_t, int> hits;
    for (int i = 0; i < 4000; ++i) {
        const auto w = random_window(rng, 4, 3.0);
        const auto mask = net.activation_pattern(w);
        ++hits[mask];
        ASSERT_NEAR(net.forward(w), extrapolate_ar(net.region_params(mask), w), 1e-12);
    }
    EXPECT_LE(hits.size(), net.region_count());
    // With zero first-layer biases every region is a cone through the origin;
    // three generic hyperplanes in R^4 produce all 2^3 sign patterns.
    EXPECT_EQ(hits.size(), 8u);
}

TEST(Network, LinearActivationIsOneAutoregression) {
    std::mt19937_64 rng(41);
    auto net = random_net(4, 6, rng, Activation::Linear);
    for (auto& b : net.parameters()) b += 0.05;
    EXPECT_EQ(net.region_count(), 1u);
    const auto eq = net.linear_equivalent();
    for (int i = 0; i < 500; ++i) {
        const auto w = random_window(rng, 4, 2.0);
        ASSERT_NEAR(net.forward(w), extrapolate_ar(eq, w), 1e-12);
    }
    EXPECT_THROW((void)random_net(4, 2, rng).linear_equivalent(), std::logic_error);
}

TEST(Network, WeightsTextRoundTrip) {
    std::mt19937_64 rng(51);
    auto net = random_net(4, 3, rng);
    for (auto& b : net.parameters()) b += 1.0 / 3.0;
    std::stringstream ss;
    write_weights(ss, net);
    EXPECT_EQ(read_weights(ss), net);

    std::stringstream broken("inputs 4\nhidden 2\nW1 1 2 3 4\nb1 0 0\nw2 1 1\nb2 0\n");
    EXPECT_THROW((void)read_weights(broken), ConfigError);
    std::stringstream unknown("inputs 1\nhidden 1\nW9 1\n");
    EXPECT_THROW((void)read_weights(unknown), ConfigError);
}

TEST(Network, InvalidShapesAreRejected) {
    EXPECT_THROW(CompensatorNet(0, 2), ConfigError);
    EXPECT_THROW(CompensatorNet(4, 0), ConfigError);
    EXPECT_THROW(CompensatorNet(4, 2, Activation::LeakyReLU, 1.5), ConfigError);
    EXPECT_THROW((void)CompensatorNet(4, 2).forward(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Compensator, KindsDispatch) {
    const std::vector<double> w{1.0, 0.5, 0.0, -0.5};
    EXPECT_EQ(Compensator::of_kind(CompensatorKind::None, 4, 3).predict(w), 1.0);
    EXPECT_EQ(Compensator::of_kind(CompensatorKind::FOH, 4, 3).predict(w), 4.0 * 1.0 - 3.0 * 0.5);
    EXPECT_EQ(Compensator::of_kind(CompensatorKind::LinearAR, 4, 3, kOpt).predict(w), extrapolate_ar(kOpt, w));
    EXPECT_THROW((void)Compensator::of_kind(CompensatorKind::LinearAR, 3, 3, kOpt), ConfigError);
    EXPECT_THROW((void)Compensator::of_kind(CompensatorKind::Network, 4, 3), std::invalid_argument);
    const Compensator net(init_from_linear(kOpt));
    EXPECT_TRUE(net.is_network());
    EXPECT_NEAR(net.predict(w), extrapolate_ar(kOpt, w), 1e-12);
}
