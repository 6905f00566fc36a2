#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "cosimlab/transfer.hpp"

using namespace cosimlab;

namespace {

const ExtrapolatorParams kOpt{{6.5103, -1.5509, -9.9296, 5.9702}, 0.0};
constexpr double kDt = 1e-3;
constexpr double kTau = 3e-3;

// G_c from its definition, summing the held pieces in quad precision:
// sum_n a_n e^{-s n dT} (1 - e^{-s dT}) / s + b e^{-s dT} (1 - e^{-s dT}) / s.
std::complex<double> gc_quad(const ExtrapolatorParams& p, double omega, double dt) {
    using real = boost::multiprecision::cpp_bin_float_quad;
    using cq = boost::multiprecision::cpp_complex_quad;
    const cq s(real(0), real(omega));
    const real h(dt);
    const cq hold = (cq(1) - exp(-s * h)) / s;
    cq acc = cq(real(p.b)) * exp(-s * h);
    for (std::size_t n = 0; n < p.size(); ++n) {
        acc += cq(real(p.a[n])) * exp(-s * (h * static_cast<int>(n)));
    }
    const cq out = acc * hold;
    return {static_cast<double>(out.real()), static_cast<double>(out.imag())};
}

ExtrapolatorParams random_feasible(std::mt19937_64& rng, bool with_bias) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    ExtrapolatorParams p{{u(rng), u(rng), u(rng), 0.0}, with_bias ? u(rng) : 0.0};
    p.a[3] = 1.0 - p.a[0] - p.a[1] - p.a[2] - p.b;
    return p;
}

Eigen::Matrix4d state_matrix(const OscillatorParams& p) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
    A(0, 2) = 1.0;
    A(1, 3) = 1.0;
    A(2, 0) = -(p.c1 + p.cc) / p.m1;
    A(2, 1) = p.cc / p.m1;
    A(2, 2) = -(p.d1 + p.dc) / p.m1;
    A(2, 3) = p.dc / p.m1;
    A(3, 0) = p.cc / p.m2;
    A(3, 1) = -(p.c2 + p.cc) / p.m2;
    A(3, 2) = p.dc / p.m2;
    A(3, 3) = -(p.d2 + p.dc) / p.m2;
    return A;
}

}  // namespace

TEST(Gf, Examples) {
    EXPECT_DOUBLE_EQ(eval_gf(0.0, kDt, kTau).real(), 1000.0);
    EXPECT_EQ(eval_gf(0.0, kDt, kTau).imag(), 0.0);
    EXPECT_NEAR(std::arg(eval_gf(1000.0, kDt, kTau)), -3.0, 1e-12);
    EXPECT_NEAR(std::abs(eval_gf(123.0, kDt, kTau)), 1000.0, 1e-9);
    EXPECT_THROW((void)eval_gf(-1.0, kDt, kTau), std::invalid_argument);
}

TEST(Gc, SingleTapIsThePureHoldTransform) {
    for (double w : {1e-3, 0.5, 6.0, 300.0, 3000.0}) {
        const std::complex<double> s(0.0, w);
        // 1 - e^{-j theta} without cancellation
        const double th = w * kDt;
        const auto expected = std::complex<double>(2.0 * std::pow(std::sin(th / 2.0), 2), std::sin(th)) / s;
        EXPECT_LT(std::abs(eval_gc(w, ExtrapolatorParams::zoh(1), kDt) - expected), 1e-12 * std::abs(expected));
    }
}

TEST(Gc, LowFrequencyLimitIsScaledDcGain) {
    for (const auto& p : {kOpt, ExtrapolatorParams{{0.6, 0.2}, 0.2}, ExtrapolatorParams::zoh(4)}) {
        const double dc = kDt * p.dc_gain();
        EXPECT_NEAR(std::abs(eval_gc(0.0, p, kDt) - dc), 0.0, 1e-15);
        // the first-order term is omega dT^2 times a few
        EXPECT_LT(std::abs(eval_gc(1e-9, p, kDt) - dc), 1e-11 * std::abs(dc));
    }
}

TEST(Gc, MatchesQuadPrecisionOracle) {
    std::mt19937_64 rng(17);
    std::vector<ExtrapolatorParams> cases{kOpt, random_feasible(rng, true), random_feasible(rng, true)};
    for (const auto& p : cases) {
        for (double w : {6.0, 0.37, 2500.0}) {
            const auto ref = gc_quad(p, w, kDt);
            EXPECT_LT(std::abs(eval_gc(w, p, kDt) - ref) / std::abs(ref), 1e-10) << "omega " << w;
        }
    }
}

TEST(Gp, EqualsProductOfFactors) {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 20; ++i) {
        const auto p = random_feasible(rng, i % 2 == 0);
        for (double w : {1e-4, 0.8, 6.0, 777.0}) {
            const auto prod = eval_gf(w, kDt, kTau) * eval_gc(w, p, kDt);
            EXPECT_LT(std::abs(eval_gp(w, p, kDt, kTau) - prod), 1e-12 * std::max(1.0, std::abs(prod)));
        }
    }
}

TEST(Gp, UnitDcGainAtVeryLowFrequency) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const auto p = random_feasible(rng, true);
        EXPECT_LT(std::abs(eval_gp(1e-9, p, kDt, kTau) - 1.0), 1e-6);
        EXPECT_LT(std::abs(std::arg(eval_gp(1e-9, p, kDt, kTau))), 1e-6);
    }
}

TEST(Gp, ZohPhaseIsDelayPlusHalfSample) {
    for (double w = 1.0; w <= 6.0; w += 0.5) {
        const double expected = -w * (kTau + kDt / 2.0);
        EXPECT_NEAR(std::arg(eval_gp(w, ExtrapolatorParams::zoh(4), kDt, kTau)), expected, 1e-9);
    }
}

TEST(Gp, OptimalCompensationFlattensBandPhase) {
    double opt = 0.0, zoh = 0.0;
    for (double w = 1.0; w <= 6.0; w += 0.01) {
        opt = std::max(opt, std::abs(std::arg(eval_gp(w, kOpt, kDt, kTau))));
        zoh = std::max(zoh, std::abs(std::arg(eval_gp(w, ExtrapolatorParams::zoh(4), kDt, kTau))));
    }
    EXPECT_LT(opt, zoh);
}

TEST(PlantTf, ClosedLoopPolesMatchMonolithicEigenvalues) {
    for (const auto& p : {OscillatorParams{}, OscillatorParams{2.0, 3.0, 5.0, 7.0, 11.0, 0.3, 0.2, 0.1}}) {
        const auto roots = closed_loop_characteristic(derive_plant_tf(p)).roots();
        const Eigen::EigenSolver<Eigen::Matrix4d> es(state_matrix(p), false);
        ASSERT_EQ(roots.size(), 4u);
        for (int i = 0; i < 4; ++i) {
            const std::complex<double> ev = es.eigenvalues()(i);
            double best = INFINITY;
            for (const auto& r : roots) best = std::min(best, std::abs(r - ev));
            EXPECT_LT(best, 1e-8);
        }
    }
}

TEST(PlantTf, NoCouplingPathWithoutCouplingElements) {
    OscillatorParams p;
    p.cc = 0.0;
    p.dc = 0.0;
    const auto tf = derive_plant_tf(p);
    EXPECT_TRUE(tf.mass2.num.is_zero());
    EXPECT_EQ(tf.mass2.at(3.0), std::complex<double>(0.0, 0.0));
}

TEST(PlantTf, MassTwoPathIsImproper) {
    const auto tf = derive_plant_tf(OscillatorParams{});
    EXPECT_TRUE(tf.mass1.proper());
    EXPECT_FALSE(tf.mass2.proper());
    EXPECT_EQ(tf.mass1.den.degree() + tf.mass2.den.degree() - tf.mass1.num.degree() - tf.mass2.num.degree(), 1);
}

TEST(OpenLoop, ReferenceHasTwoResonancePeaksAtModalFrequencies) {
    const OscillatorParams p;
    const auto tf = derive_plant_tf(p);
    const Eigen::EigenSolver<Eigen::Matrix4d> es(state_matrix(p), false);
    std::vector<double> modal;
    for (int i = 0; i < 4; ++i) {
        if (es.eigenvalues()(i).imag() > 0.0) modal.push_back(es.eigenvalues()(i).imag());
    }
    std::sort(modal.begin(), modal.end());
    ASSERT_EQ(modal.size(), 2u);

    // Closed-loop resonances are the local maxima of |L / (1 + L)|. The upper
    // mode moves mostly mass 2 and gives a weak peak.
    std::vector<double> w, mag;
    for (double x = -1.0; x <= 1.5; x += 1e-5) {
        w.push_back(std::pow(10.0, x));
        const auto L = eval_open_loop(w.back(), tf, CouplingProcess::ideal());
        mag.push_back(std::abs(L / (1.0 + L)));
    }
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
        if (mag[i] > mag[i - 1] && mag[i] > mag[i + 1]) peaks.push_back(w[i]);
    }
    ASSERT_EQ(peaks.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(peaks[i], modal[i], 1e-3 * modal[i]);
    }
}

TEST(OpenLoop, EqualsProductOfEvaluatedFactors) {
    const auto tf = derive_plant_tf(OscillatorParams{});
    const CouplingProcess proc{kOpt, kDt, kTau};
    for (double w : {0.01, 0.3, 3.16, 4.5, 100.0, 5000.0}) {
        const auto gp = eval_gp(w, kOpt, kDt, kTau);
        const auto expected = tf.mass2.at(w) * gp * tf.mass1.at(w) * gp;
        EXPECT_LT(std::abs(eval_open_loop(w, tf, proc) - expected), 1e-12 * std::abs(expected));
    }
    EXPECT_EQ(eval_open_loop(2.0, tf, CouplingProcess::ideal()), tf.mass2.at(2.0) * tf.mass1.at(2.0));
}

TEST(OpenLoop, CompensationRaisesHighFrequencyMagnitude) {
    const auto tf = derive_plant_tf(OscillatorParams{});
    const CouplingProcess proc{kOpt, kDt, kTau};
    for (double w = 100.0; w < 2000.0; w *= 1.3) {
        EXPECT_GE(std::abs(eval_open_loop(w, tf, proc)), std::abs(eval_open_loop(w, tf, CouplingProcess::ideal())));
    }
}

TEST(Transfer, ConjugateSymmetry) {
    // Negative frequencies are evaluated through the same closed forms at s = -j omega.
    const auto tf = derive_plant_tf(OscillatorParams{});
    std::mt19937_64 rng(29);
    const auto p = random_feasible(rng, true);
    for (double w : {0.2, 3.0, 41.0, 2000.0}) {
        const std::complex<double> s(0.0, w);
        auto gp_at = [&](std::complex<double> z) {
            std::complex<double> acc = p.b * std::exp(-z * (kTau + kDt));
            for (std::size_t n = 0; n < p.size(); ++n) {
                acc += p.a[n] * std::exp(-z * (kTau + static_cast<double>(n) * kDt));
            }
            return acc * detail::phi(z * kDt);
        };
        EXPECT_LT(std::abs(gp_at(std::conj(s)) - std::conj(eval_gp(w, p, kDt, kTau))), 1e-12 * std::abs(gp_at(s)));
        EXPECT_LT(std::abs(tf.mass1(std::conj(s)) - std::conj(tf.mass1.at(w))), 1e-15);
        EXPECT_LT(std::abs(tf.mass2(std::conj(s)) - std::conj(tf.mass2.at(w))), 1e-12 * std::abs(tf.mass2.at(w)));
        EXPECT_LT(std::abs(detail::phi(std::conj(s) * kDt) - std::conj(detail::phi(s * kDt))), 1e-15);
    }
}

TEST(Transfer, PhiSeriesJoinsClosedForm) {
    for (double x : {9.99e-4, 1.001e-3}) {
        const std::complex<double> z(0.0, x);
        const auto closed = (1.0 - std::exp(-z)) / z;
        EXPECT_LT(std::abs(detail::phi(z) - closed), 1e-12);
    }
    EXPECT_EQ(detail::phi(0.0), std::complex<double>(1.0, 0.0));
}

TEST(Aliasing, Examples) {
    const auto ok = aliasing_check(6.0, kDt);
    EXPECT_NEAR(ok.ratio, 0.006, 1e-15);
    EXPECT_TRUE(ok.pass);
    EXPECT_FALSE(aliasing_check(std::numbers::pi / kDt, kDt).pass);
    EXPECT_FALSE(aliasing_check(kDefaultAliasingMargin, 1.0).pass);
    EXPECT_THROW((void)aliasing_check(0.0, kDt), std::invalid_argument);
}
