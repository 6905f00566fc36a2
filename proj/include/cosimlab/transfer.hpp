#pragma once

// Frequency-domain model of the coupling process and of the split two-mass
// oscillator.
//
// The coupling process from a sender output to the applied receiver input is
// impulse sampling (1/dT), transport delay e^{-s tau}, the AR extrapolator and
// zero-order hold reconstruction:
//
//   G_p(s) = [sum_n a_{n+1} e^{-(tau + n dT) s} + b e^{-(tau + dT) s}] phi(s dT)
//   phi(x) = (1 - e^{-x}) / x
//
// The bias is carried like a held unit input one step behind the newest
// sample, so G_p(0) = sum(a) + b.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cosimlab/extrapolator.hpp"
#include "cosimlab/plants.hpp"

namespace cosimlab {

using cplx = std::complex<double>;

namespace detail {

/// (1 - e^{-x}) / x, with a series near zero to avoid cancellation.
[[nodiscard]] inline cplx phi(cplx x) {
    if (std::abs(x) < 1e-3) {
        // 1 - x/2 + x^2/6 - x^3/24 + x^4/120
        return 1.0 + x * (-1.0 / 2.0 + x * (1.0 / 6.0 + x * (-1.0 / 24.0 + x * (1.0 / 120.0))));
    }
    return (1.0 - std::exp(-x)) / x;
}

inline void require_nonnegative(double omega) {
    if (!(omega >= 0.0)) {
        throw std::invalid_argument("frequency must be nonnegative");
    }
}

}  // namespace detail

/// Sampling plus transport delay: e^{-j omega tau} / dT.
[[nodiscard]] inline cplx eval_gf(double omega, double dt, double tau) {
    detail::require_nonnegative(omega);
    return std::exp(cplx(0.0, -omega * tau)) / dt;
}

/// Extrapolation plus zero-order hold; G_c(0) = dT (sum(a) + b).
[[nodiscard]] inline cplx eval_gc(double omega, const ExtrapolatorParams& params, double dt) {
    detail::require_nonnegative(omega);
    const cplx s(0.0, omega);
    cplx acc = params.b * std::exp(-s * dt);
    for (std::size_t n = 0; n < params.a.size(); ++n) {
        acc += params.a[n] * std::exp(-s * (static_cast<double>(n) * dt));
    }
    return acc * dt * detail::phi(s * dt);
}

/// Whole coupling process G_f * G_c, evaluated in closed form.
[[nodiscard]] inline cplx eval_gp(double omega, const ExtrapolatorParams& params, double dt, double tau) {
    detail::require_nonnegative(omega);
    const cplx s(0.0, omega);
    cplx acc = params.b * std::exp(-s * (tau + dt));
    for (std::size_t n = 0; n < params.a.size(); ++n) {
        acc += params.a[n] * std::exp(-s * (tau + static_cast<double>(n) * dt));
    }
    return acc * detail::phi(s * dt);
}

/// Real polynomial with ascending coefficients c[0] + c[1] s + ...
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return c_; }
    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
    /// Degree; -1 for the zero polynomial.
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }

    [[nodiscard]] cplx operator()(cplx s) const {
        cplx acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            acc = acc * s + *it;
        }
        return acc;
    }

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q) {
        if (p.is_zero() || q.is_zero()) {
            return {};
        }
        std::vector<double> out(p.c_.size() + q.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.c_.size(); ++i) {
            for (std::size_t j = 0; j < q.c_.size(); ++j) {
                out[i + j] += p.c_[i] * q.c_[j];
            }
        }
        return Polynomial(std::move(out));
    }

    friend Polynomial operator+(const Polynomial& p, const Polynomial& q) {
        std::vector<double> out(std::max(p.c_.size(), q.c_.size()), 0.0);
        for (std::size_t i = 0; i < p.c_.size(); ++i) out[i] += p.c_[i];
        for (std::size_t i = 0; i < q.c_.size(); ++i) out[i] += q.c_[i];
        return Polynomial(std::move(out));
    }

    /// Roots from the eigenvalues of the companion matrix.
    [[nodiscard]] std::vector<cplx> roots() const {
        const int n = degree();
        if (n < 1) {
            return {};
        }
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
        const double lead = c_.back();
        for (int i = 0; i < n; ++i) {
            companion(0, i) = -c_[static_cast<std::size_t>(n - 1 - i)] / lead;
        }
        for (int i = 1; i < n; ++i) {
            companion(i, i - 1) = 1.0;
        }
        const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
        const auto& ev = solver.eigenvalues();
        std::vector<cplx> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            out[static_cast<std::size_t>(i)] = ev(i);
        }
        return out;
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) {
            c_.pop_back();
        }
    }

    std::vector<double> c_;
};

struct RationalTransfer {
    Polynomial num;
    Polynomial den;

    [[nodiscard]] cplx operator()(cplx s) const { return num(s) / den(s); }
    [[nodiscard]] cplx at(double omega) const { return (*this)(cplx(0.0, omega)); }
    [[nodiscard]] bool proper() const noexcept { return num.degree() <= den.degree(); }
};

/// G_mass1 maps the coupling force to x1, G_mass2 maps x1 to the coupling
/// force. Mass 1 receives the force with negative sign, so the physical loop
/// is x1 = -G_mass1 G_mass2 x1 and the open loop is their product.
struct PlantTransfer {
    RationalTransfer mass1;
    RationalTransfer mass2;
};

[[nodiscard]] inline PlantTransfer derive_plant_tf(const OscillatorParams& p) {
    p.validate();
    PlantTransfer out;
    out.mass1 = {Polynomial({1.0}), Polynomial({p.c1, p.d1, p.m1})};
    // F = (cc + dc s)(x1 - x2), x2 = (cc + dc s) x1 / (m2 s^2 + (d2 + dc) s + c2 + cc)
    const Polynomial coupling({p.cc, p.dc});
    out.mass2 = {coupling * Polynomial({p.c2, p.d2, p.m2}), Polynomial({p.c2 + p.cc, p.d2 + p.dc, p.m2})};
    return out;
}

/// Characteristic polynomial of the undelayed loop, den1 den2 + num1 num2.
[[nodiscard]] inline Polynomial closed_loop_characteristic(const PlantTransfer& tf) {
    return tf.mass1.den * tf.mass2.den + tf.mass1.num * tf.mass2.num;
}

/// One coupling direction. Without a compensator the process is ideal (G_p = 1).
struct CouplingProcess {
    std::optional<ExtrapolatorParams> compensator;
    double macro_step = 1e-3;
    double delay = 3e-3;

    [[nodiscard]] static CouplingProcess ideal() { return {std::nullopt, 1e-3, 0.0}; }

    [[nodiscard]] cplx eval(double omega) const {
        if (!compensator) {
            return 1.0;
        }
        return eval_gp(omega, *compensator, macro_step, delay);
    }
};

/// G_sys = G_mass2 G_p G_mass1 G_p.
[[nodiscard]] inline cplx eval_open_loop(double omega, const PlantTransfer& plant, const CouplingProcess& process) {
    detail::require_nonnegative(omega);
    const cplx gp = process.eval(omega);
    return plant.mass2.at(omega) * gp * plant.mass1.at(omega) * gp;
}

struct AliasingCheck {
    double ratio = 0.0;  ///< omega_bar * dT
    double margin = 0.0;
    bool pass = false;
};

inline constexpr double kDefaultAliasingMargin = 3.14159265358979323846 / 100.0;

[[nodiscard]] inline AliasingCheck aliasing_check(double omega_band_max, double dt,
                                                  double margin = kDefaultAliasingMargin) {
    if (!(omega_band_max > 0.0)) {
        throw std::invalid_argument("aliasing_check: band limit must be positive");
    }
    if (!(dt > 0.0)) {
        throw std::invalid_argument("aliasing_check: macro step must be positive");
    }
    const double ratio = omega_band_max * dt;
    return {ratio, margin, ratio < margin};
}

}  // namespace cosimlab
