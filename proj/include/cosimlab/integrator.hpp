#pragma once

#include <array>
#include <cstddef>

namespace cosimlab {

template <std::size_t N>
using StateVec = std::array<double, N>;

namespace detail {

template <std::size_t N>
[[nodiscard]] constexpr StateVec<N> axpy(const StateVec<N>& x, double s, const StateVec<N>& d) noexcept {
    StateVec<N> r{};
    for (std::size_t i = 0; i < N; ++i) {
        r[i] = x[i] + s * d[i];
    }
    return r;
}

}  // namespace detail

/// One classical fourth-order Runge-Kutta step of dx/dt = rhs(t, x).
template <std::size_t N, class Rhs>
[[nodiscard]] StateVec<N> rk4_step(Rhs&& rhs, double t, const StateVec<N>& x, double h) {
    const StateVec<N> k1 = rhs(t, x);
    const StateVec<N> k2 = rhs(t + 0.5 * h, detail::axpy(x, 0.5 * h, k1));
    const StateVec<N> k3 = rhs(t + 0.5 * h, detail::axpy(x, 0.5 * h, k2));
    const StateVec<N> k4 = rhs(t + h, detail::axpy(x, h, k3));
    StateVec<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

}  // namespace cosimlab
