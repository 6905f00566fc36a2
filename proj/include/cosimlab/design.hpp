#pragma once

// Frequency-domain design of the AR extrapolator. The objective weighs the
// in-band magnitude error J_a, the in-band phase error J_p and the out-of-band
// gain excess J_r:
//
//   J_a = mean over band of | 1 - |G_p| |
//   J_p = mean over band of | arg G_p |, in degrees
//   J_r = int_0^{w_min} max(|G_p| - 1, 0) + int_{w_max}^{2 pi/dT} max(|G_p| - (w/w_max)^v, 0)
//
// The constraint sum(a) + b = 1 is eliminated by construction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "cosimlab/error.hpp"
#include "cosimlab/extrapolator.hpp"
#include "cosimlab/frequency_response.hpp"
#include "cosimlab/transfer.hpp"

namespace cosimlab {

struct DesignSpec {
    double band_min = 1.0;
    double band_max = 6.0;
    int relative_degree = 2;
    double alpha = 100.0;
    double beta = 1.0;
    double gamma = 1e4;
    std::size_t p = 4;
    double macro_step = 1e-3;
    double delay = 3e-3;

    std::size_t below_points = 200;
    std::size_t band_points = 400;
    std::size_t above_points = 2000;
    double below_start = 1e-6;

    [[nodiscard]] double exponent() const noexcept { return 1.0 / (2.0 * relative_degree); }
    [[nodiscard]] double sampling_frequency() const noexcept { return 2.0 * std::numbers::pi / macro_step; }

    void validate() const {
        if (!(macro_step > 0.0)) {
            throw ConfigError("design", "macro_step", "macro step must be positive");
        }
        if (!(delay >= 0.0)) {
            throw ConfigError("design", "delay", "delay must be non-negative");
        }
        if (!(band_min > 0.0 && band_min < band_max && band_max < sampling_frequency())) {
            throw ConfigError("design", "band", "need 0 < band_min < band_max < 2 pi / macro_step");
        }
        if (relative_degree < 1) {
            throw ConfigError("design", "relative_degree", "relative degree must be positive");
        }
        if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) {
            throw ConfigError("design", "weights", "objective weights must be non-negative");
        }
        if (p < 1) {
            throw ConfigError("design", "p", "at least one coefficient is required");
        }
        if (!(below_start > 0.0 && below_start < band_min) || below_points < 2 || band_points < 2 ||
            above_points < 2) {
            throw ConfigError("design", "quadrature", "quadrature grids need at least two nodes each");
        }
    }
};

struct ObjectiveBreakdown {
    double ja = 0.0;
    double jp = 0.0;
    double jr = 0.0;
    double total = 0.0;
};

/// Objective evaluator with the coupling-process basis cached on the
/// quadrature grids: G_p(w) = sum_n a_n B_n(w) + b B_b(w).
class DesignObjective {
public:
    explicit DesignObjective(DesignSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        below_ = build(FrequencyGrid::log_spaced(spec_.below_start, spec_.band_min, spec_.below_points).omega);
        band_ = build(FrequencyGrid::linear(spec_.band_min, spec_.band_max, spec_.band_points).omega);
        above_ = build(FrequencyGrid::log_spaced(spec_.band_max, spec_.sampling_frequency(), spec_.above_points).omega);
        above_bound_.reserve(above_.omega.size());
        for (double w : above_.omega) {
            above_bound_.push_back(std::pow(w / spec_.band_max, spec_.exponent()));
        }
    }

    [[nodiscard]] const DesignSpec& spec() const noexcept { return spec_; }

    [[nodiscard]] ObjectiveBreakdown operator()(const ExtrapolatorParams& params) const {
        if (params.size() != spec_.p) {
            throw std::invalid_argument("DesignObjective: coefficient count does not match p");
        }
        return evaluate([&](const Segment& seg, std::size_t i) {
            const auto& row = seg.basis[i];
            cplx g = params.b * row[spec_.p];
            for (std::size_t n = 0; n < spec_.p; ++n) {
                g += params.a[n] * row[n];
            }
            return g;
        });
    }

    /// Same objective for an arbitrary coupling-process response.
    [[nodiscard]] ObjectiveBreakdown evaluate_response(const std::function<cplx(double)>& gp) const {
        return evaluate([&](const Segment& seg, std::size_t i) { return gp(seg.omega[i]); });
    }

private:
    struct Segment {
        std::vector<double> omega;
        std::vector<std::vector<cplx>> basis;  ///< basis[i][n], n = p is the bias column
    };

    [[nodiscard]] Segment build(std::vector<double> omega) const {
        Segment seg{std::move(omega), {}};
        seg.basis.reserve(seg.omega.size());
        for (double w : seg.omega) {
            std::vector<cplx> row(spec_.p + 1);
            for (std::size_t n = 0; n < spec_.p; ++n) {
                ExtrapolatorParams unit{std::vector<double>(spec_.p, 0.0), 0.0};
                unit.a[n] = 1.0;
                row[n] = eval_gp(w, unit, spec_.macro_step, spec_.delay);
            }
            row[spec_.p] = eval_gp(w, ExtrapolatorParams{std::vector<double>(spec_.p, 0.0), 1.0}, spec_.macro_step,
                                   spec_.delay);
            seg.basis.push_back(std::move(row));
        }
        return seg;
    }

    template <class G>
    [[nodiscard]] ObjectiveBreakdown evaluate(G&& g_at) const {
        ObjectiveBreakdown out;
        const double width = spec_.band_max - spec_.band_min;
        out.ja = integrate(band_, g_at, [](cplx g, std::size_t) { return std::abs(1.0 - std::abs(g)); }) / width;
        out.jp = integrate(band_, g_at, [](cplx g, std::size_t) {
                     return std::abs(std::arg(g)) * 180.0 / std::numbers::pi;
                 }) / width;
        out.jr = integrate(below_, g_at, [](cplx g, std::size_t) { return std::max(std::abs(g) - 1.0, 0.0); }) +
                 integrate(above_, g_at, [this](cplx g, std::size_t i) {
                     return std::max(std::abs(g) - above_bound_[i], 0.0);
                 });
        out.total = spec_.alpha * out.ja + spec_.beta * out.jp + spec_.gamma * out.jr;
        return out;
    }

    template <class G, class F>
    [[nodiscard]] static double integrate(const Segment& seg, G& g_at, F&& integrand) {
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t i = 0; i < seg.omega.size(); ++i) {
            const double f = integrand(g_at(seg, i), i);
            if (i > 0) {
                acc += 0.5 * (f + prev) * (seg.omega[i] - seg.omega[i - 1]);
            }
            prev = f;
        }
        return acc;
    }

    DesignSpec spec_;
    Segment below_;
    Segment band_;
    Segment above_;
    std::vector<double> above_bound_;
};

[[nodiscard]] inline ObjectiveBreakdown objective(const ExtrapolatorParams& params, const DesignSpec& spec) {
    return DesignObjective(spec)(params);
}

struct OptimizerConfig {
    std::size_t starts = 20;
    std::uint64_t seed = 1;
    std::size_t max_iterations = 20000;
    double size_tolerance = 1e-12;
    double random_range = 10.0;  ///< random starts draw a_i from [-range, range]
    bool parallel = true;
};

struct DesignResult {
    ExtrapolatorParams params;
    ObjectiveBreakdown breakdown;
    ObjectiveBreakdown initial;
    bool improved = false;
};

namespace detail {

// Internal coordinates x = (a_1, ..., a_{p-1}) with a_p = 1 - sum and b = 0.
// The bias basis equals the basis of a_2, so G_p only sees a_2 + b and the
// search stays on the b = 0 plane without losing any attainable objective.
[[nodiscard]] inline ExtrapolatorParams from_coordinates(const gsl_vector* x, std::size_t p) {
    ExtrapolatorParams out{std::vector<double>(p, 0.0), 0.0};
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < p; ++i) {
        out.a[i] = gsl_vector_get(x, i);
        partial += out.a[i];
    }
    out.a[p - 1] = 1.0 - partial;
    return out;
}

inline void to_coordinates(const ExtrapolatorParams& params, gsl_vector* x) {
    for (std::size_t i = 0; i + 1 < params.size(); ++i) {
        gsl_vector_set(x, i, params.a[i]);
    }
}

/// Moves the bias onto a_2, which leaves G_p unchanged.
[[nodiscard]] inline ExtrapolatorParams fold_bias(ExtrapolatorParams params) {
    if (params.size() >= 2) {
        params.a[1] += params.b;
        params.b = 0.0;
    }
    return params;
}

struct SimplexRun {
    ExtrapolatorParams params;
    double value = std::numeric_limits<double>::infinity();
};

[[nodiscard]] inline SimplexRun run_simplex(const DesignObjective& obj, const ExtrapolatorParams& start,
                                            const OptimizerConfig& cfg) {
    const std::size_t p = obj.spec().p;
    SimplexRun best{start, obj(start).total};
    if (p < 2) {
        return best;
    }
    const std::size_t n = p - 1;
    struct Ctx {
        const DesignObjective* obj;
        std::size_t p;
    } ctx{&obj, p};

    gsl_multimin_function fn;
    fn.n = n;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* x, void* raw) {
        const auto* c = static_cast<const Ctx*>(raw);
        const double v = (*c->obj)(from_coordinates(x, c->p)).total;
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);

    // Two passes: the second restarts the simplex around the first optimum.
    for (double scale : {1.0, 0.1}) {
        to_coordinates(best.params, x);
        for (std::size_t i = 0; i < n; ++i) {
            gsl_vector_set(step, i, scale * std::max(0.5, 0.1 * std::abs(gsl_vector_get(x, i))));
        }
        gsl_multimin_fminimizer_set(m, &fn, x, step);
        for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
            if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) {
                break;
            }
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), cfg.size_tolerance) == GSL_SUCCESS) {
                break;
            }
        }
        const double v = gsl_multimin_fminimizer_minimum(m);
        if (v < best.value) {
            best = {from_coordinates(gsl_multimin_fminimizer_x(m), p), v};
        }
    }

    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return best;
}

}  // namespace detail

/// Multi-start Nelder-Mead. Starts are `init`, ZOH, FOH over the delay (when
/// p >= 2) and seeded random points on the b = 0 plane. Returns `init` with
/// improved = false when no start beats it.
[[nodiscard]] inline DesignResult optimize(const DesignSpec& spec, const ExtrapolatorParams& init,
                                           const OptimizerConfig& cfg = {}) {
    const DesignObjective obj(spec);
    if (init.size() != spec.p) {
        throw ConfigError("design", "init", "initial coefficient count must equal p");
    }
    init.validate();
    if (std::abs(init.dc_gain() - 1.0) > 1e-9) {
        throw ConfigError("design", "init", "initial parameters must satisfy sum(a) + b = 1");
    }

    std::vector<ExtrapolatorParams> starts{init, ExtrapolatorParams::zoh(spec.p)};
    const auto k = static_cast<std::size_t>(std::llround(spec.delay / spec.macro_step));
    if (spec.p >= 2) {
        starts.push_back(ExtrapolatorParams::foh_for_delay(spec.p, k));
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> coeff(-cfg.random_range, cfg.random_range);
    while (starts.size() < cfg.starts) {
        ExtrapolatorParams s{std::vector<double>(spec.p, 0.0), 0.0};
        double partial = 0.0;
        for (std::size_t i = 0; i + 1 < spec.p; ++i) {
            s.a[i] = coeff(rng);
            partial += s.a[i];
        }
        s.a[spec.p - 1] = 1.0 - partial;
        starts.push_back(std::move(s));
    }
    starts.resize(std::max<std::size_t>(cfg.starts, 1));
    starts.front() = detail::fold_bias(init);

    std::vector<detail::SimplexRun> runs(starts.size());
    if (cfg.parallel) {
        std::vector<std::future<detail::SimplexRun>> jobs;
        jobs.reserve(starts.size());
        for (const auto& s : starts) {
            jobs.push_back(std::async(std::launch::async, [&obj, &cfg, s] { return detail::run_simplex(obj, s, cfg); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            runs[i] = jobs[i].get();
        }
    } else {
        for (std::size_t i = 0; i < starts.size(); ++i) {
            runs[i] = detail::run_simplex(obj, starts[i], cfg);
        }
    }

    DesignResult result;
    result.initial = obj(init);
    result.params = init;
    result.breakdown = result.initial;
    for (const auto& r : runs) {
        if (r.value < result.breakdown.total) {
            result.params = r.params;
            result.breakdown = obj(r.params);
            result.improved = true;
        }
    }
    return result;
}

/// Largest in-band deviations of G_p from the ideal unit gain.
struct BandDeviation {
    double max_phase_deg = 0.0;
    double max_magnitude_error = 0.0;
};

[[nodiscard]] inline BandDeviation band_deviation(const ExtrapolatorParams& params, const DesignSpec& spec,
                                                  std::size_t points = 400) {
    BandDeviation out;
    for (double w : FrequencyGrid::linear(spec.band_min, spec.band_max, points).omega) {
        const cplx g = eval_gp(w, params, spec.macro_step, spec.delay);
        out.max_phase_deg = std::max(out.max_phase_deg, std::abs(std::arg(g)) * 180.0 / std::numbers::pi);
        out.max_magnitude_error = std::max(out.max_magnitude_error, std::abs(std::abs(g) - 1.0));
    }
    return out;
}

}  // namespace cosimlab
