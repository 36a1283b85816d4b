#pragma once

// Sewing map and convolution integrals.
//
// For g on the simplex let psi = S_2 g, i.e. psi(u,v) = S(v-u) g(u,v). On the
// dyadic partition r_i = s + i (t-s) 2^-n the partial sewing map is
//
//     M_n(s,t) = psi(s,t) - sum_{i=1}^{2^n} S(t - r_i) psi(r_{i-1}, r_i),
//
// and k_g(s,t) = S(t-s) g(s,t) - M(s,t). With g(s,t) = (x(t)-x(s)) phi(s) the
// sum is the semigroup-twisted Riemann sum sum_i S(t - r_{i-1}) phi(r_{i-1}) dx_i
// and k_g(s,t) is the convolution integral int_s^t S(t-r) phi(r) dx(r).
//
// When phi is singular at the left endpoint a, the integral from a is the
// limit of the trimmed sums that skip the first subinterval.

#include "sewconv/core.hpp"
#include "sewconv/diagnostics.hpp"
#include "sewconv/paths.hpp"
#include "sewconv/scale.hpp"
#include "sewconv/simplex.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sewconv {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SewingConfig {
    int max_level = 14;
    int min_level = 2;            ///< earliest level at which the tolerance test may stop
    double tol = 1e-9;            ///< relative, in the monitored norm
    bool stop_early = true;
    double monitor_index = 0.0;   ///< lambda_mon
    bool singular = false;
    double gamma = 0.0;           ///< singularity order at the left endpoint
    double alpha = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    double eta = kNaN;            ///< driver exponent; NaN takes the path's nominal exponent
    double rho = 1.0;             ///< Hoelder exponent of hat_delta_1 phi

    double mu() const { return eta + rho; }

    /// Throws ConfigError naming the violated inequality.
    void validate() const {
        if (max_level < 0 || max_level > 26) throw ConfigError("sewing max_level must be in [0, 26]");
        if (min_level < 1) throw ConfigError("sewing min_level must be >= 1");
        if (!(tol >= 0.0)) throw ConfigError("sewing tolerance must be >= 0");
        if (std::isnan(eta)) throw ConfigError("sewing requires the driver exponent eta");
        if (!(mu() > 1.0))
            throw ConfigError("sewing requires mu = eta + rho > 1 (got mu = " + std::to_string(mu()) + ")");
        if (!(alpha - beta >= 0.0 && alpha - beta < 1.0))
            throw ConfigError("sewing requires 0 <= alpha - beta < 1 (got alpha - beta = " + std::to_string(alpha - beta) + ")");
        if (singular) {
            const double bound = std::min(eta, mu() + beta - alpha);
            if (!(gamma >= 0.0 && gamma < bound))
                throw ConfigError("singular sewing requires 0 <= gamma < eta ^ (mu + beta - alpha) = " + std::to_string(bound) +
                                  " (got gamma = " + std::to_string(gamma) + ")");
        }
    }
};

struct SewingResult {
    ScaleElement value;
    std::vector<double> level_deltas;   ///< level_deltas[n] = ||M_{n+1} - M_n||_{lambda_mon}
    double fitted_decay_rate = kNaN;    ///< minus the log2 slope of level_deltas (coarsest two excluded)
    bool converged = false;
    int levels_used = 0;                ///< finest level evaluated
    double form_mismatch = 0.0;         ///< ||direct Riemann sum - (S(t-s)g(s,t) - M)|| (convolution only)
};

namespace detail {

inline double fit_decay_or_nan(const std::vector<double>& deltas) {
    if (deltas.size() < kPreasymptoticLevels + 4) return kNaN;
    for (std::size_t k = kPreasymptoticLevels; k < deltas.size(); ++k)
        if (!(deltas[k] > 0.0)) return kNaN;
    return -fit_level_decay(deltas).slope;
}

/// Iterates partial sums `sum(n)` for n = first..max_level, recording the
/// monitored level increments and the stopping decision. `value(n)` maps the
/// partial sum to the reported quantity.
template <class PartialSum>
SewingResult refine_levels(const SemigroupScale& model, const SewingConfig& cfg, int first, const PartialSum& sum,
                           double floor_abs) {
    SewingResult r;
    ScaleElement prev = sum(first);
    r.levels_used = first;
    double last_delta = 0.0;
    for (int n = first + 1; n <= cfg.max_level; ++n) {
        ScaleElement cur = sum(n);
        last_delta = model.norm(cfg.monitor_index, cur - prev);
        r.level_deltas.push_back(last_delta);
        prev = std::move(cur);
        r.levels_used = n;
        if (cfg.stop_early && n >= cfg.min_level &&
            last_delta <= cfg.tol * (model.norm(cfg.monitor_index, prev) + floor_abs))
            break;
    }
    r.value = std::move(prev);
    r.converged = r.level_deltas.empty() || last_delta <= cfg.tol * (model.norm(cfg.monitor_index, r.value) + floor_abs);
    r.fitted_decay_rate = fit_decay_or_nan(r.level_deltas);
    return r;
}

inline void check_interval(double s, double t) {
    if (!(s <= t) || !std::isfinite(s) || !std::isfinite(t)) throw DomainError("sewing requires s <= t");
}

/// Smallest level L such that every value is dyadic at L (or -1).
inline int dyadic_level(std::initializer_list<double> values, int cap = 60) {
    for (int L = 0; L <= cap; ++L) {
        bool ok = true;
        for (double v : values) ok = ok && is_dyadic(v, L);
        if (ok) return L;
    }
    return -1;
}

inline void check_driver_resolution(const HolderPath& x, double s, double t, int level) {
    if (s < 0.0 || t > 1.0) throw DomainError("integration interval must lie in [0, 1]");
    const int needed = dyadic_level({s, t, std::ldexp(t - s, -level)});
    if (needed < 0 || needed > x.level())
        throw DomainError("driver resolution insufficient: level " + std::to_string(level) + " sums on [" + std::to_string(s) + ", " +
                          std::to_string(t) + "] require path level " + (needed < 0 ? std::string(">60") : std::to_string(needed)) +
                          ", path has level " + std::to_string(x.level()));
}

} // namespace detail

/// Dyadic approximation of the sewing map M(s,t) of g.
inline SewingResult sew(const SemigroupScale& model, const SimplexFn2& g, double s, double t, const SewingConfig& cfg) {
    cfg.validate();
    detail::check_interval(s, t);
    if (s == t) {
        SewingResult r;
        r.value = model.zero();
        r.converged = true;
        return r;
    }
    auto psi = [&](double u, double v) { return model.apply(v - u, g(u, v)); };
    const ScaleElement psi_st = psi(s, t);
    const double floor_abs = 1e-14 * model.norm(cfg.monitor_index, psi_st);
    auto partial = [&](int n) {
        const std::size_t count = std::size_t{1} << n;
        const double h = std::ldexp(t - s, -n);
        ScaleElement riemann = pairwise_sum<ScaleElement>(
            count,
            [&](std::size_t i) {
                const double r0 = s + static_cast<double>(i) * h;
                const double r1 = (i + 1 == count) ? t : s + static_cast<double>(i + 1) * h;
                return model.apply(t - r1, psi(r0, r1));
            },
            model.zero());
        return psi_st - riemann;
    };
    return detail::refine_levels(model, cfg, 0, partial, floor_abs);
}

/// Left-point sum sum_i S(t - r_{i-1}) phi(r_{i-1}) (x(r_i) - x(r_{i-1}))
/// over the uniform partition of [s, t] into `steps` grid intervals of `x`.
inline ScaleElement uniform_convolution_sum(const SemigroupScale& model, const SimplexFn1& phi, const HolderPath& x, double s,
                                            double t, std::size_t steps) {
    detail::check_interval(s, t);
    if (steps == 0) throw DomainError("uniform_convolution_sum needs steps >= 1");
    if (s == t) return model.zero();
    if (!is_dyadic(s, x.level()) || !is_dyadic(t, x.level()) || s < 0.0 || t > 1.0)
        throw DomainError("uniform_convolution_sum endpoints must be grid points of the driver");
    const auto is = static_cast<std::uint64_t>(std::ldexp(s, x.level()));
    const auto it = static_cast<std::uint64_t>(std::ldexp(t, x.level()));
    if ((it - is) % steps != 0)
        throw DomainError("driver resolution insufficient: " + std::to_string(steps) + " steps do not divide the " +
                          std::to_string(it - is) + " grid intervals of [s, t]");
    const std::uint64_t stride = (it - is) / steps;
    return pairwise_sum<ScaleElement>(
        steps,
        [&](std::size_t i) {
            const std::uint64_t j0 = is + i * stride, j1 = j0 + stride;
            const double r0 = x.time(j0);
            return (x.at_index(j1) - x.at_index(j0)) * model.apply(t - r0, phi(r0));
        },
        model.zero());
}

/// Left-point sum on an arbitrary partition s = p_0 < ... < p_k = t with a
/// pointwise-evaluable driver.
inline ScaleElement partition_convolution_sum(const SemigroupScale& model, const SimplexFn1& phi,
                                              const std::function<double(double)>& x, std::span<const double> partition) {
    if (partition.size() < 2) throw DomainError("partition needs at least two points");
    for (std::size_t i = 1; i < partition.size(); ++i)
        if (!(partition[i - 1] < partition[i])) throw DomainError("partition must be strictly increasing");
    const double t = partition.back();
    return pairwise_sum<ScaleElement>(
        partition.size() - 1,
        [&](std::size_t i) {
            const double r0 = partition[i], r1 = partition[i + 1];
            return (x(r1) - x(r0)) * model.apply(t - r0, phi(r0));
        },
        model.zero());
}

/// int_s^t S(t-r) phi(r) dx(r) as k_g(s,t) = S(t-s) g(s,t) - M(s,t), g(s,t) = (x(t)-x(s)) phi(s).
inline SewingResult convolution_integral(const SemigroupScale& model, const SimplexFn1& phi, const HolderPath& x, double s,
                                         double t, SewingConfig cfg) {
    if (std::isnan(cfg.eta)) cfg.eta = x.nominal_exponent();
    cfg.validate();
    detail::check_interval(s, t);
    if (s == t) {
        SewingResult r;
        r.value = model.zero();
        r.converged = true;
        return r;
    }
    detail::check_driver_resolution(x, s, t, cfg.max_level);
    SimplexFn2 g = [&](double u, double v) { return (x.at(v) - x.at(u)) * phi(u); };
    SewingResult r = sew(model, g, s, t, cfg);
    const ScaleElement psi_st = model.apply(t - s, g(s, t));
    r.value = psi_st - r.value;
    const ScaleElement direct = uniform_convolution_sum(model, phi, x, s, t, std::size_t{1} << r.levels_used);
    r.form_mismatch = model.norm(cfg.monitor_index, direct - r.value);
    return r;
}

/// Convolution integral from the singular endpoint a: trimmed dyadic sums
///
///     sum_{i=2}^{2^n} S(t - r_i) psi(r_{i-1}, r_i),
///
/// i.e. psi(a,t) minus the trimmed partial sewing map. The first subinterval
/// term is added back only when phi(a) is finite.
inline SewingResult singular_convolution_integral(const SemigroupScale& model, const SimplexFn1& phi, const HolderPath& x, double a,
                                                  double t, SewingConfig cfg) {
    if (std::isnan(cfg.eta)) cfg.eta = x.nominal_exponent();
    cfg.singular = true;
    cfg.validate();
    detail::check_interval(a, t);
    if (a == t) {
        SewingResult r;
        r.value = model.zero();
        r.converged = true;
        return r;
    }
    detail::check_driver_resolution(x, a, t, cfg.max_level);

    std::optional<ScaleElement> phi_a;
    try {
        ScaleElement v = phi(a);
        if (v.all_finite()) phi_a = std::move(v);
    } catch (const DomainError&) {
    }

    auto psi = [&](double u, double v) { return model.apply(v - u, (x.at(v) - x.at(u)) * phi(u)); };
    auto partial = [&](int n) {
        const std::size_t count = std::size_t{1} << n;
        const double h = std::ldexp(t - a, -n);
        ScaleElement trimmed = pairwise_sum<ScaleElement>(
            count - 1,
            [&](std::size_t i) {
                const double r0 = a + static_cast<double>(i + 1) * h;
                const double r1 = (i + 2 == count) ? t : a + static_cast<double>(i + 2) * h;
                return model.apply(t - r1, psi(r0, r1));
            },
            model.zero());
        if (phi_a) trimmed += (x.at(a + h) - x.at(a)) * model.apply(t - a, *phi_a);
        return trimmed;
    };
    // Level 0 has no trimmed terms; start at level 1.
    const double floor_abs = 0.0;
    SewingResult r = detail::refine_levels(model, cfg, 1, partial, floor_abs);
    return r;
}

/// Classical convolution int_s^t S(t-xi) phi(xi) x'(xi) dxi with composite
/// 7-point Gauss-Legendre on `panels` equal panels.
inline ScaleElement classical_convolution(const SemigroupScale& model, const SimplexFn1& phi, const std::function<double(double)>& dx,
                                          double s, double t, std::size_t panels) {
    detail::check_interval(s, t);
    if (panels == 0) throw DomainError("classical_convolution needs panels >= 1");
    if (s == t) return model.zero();
    using Rule = boost::math::quadrature::gauss<double, 7>;
    const auto& nodes = Rule::abscissa();
    const auto& weights = Rule::weights();
    const double width = (t - s) / static_cast<double>(panels);
    auto panel = [&](std::size_t p) {
        const double lo = s + static_cast<double>(p) * width;
        const double mid = lo + 0.5 * width, half = 0.5 * width;
        auto at = [&](double xi) { return (dx(xi) * half) * model.apply(t - xi, phi(xi)); };
        // boost stores the non-negative half of the symmetric rule
        ScaleElement acc = weights[0] * at(mid);
        for (std::size_t k = 1; k < nodes.size(); ++k) {
            acc += weights[k] * at(mid - half * nodes[k]);
            acc += weights[k] * at(mid + half * nodes[k]);
        }
        return acc;
    };
    return pairwise_sum<ScaleElement>(panels, panel, model.zero());
}

inline ScaleElement classical_convolution(const SemigroupScale& model, const SimplexFn1& phi, const HolderPath& x, double s, double t,
                                          std::size_t panels) {
    if (!x.has_derivative()) throw UsageError("classical oracle requested with a rough driver ('" + x.info().kind + "')");
    return classical_convolution(model, phi, x.derivative_fn(), s, t, panels);
}

/// Value on (s,t) from values on (s,tau) and (tau,t): S(t-tau) I_left + I_right.
inline ScaleElement chasles_compose(const SemigroupScale& model, const ScaleElement& left, const ScaleElement& right, double tau,
                                    double t) {
    if (!(tau <= t)) throw DomainError("chasles_compose requires tau <= t");
    return model.apply(t - tau, left) + right;
}

} // namespace sewconv
