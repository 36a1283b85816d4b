#pragma once

// Mild solutions y(t) = S(t) psi + I_{S, sigma o y}(0, t) of
// dy = A y dt + sigma(y) dx on [0, 1].
//
// Stepper (exponential Young-Euler): on the working grid of level m + r,
// sigma is frozen at the left endpoint of each step, where the local
// convolution integral collapses to S(h) sigma(y_i) dx_i:
//
//     y_{i+1} = S(h) y_i + S(h) sigma(y_i) (x(t_{i+1}) - x(t_i)).
//
// Picard: iterates Gamma(y)(t) = S(t) psi + I_{S, sigma o y}(0, t) on the same
// grid, accumulating the integral by Chasles composition. Its fixed point is
// the stepper trajectory; the difference between the two modes is the
// fixed-point error alone.

#include "sewconv/core.hpp"
#include "sewconv/diagnostics.hpp"
#include "sewconv/nonlinear.hpp"
#include "sewconv/paths.hpp"
#include "sewconv/scale.hpp"
#include "sewconv/sewing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sewconv {

enum class SolverMode { stepper, picard };

inline const char* to_string(SolverMode m) { return m == SolverMode::stepper ? "stepper" : "picard"; }

struct SolverConfig {
    int level = 10;          ///< output grid t_j = j 2^-m
    int refinement = 0;      ///< working grid has level m + refinement
    SolverMode mode = SolverMode::stepper;
    double picard_tol = 1e-10;
    int picard_max_iter = 100;
    double alpha = 0.3;
    double theta = 0.3;
    double eta = kNaN;       ///< NaN takes the driver's nominal exponent
    std::vector<double> norm_indices{0.0};
    std::size_t holder_samples = 257;  ///< output points used for the Hoelder part of the Y-norm

    double gamma() const { return alpha - theta; }
    int fine_level() const { return level + refinement; }

    /// Throws ConfigError naming the violated inequality.
    void validate(const FieldMetadata& md, double eta_value) const {
        auto fail = [](const std::string& what, double lhs, double rhs) {
            std::ostringstream os;
            os << "regime violation: " << what << " fails (" << lhs << " vs " << rhs << ")";
            throw ConfigError(os.str());
        };
        if (level < 1 || refinement < 0 || fine_level() > 24) throw ConfigError("solver levels must satisfy 1 <= m and m + refinement <= 24");
        if (picard_tol <= 0.0 || picard_max_iter < 1) throw ConfigError("picard tolerance must be > 0 and max iterations >= 1");
        if (!(eta_value > 0.5)) fail("eta > 1/2", eta_value, 0.5);
        if (!(alpha > 0.0 && alpha < 1.0)) fail("0 < alpha < 1", alpha, 1.0);
        if (!(alpha + eta_value > 1.0)) fail("alpha + eta > 1", alpha + eta_value, 1.0);
        if (!(theta >= 0.0 && theta <= alpha)) fail("0 <= theta <= alpha", theta, alpha);
        if (md.regime == Regime::global_lipschitz) {
            if (!(eta_value > 2.0 * alpha - theta)) fail("eta > 2 alpha - theta (global-Lipschitz)", eta_value, 2.0 * alpha - theta);
        } else {
            const double rhs = alpha + (1.0 + md.omega) * (alpha - theta);
            if (!(eta_value > rhs))
                fail(std::string("eta > alpha + (1 + omega)(alpha - theta) (") + to_string(md.regime) + ", omega = " +
                         std::to_string(md.omega) + ")",
                     eta_value, rhs);
        }
        for (double l : norm_indices)
            if (!(l >= kMinScaleIndex && l < kMaxScaleIndex)) throw ConfigError("requested norm indices must lie in [0, 2)");
    }
};

struct YNorm {
    double weighted_alpha = 0.0;  ///< sup t^gamma ||y(t)||_alpha
    double sup0 = 0.0;            ///< sup ||y(t)||_X
    double holder_alpha = 0.0;    ///< sup ||y(t) - S(t-s) y(s)||_alpha / (t-s)^alpha
    double total() const { return weighted_alpha + sup0 + holder_alpha; }
};

enum class SolveStatus { exact, stepped, converged, diverged, max_iterations };

inline const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::exact: return "exact";
    case SolveStatus::stepped: return "stepped";
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::max_iterations: return "max_iterations";
    }
    return "?";
}

struct MildSolution {
    std::vector<double> times;
    std::vector<ScaleElement> values;
    std::vector<double> norm_indices;
    std::vector<std::vector<double>> norms;   ///< norms[l][j] = ||y(t_j)||_{norm_indices[l]}
    YNorm y_norm;
    int iterations = 0;
    std::vector<double> picard_distances;
    std::vector<double> contraction_ratios;
    SolveStatus status = SolveStatus::stepped;
    std::vector<std::string> warnings;
    int level = 0;
    int fine_level = 0;
    double alpha = 0.0, theta = 0.0, eta = 0.0;
    std::vector<ScaleElement> fine_values;   ///< working-grid trajectory

    bool ok() const { return status != SolveStatus::diverged && status != SolveStatus::max_iterations; }

    /// y(t) at a working-grid point.
    const ScaleElement& at(double t) const {
        if (!(t >= 0.0 && t <= 1.0) || !is_dyadic(t, fine_level))
            throw DomainError("solution is stored on the level-" + std::to_string(fine_level) + " grid only");
        return fine_values[static_cast<std::size_t>(std::ldexp(t, fine_level))];
    }
};

namespace detail {

inline std::vector<ScaleElement> coarse_of(const std::vector<ScaleElement>& fine, int refinement) {
    const std::size_t stride = std::size_t{1} << refinement;
    std::vector<ScaleElement> out;
    out.reserve(fine.size() / stride + 1);
    for (std::size_t i = 0; i < fine.size(); i += stride) out.push_back(fine[i]);
    return out;
}

inline std::vector<double> grid_times(int level) {
    const std::size_t n = std::size_t{1} << level;
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = std::ldexp(static_cast<double>(i), -level);
    return t;
}

/// Driver increments on the level-L grid.
inline std::vector<double> increments(const HolderPath& x, int L) {
    if (x.level() < L)
        throw DomainError("driver resolution insufficient: solver working level " + std::to_string(L) + " exceeds path level " +
                          std::to_string(x.level()));
    const std::size_t n = std::size_t{1} << L, stride = std::size_t{1} << (x.level() - L);
    std::vector<double> dx(n);
    for (std::size_t i = 0; i < n; ++i) dx[i] = x.at_index((i + 1) * stride) - x.at_index(i * stride);
    return dx;
}

inline std::vector<ScaleElement> free_evolution(const SemigroupScale& model, const ScaleElement& psi, int L) {
    const std::size_t n = std::size_t{1} << L;
    std::vector<ScaleElement> y;
    y.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) y.push_back(model.apply(std::ldexp(static_cast<double>(i), -L), psi));
    return y;
}

} // namespace detail

/// Y^alpha_{-gamma} norm components of a trajectory on the grid `times`,
/// restricted to (0, T]. The Hoelder part uses at most `holder_samples` points.
inline YNorm compute_Y_norm(const SemigroupScale& model, const std::vector<double>& times, const std::vector<ScaleElement>& values,
                            double alpha, double gamma, double T = 1.0, std::size_t holder_samples = 257) {
    if (times.size() != values.size() || times.empty()) throw DomainError("compute_Y_norm: times/values mismatch");
    YNorm y;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] > T) break;
        idx.push_back(j);
        y.sup0 = std::max(y.sup0, model.norm(0.0, values[j]));
        if (times[j] > 0.0) y.weighted_alpha = std::max(y.weighted_alpha, std::pow(times[j], gamma) * model.norm(alpha, values[j]));
    }
    std::vector<std::size_t> sub;
    const std::size_t stride = std::max<std::size_t>(1, (idx.size() - 1 + holder_samples - 2) / std::max<std::size_t>(holder_samples - 1, 1));
    for (std::size_t k = 0; k < idx.size(); k += stride) sub.push_back(idx[k]);
    if (sub.back() != idx.back()) sub.push_back(idx.back());
    for (std::size_t a = 0; a < sub.size(); ++a)
        for (std::size_t b = a + 1; b < sub.size(); ++b) {
            const double s = times[sub[a]], t = times[sub[b]];
            const ScaleElement inc = values[sub[b]] - model.apply(t - s, values[sub[a]]);
            y.holder_alpha = std::max(y.holder_alpha, model.norm(alpha, inc) / std::pow(t - s, alpha));
        }
    return y;
}

inline YNorm compute_Y_norm(const SemigroupScale& model, const MildSolution& sol, double alpha, double gamma, double T = 1.0,
                            std::size_t holder_samples = 257) {
    return compute_Y_norm(model, sol.times, sol.values, alpha, gamma, T, holder_samples);
}

/// One application of Gamma on the level-L grid: returns
/// S(t_i) psi + sum_{k<i} S(t_i - t_k) sigma(y_k) dx_k, accumulated as
/// I_{k+1} = S(h) I_k + S(h) sigma(y_k) dx_k.
inline std::vector<ScaleElement> apply_gamma(const SemigroupScale& model, const VectorField& field, const std::vector<double>& dx,
                                             const ScaleElement& psi, const std::vector<ScaleElement>& y, int L) {
    const double h = std::ldexp(1.0, -L);
    std::vector<ScaleElement> out;
    out.reserve(y.size());
    ScaleElement acc = model.zero();
    out.push_back(psi);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const ScaleElement local = model.apply(h, dx[i] * field(y[i]));
        acc = chasles_compose(model, acc, local, std::ldexp(static_cast<double>(i), -L), std::ldexp(static_cast<double>(i + 1), -L));
        out.push_back(model.apply(std::ldexp(static_cast<double>(i + 1), -L), psi) + acc);
    }
    return out;
}

namespace detail {

inline MildSolution finish(const SemigroupScale& model, MildSolution sol, const SolverConfig& cfg) {
    sol.values = coarse_of(sol.fine_values, cfg.refinement);
    sol.times = grid_times(cfg.level);
    sol.norm_indices = cfg.norm_indices;
    for (double l : cfg.norm_indices) {
        std::vector<double> col;
        col.reserve(sol.values.size());
        for (const auto& v : sol.values) col.push_back(model.norm(l, v));
        sol.norms.push_back(std::move(col));
    }
    sol.y_norm = compute_Y_norm(model, sol.times, sol.values, cfg.alpha, cfg.gamma(), 1.0, cfg.holder_samples);
    return sol;
}

inline YNorm distance(const SemigroupScale& model, const std::vector<ScaleElement>& a, const std::vector<ScaleElement>& b,
                      const SolverConfig& cfg) {
    std::vector<ScaleElement> d = coarse_of(a, cfg.refinement), e = coarse_of(b, cfg.refinement);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= e[j];
    return compute_Y_norm(model, grid_times(cfg.level), d, cfg.alpha, cfg.gamma(), 1.0, cfg.holder_samples);
}

} // namespace detail

inline MildSolution solve_mild(const SemigroupScale& model, const VectorField& field, const HolderPath& x, const ScaleElement& psi,
                               const SolverConfig& cfg) {
    model.check_member(psi);
    const double eta = std::isnan(cfg.eta) ? x.nominal_exponent() : cfg.eta;
    cfg.validate(field.metadata, eta);
    const int L = cfg.fine_level();
    const std::vector<double> dx = detail::increments(x, L);

    MildSolution sol;
    sol.level = cfg.level;
    sol.fine_level = L;
    sol.alpha = cfg.alpha;
    sol.theta = cfg.theta;
    sol.eta = eta;

    if (field.kind == FieldKind::zero || (model.norm(0.0, psi) == 0.0 && field.vanishes_at_zero(model))) {
        sol.fine_values = detail::free_evolution(model, psi, L);
        sol.status = SolveStatus::exact;
        return detail::finish(model, std::move(sol), cfg);
    }

    if (cfg.mode == SolverMode::stepper) {
        const double h = std::ldexp(1.0, -L);
        sol.fine_values.reserve(dx.size() + 1);
        sol.fine_values.push_back(psi);
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const ScaleElement& yi = sol.fine_values.back();
            sol.fine_values.push_back(model.apply(h, yi + dx[i] * field(yi)));
        }
        sol.status = SolveStatus::stepped;
        return detail::finish(model, std::move(sol), cfg);
    }

    std::vector<ScaleElement> y = detail::free_evolution(model, psi, L);
    int above_one = 0;
    sol.status = SolveStatus::max_iterations;
    for (int k = 1; k <= cfg.picard_max_iter; ++k) {
        std::vector<ScaleElement> next = apply_gamma(model, field, dx, psi, y, L);
        const double d = detail::distance(model, next, y, cfg).total();
        if (!sol.picard_distances.empty()) {
            const double prev = sol.picard_distances.back();
            const double ratio = prev > 0.0 ? d / prev : 0.0;
            sol.contraction_ratios.push_back(ratio);
            above_one = ratio >= 1.0 ? above_one + 1 : 0;
        }
        sol.picard_distances.push_back(d);
        y = std::move(next);
        sol.iterations = k;
        if (!std::isfinite(d)) {
            sol.status = SolveStatus::diverged;
            break;
        }
        if (d < cfg.picard_tol) {
            sol.status = SolveStatus::converged;
            break;
        }
        if (above_one >= 3) {
            sol.status = SolveStatus::diverged;
            sol.warnings.push_back("Picard iteration diverging: contraction ratio >= 1 for 3 consecutive iterations");
            break;
        }
    }
    if (sol.status == SolveStatus::max_iterations)
        sol.warnings.push_back("Picard iteration stopped after " + std::to_string(cfg.picard_max_iter) + " iterations");
    sol.fine_values = std::move(y);
    return detail::finish(model, std::move(sol), cfg);
}

/// ||y - Gamma(y)|| in the Y-norm on the output grid.
inline double picard_residual(const SemigroupScale& model, const VectorField& field, const HolderPath& x, const ScaleElement& psi,
                              const MildSolution& sol, const SolverConfig& cfg) {
    const std::vector<double> dx = detail::increments(x, sol.fine_level);
    const auto g = apply_gamma(model, field, dx, psi, sol.fine_values, sol.fine_level);
    return detail::distance(model, g, sol.fine_values, cfg).total();
}

/// C^eta norm sup|x| + [x]_eta, evaluated on the path coarsened to at most `max_level`.
inline double holder_norm(const HolderPath& x, double eta, int max_level = 12) {
    const int L = std::min(x.level(), max_level);
    const std::size_t stride = std::size_t{1} << (x.level() - L);
    std::vector<double> v;
    for (std::size_t i = 0; i < x.size(); i += stride) v.push_back(x.at_index(i));
    const HolderPath c(v, L, x.nominal_exponent(), x.info());
    double sup = 0.0;
    for (double a : v) sup = std::max(sup, std::abs(a));
    return sup + holder_seminorm(c, eta);
}

struct AprioriConstants {
    double frak_c = 0.0;        ///< (K_a0 + 2)(K_a0 + C_a0 + 1)(Lip + L^alpha), times C
    double T_bar = 1.0;
    double radius = 0.0;        ///< 2 (L_00 K_t0 + L_ta) ||psi||_theta + 1
    double T_star = 1.0;
    double sewing_constant = 1.0;
    std::string note = "up to the sewing constant C (set to 1)";
};

inline AprioriConstants apriori_constants(const SemigroupScale& model, const FieldMetadata& md, double psi_theta_norm, double x_norm,
                                          double alpha, double theta, double eta) {
    if (md.regime != Regime::global_lipschitz) throw ConfigError("a-priori constants require the global-Lipschitz regime");
    if (!md.lip || !md.growth_alpha) throw ConfigError("a-priori constants require Lip_sigma and L^alpha_sigma metadata");
    if (!md.alpha_uniform && md.alpha != alpha)
        throw ConfigError("field metadata declared at alpha = " + std::to_string(md.alpha) + ", requested alpha = " + std::to_string(alpha));
    if (!(eta + theta - 2.0 * alpha > 0.0)) throw ConfigError("a-priori constants require eta > 2 alpha - theta");
    AprioriConstants c;
    const double K = model.embedding_constant(alpha, 0.0), Ca = model.holder_constant(alpha, 0.0);
    c.frak_c = c.sewing_constant * (K + 2.0) * (K + Ca + 1.0) * (*md.lip + *md.growth_alpha);
    const double p = 1.0 / (eta + theta - 2.0 * alpha);
    c.T_bar = std::min(1.0, std::pow(1.0 / (2.0 * c.frak_c * x_norm), p));
    c.radius = 2.0 * (model.smoothing_constant(0.0, 0.0) * model.embedding_constant(theta, 0.0) + model.smoothing_constant(theta, alpha)) *
                   psi_theta_norm +
               1.0;
    c.T_star = std::min(1.0, std::pow(0.5 * c.radius / (c.frak_c * x_norm * (1.0 + c.radius)), p));
    return c;
}

struct BlowupFit {
    double mu = 0.0;
    double expected = 0.0;   ///< theta - 1 - mu
    RateFit fit;
};

/// Log-log slope of ||y(t)||_{X_{1+mu}} over output times in [2^{-m+2}, 2^{-3}].
inline std::vector<BlowupFit> blowup_profile(const SemigroupScale& model, const MildSolution& sol, const std::vector<double>& mus) {
    const double lo = std::ldexp(1.0, -sol.level + 2), hi = 0.125;
    std::vector<BlowupFit> out;
    for (double mu : mus) {
        if (!(mu >= 0.0 && mu < sol.eta + sol.alpha - 1.0))
            throw DomainError("blow-up profile requires 0 <= mu < eta + alpha - 1 = " + std::to_string(sol.eta + sol.alpha - 1.0));
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t j = 0; j < sol.times.size(); ++j)
            if (sol.times[j] >= lo && sol.times[j] <= hi) pairs.emplace_back(sol.times[j], model.norm(1.0 + mu, sol.values[j]));
        out.push_back({mu, sol.theta - 1.0 - mu, fit_rate(std::move(pairs))});
    }
    return out;
}

} // namespace sewconv
