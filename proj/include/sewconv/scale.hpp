#pragma once

// Semigroup scales (S(t), X_lambda) with computable norms.
//
// Every concrete model here is diagonal in its basis: S(t) scales coefficient
// k by exp(-r_k t) and the X_lambda norm weights coefficient k by b_k^lambda.
//
//   spectral  (Dirichlet Laplacian on (0,1), sine modes): r_k = b_k = (k pi)^2
//   diagonal  (matrix diag(lambda_1..lambda_N), lambda_k < 0): r_k = b_k = -lambda_k
//   identity  (S(t) = Id, all X_lambda equal):            r_k = 0, b_k = 1
//
// The time horizon is T = 1 throughout.

#include "sewconv/core.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace sewconv {

inline constexpr double kMinScaleIndex = 0.0;
inline constexpr double kMaxScaleIndex = 2.0;

/// Abstract semigroup scale. Implementations must be immutable after
/// construction; all member functions are safe to call concurrently.
class SemigroupScale {
public:
    virtual ~SemigroupScale() = default;

    virtual ModelTag tag() const = 0;
    std::size_t dimension() const { return tag().dimension; }

    /// S(t)u.
    virtual ScaleElement apply(double t, const ScaleElement& u) const = 0;
    /// ||u||_{X_lambda}, lambda in [0, 2].
    virtual double norm(double lambda, const ScaleElement& u) const = 0;

    /// ||S(t)||_{L(X_zeta, X_lambda)}.
    virtual double operator_norm(double t, double zeta, double lambda) const = 0;
    /// ||S(t) - I||_{L(X_mu, X_nu)}.
    virtual double increment_operator_norm(double t, double mu, double nu) const = 0;

    /// K with ||u||_beta <= K ||u||_lambda, beta <= lambda.
    virtual double embedding_constant(double lambda, double beta) const = 0;
    /// L with ||S(t)||_{zeta->lambda} <= L t^{zeta-lambda} on (0,1].
    virtual double smoothing_constant(double zeta, double lambda) const = 0;
    /// C with ||S(t)-I||_{mu->nu} <= C t^{mu-nu} on (0,1], 0 <= mu-nu <= 1.
    virtual double holder_constant(double mu, double nu) const = 0;

    ScaleElement element(Vector c) const { return {tag(), std::move(c)}; }
    ScaleElement zero() const { return ScaleElement::zero(tag()); }
    /// Basis vector with 0-based index i (mode number i+1).
    ScaleElement basis(std::size_t i) const {
        ScaleElement e = zero();
        if (i >= dimension()) throw UsageError("basis index out of range");
        e[i] = 1.0;
        return e;
    }

    void check_member(const ScaleElement& u) const {
        if (!(u.tag() == tag()))
            throw UsageError(std::string("element does not belong to ") + to_string(tag().kind) + " model of dimension " +
                             std::to_string(dimension()));
    }
};

namespace detail {

inline void check_index(double lambda) {
    if (!(lambda >= kMinScaleIndex && lambda <= kMaxScaleIndex))
        throw DomainError("scale index " + std::to_string(lambda) + " outside supported range [0, 2]");
}

inline void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("semigroup time must be finite and >= 0, got " + std::to_string(t));
}

/// sup_{0 < x <= xmax} x^d e^{-x}, d >= 0.
inline double sup_power_exp(double d, double xmax) {
    if (d == 0.0) return 1.0;
    const double x = std::min(d, xmax);
    return std::pow(x, d) * std::exp(-x);
}

/// sup_{0 < x <= xmax} (1 - e^{-x}) x^{-d}, 0 <= d <= 1.
inline double sup_one_minus_exp_power(double d, double xmax) {
    if (xmax <= 0.0) return 0.0;
    auto h = [d](double x) { return -std::expm1(-x) * std::pow(x, -d); };
    if (d >= 1.0) return 1.0;  // decreasing, limit 1 at 0
    if (d <= 0.0) return h(xmax);
    // unimodal in log x
    auto neg = [&](double lx) { return -h(std::exp(lx)); };
    const double lo = std::log(1e-12), hi = std::log(xmax);
    auto [arg, val] = boost::math::tools::brent_find_minima(neg, lo, hi, std::numeric_limits<double>::digits / 2);
    return std::max({-val, h(xmax), h(std::exp(lo))});
}

} // namespace detail

/// Diagonal semigroup scale; base for all concrete models.
class DiagonalScale : public SemigroupScale {
public:
    DiagonalScale(ModelKind kind, std::vector<double> rates, std::vector<double> bases)
        : tag_{kind, rates.size()}, rates_(std::move(rates)), bases_(std::move(bases)) {
        if (rates_.empty()) throw ConfigError("scale model dimension must be >= 1");
        if (bases_.size() != rates_.size()) throw ConfigError("rates/bases length mismatch");
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            if (!(rates_[k] >= 0.0) || !std::isfinite(rates_[k])) throw ConfigError("decay rates must be finite and >= 0");
            if (!(bases_[k] > 0.0) || !std::isfinite(bases_[k])) throw ConfigError("norm bases must be finite and > 0");
        }
    }

    ModelTag tag() const override { return tag_; }
    std::span<const double> rates() const { return rates_; }
    std::span<const double> bases() const { return bases_; }

    /// Diagonal of S(t).
    Vector multipliers(double t) const {
        detail::check_time(t);
        Vector m(static_cast<Eigen::Index>(rates_.size()));
        for (std::size_t k = 0; k < rates_.size(); ++k) m[static_cast<Eigen::Index>(k)] = std::exp(-rates_[k] * t);
        return m;
    }

    /// Diagonal of the X_lambda weight operator (b_k^lambda).
    Vector weights(double lambda) const {
        detail::check_index(lambda);
        Vector w(static_cast<Eigen::Index>(bases_.size()));
        for (std::size_t k = 0; k < bases_.size(); ++k) w[static_cast<Eigen::Index>(k)] = std::pow(bases_[k], lambda);
        return w;
    }

    ScaleElement apply(double t, const ScaleElement& u) const override {
        detail::check_time(t);
        check_member(u);
        if (t == 0.0) return u;
        ScaleElement out = u;
        for (std::size_t k = 0; k < rates_.size(); ++k) out[k] *= std::exp(-rates_[k] * t);
        return out;
    }

    /// S(t)u with a precomputed multiplier vector.
    ScaleElement apply(const Vector& multipliers, const ScaleElement& u) const {
        check_member(u);
        return {tag_, multipliers.cwiseProduct(u.coefficients())};
    }

    double norm(double lambda, const ScaleElement& u) const override {
        detail::check_index(lambda);
        check_member(u);
        std::vector<double> sq(rates_.size());
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            const double v = (lambda == 0.0 ? 1.0 : std::pow(bases_[k], lambda)) * u[k];
            sq[k] = v * v;
        }
        return std::sqrt(pairwise_sum(sq.data(), sq.size()));
    }

    double operator_norm(double t, double zeta, double lambda) const override {
        detail::check_time(t);
        detail::check_index(zeta);
        detail::check_index(lambda);
        double best = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k)
            best = std::max(best, std::exp(-rates_[k] * t) * std::pow(bases_[k], lambda - zeta));
        return best;
    }

    double increment_operator_norm(double t, double mu, double nu) const override {
        detail::check_time(t);
        detail::check_index(mu);
        detail::check_index(nu);
        double best = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k)
            best = std::max(best, -std::expm1(-rates_[k] * t) * std::pow(bases_[k], nu - mu));
        return best;
    }

    double embedding_constant(double lambda, double beta) const override {
        detail::check_index(lambda);
        detail::check_index(beta);
        if (beta > lambda) throw DomainError("embedding X_lambda -> X_beta requires beta <= lambda");
        double best = 0.0;
        for (double b : bases_) best = std::max(best, std::pow(b, beta - lambda));
        return best;
    }

    double smoothing_constant(double zeta, double lambda) const override {
        detail::check_index(zeta);
        detail::check_index(lambda);
        if (zeta > lambda) throw DomainError("smoothing constant requires zeta <= lambda");
        const double d = lambda - zeta;
        // sup_{t in (0,1]} t^d e^{-r t} b^d; with r = b this is sup_{x <= r} x^d e^{-x}.
        double best = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            if (rates_[k] == 0.0)
                best = std::max(best, std::pow(bases_[k], d));
            else
                best = std::max(best, detail::sup_power_exp(d, rates_[k]) * std::pow(bases_[k] / rates_[k], d));
        }
        return best;
    }

    double holder_constant(double mu, double nu) const override {
        detail::check_index(mu);
        detail::check_index(nu);
        const double d = mu - nu;
        if (d < 0.0 || d > 1.0) throw DomainError("Hoelder constant requires 0 <= mu - nu <= 1");
        double best = 0.0;
        for (std::size_t k = 0; k < rates_.size(); ++k) {
            if (rates_[k] == 0.0) continue;
            best = std::max(best, detail::sup_one_minus_exp_power(d, rates_[k]) * std::pow(rates_[k] / bases_[k], d));
        }
        return best;
    }

private:
    ModelTag tag_;
    std::vector<double> rates_;
    std::vector<double> bases_;
};

/// Dirichlet Laplacian on L^2((0,1)) in the orthonormal sine basis
/// sqrt(2) sin(k pi x), k = 1..N, with norm ||(-A)^lambda u||.
class SpectralDirichletModel : public DiagonalScale {
public:
    explicit SpectralDirichletModel(std::size_t modes = 64) : DiagonalScale(ModelKind::spectral, eig(modes), eig(modes)) {}

    /// mu_k = (k pi)^2 for 1-based mode number k.
    static double eigenvalue(std::size_t k) {
        const double kp = static_cast<double>(k) * std::numbers::pi;
        return kp * kp;
    }

private:
    static std::vector<double> eig(std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = eigenvalue(k + 1);
        return v;
    }
};

/// Finite-dimensional A = diag(lambda_1, ..., lambda_N) with all lambda_k < 0.
class DiagonalMatrixModel : public DiagonalScale {
public:
    explicit DiagonalMatrixModel(const std::vector<double>& eigenvalues)
        : DiagonalScale(ModelKind::diagonal, negate(eigenvalues), negate(eigenvalues)) {}

private:
    static std::vector<double> negate(const std::vector<double>& eigenvalues) {
        std::vector<double> r;
        r.reserve(eigenvalues.size());
        for (double l : eigenvalues) {
            if (!(l < 0.0)) throw ConfigError("diagonal model requires eigenvalues < 0 (lambda_k <= -m < 0)");
            r.push_back(-l);
        }
        return r;
    }
};

/// S(t) = Id on R^d; every X_lambda is R^d with the Euclidean norm.
class IdentityModel : public DiagonalScale {
public:
    explicit IdentityModel(std::size_t dim = 1)
        : DiagonalScale(ModelKind::identity, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)) {}
};

// Free-function surface.

inline ScaleElement apply_semigroup(const SemigroupScale& model, double t, const ScaleElement& u) { return model.apply(t, u); }

inline double scale_norm(const SemigroupScale& model, double lambda, const ScaleElement& u) { return model.norm(lambda, u); }

/// Empirical scale constants over a time grid.
struct ScaleEstimateReport {
    double zeta = 0.0;
    double lambda = 0.0;
    double empirical_smoothing = 0.0;   ///< sup_t t^{lambda-zeta} ||S(t)||_{zeta->lambda}
    double empirical_holder = 0.0;      ///< sup_t t^{zeta-lambda} ||S(t)-I||_{lambda->zeta}
    bool holder_checked = false;        ///< false when lambda - zeta > 1
    double smoothing_constant = 0.0;    ///< analytic L(zeta, lambda)
    double holder_constant = 0.0;       ///< analytic C(lambda, zeta)
};

/// Checks ||S(t)||_{zeta->lambda} <= L t^{zeta-lambda} and
/// ||S(t)-I||_{lambda->zeta} <= C t^{lambda-zeta} on the given grid.
inline ScaleEstimateReport verify_scale_estimates(const SemigroupScale& model, double zeta, double lambda,
                                                  std::span<const double> t_grid) {
    if (!(0.0 <= zeta && zeta <= lambda && lambda < kMaxScaleIndex))
        throw DomainError("verify_scale_estimates requires 0 <= zeta <= lambda < 2");
    ScaleEstimateReport r;
    r.zeta = zeta;
    r.lambda = lambda;
    r.holder_checked = (lambda - zeta) <= 1.0;
    r.smoothing_constant = model.smoothing_constant(zeta, lambda);
    if (r.holder_checked) r.holder_constant = model.holder_constant(lambda, zeta);
    for (double t : t_grid) {
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("time grid must lie in (0, 1]");
        r.empirical_smoothing = std::max(r.empirical_smoothing, std::pow(t, lambda - zeta) * model.operator_norm(t, zeta, lambda));
        if (r.holder_checked)
            r.empirical_holder =
                std::max(r.empirical_holder, std::pow(t, zeta - lambda) * model.increment_operator_norm(t, lambda, zeta));
    }
    return r;
}

/// All multipliers exp(-r_k t) of S(t) are nonzero, i.e. every r_k t is finite.
/// Decided on the exponents since the multipliers themselves underflow.
inline bool semigroup_injective(const DiagonalScale& model, double t) {
    detail::check_time(t);
    for (double r : model.rates())
        if (!std::isfinite(r * t)) return false;
    return true;
}

} // namespace sewconv
