#pragma once

// Vector fields sigma: X -> X for dy = Ay dt + sigma(y) dx, with the
// Lipschitz/growth metadata consumed by the solver.

#include "sewconv/core.hpp"
#include "sewconv/scale.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sewconv {

/// Scalar function sigma_hat with its first two derivatives and their sup bounds.
struct ScalarMap {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> d2f;
    double sup_df = 0.0;
    double sup_d2f = 0.0;
};

namespace scalar_maps {

inline ScalarMap identity() {
    return {"identity", [](double v) { return v; }, [](double) { return 1.0; }, [](double) { return 0.0; }, 1.0, 0.0};
}

inline ScalarMap zero() {
    return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0};
}

inline ScalarMap constant(double c) {
    return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0};
}

inline ScalarMap scaled_sin(double kappa) {
    const double a = std::abs(kappa);
    return {"scaled_sin", [kappa](double v) { return kappa * std::sin(v); }, [kappa](double v) { return kappa * std::cos(v); },
            [kappa](double v) { return -kappa * std::sin(v); }, a, a};
}

inline ScalarMap tanh() {
    return {"tanh", [](double v) { return std::tanh(v); },
            [](double v) {
                const double c = std::cosh(v);
                return 1.0 / (c * c);
            },
            [](double v) {
                const double c = std::cosh(v);
                return -2.0 * std::tanh(v) / (c * c);
            },
            1.0, 4.0 / (3.0 * std::sqrt(3.0))};
}

/// Catalog lookup; `param` is c for constant and kappa for scaled_sin.
inline ScalarMap by_name(const std::string& name, double param = 0.0) {
    if (name == "identity") return identity();
    if (name == "zero") return zero();
    if (name == "constant") return constant(param);
    if (name == "scaled_sin") return scaled_sin(param);
    if (name == "tanh") return tanh();
    throw ConfigError("unknown scalar map '" + name + "' (expected identity | zero | constant | scaled_sin | tanh)");
}

} // namespace scalar_maps

/// Sine transform between the first N Dirichlet modes and G interior nodes
/// xi_j = j / (G + 1), realized by direct summation.
class SineTransform {
public:
    SineTransform(std::size_t modes, std::size_t grid_size) : modes_(modes), grid_(grid_size) {
        if (modes == 0) throw ConfigError("sine transform needs at least one mode");
        if (grid_size < modes)
            throw ConfigError("Nemytskii grid_size " + std::to_string(grid_size) + " < N = " + std::to_string(modes) + " (aliasing)");
        const auto G = static_cast<Eigen::Index>(grid_), N = static_cast<Eigen::Index>(modes_);
        table_.resize(G, N);
        const double w = std::numbers::pi / static_cast<double>(grid_ + 1);
        for (Eigen::Index j = 0; j < G; ++j)
            for (Eigen::Index k = 0; k < N; ++k) table_(j, k) = std::sin(w * static_cast<double>((j + 1) * (k + 1)));
    }

    std::size_t modes() const { return modes_; }
    std::size_t grid_size() const { return grid_; }

    /// Values u(xi_j) of u = sum_k c_k sqrt(2) sin(k pi x).
    Vector synthesize(const Vector& c) const { return std::numbers::sqrt2 * (table_ * c); }
    /// Discrete coefficients <u, sqrt(2) sin(k pi .)>.
    Vector analyze(const Vector& values) const {
        return (std::numbers::sqrt2 / static_cast<double>(grid_ + 1)) * (table_.transpose() * values);
    }
    Vector nodes() const {
        Vector x(static_cast<Eigen::Index>(grid_));
        for (std::size_t j = 0; j < grid_; ++j) x[static_cast<Eigen::Index>(j)] = static_cast<double>(j + 1) / static_cast<double>(grid_ + 1);
        return x;
    }

private:
    std::size_t modes_;
    std::size_t grid_;
    Eigen::MatrixXd table_;
};

inline ScaleElement nemytskii_apply(const ScalarMap& sigma_hat, const ScaleElement& u, const SineTransform& tr) {
    if (u.size() != tr.modes()) throw UsageError("Nemytskii transform built for a different number of modes");
    Vector v = tr.synthesize(u.coefficients());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = sigma_hat.f(v[j]);
    return {u.tag(), tr.analyze(v)};
}

/// grid_size = 0 selects the default 4N.
inline ScaleElement nemytskii_apply(const ScalarMap& sigma_hat, const ScaleElement& u, std::size_t grid_size = 0) {
    if (u.tag().kind != ModelKind::spectral) throw UsageError("Nemytskii operators act on spectral elements only");
    return nemytskii_apply(sigma_hat, u, SineTransform(u.size(), grid_size == 0 ? 4 * u.size() : grid_size));
}

enum class FieldKind { zero, constant, linear, nemytskii };
enum class Regime { global_lipschitz, locally_lipschitz_omega, derivative_locally_lipschitz };

inline const char* to_string(FieldKind k) {
    switch (k) {
    case FieldKind::zero: return "zero";
    case FieldKind::constant: return "constant";
    case FieldKind::linear: return "linear";
    case FieldKind::nemytskii: return "nemytskii";
    }
    return "?";
}

inline const char* to_string(Regime r) {
    switch (r) {
    case Regime::global_lipschitz: return "global-Lipschitz";
    case Regime::locally_lipschitz_omega: return "locally-Lipschitz-omega";
    case Regime::derivative_locally_lipschitz: return "derivative-locally-Lipschitz";
    }
    return "?";
}

struct FieldMetadata {
    std::optional<double> lip;          ///< Lip_sigma on X
    std::optional<double> lip_alpha;    ///< Lip^alpha_sigma on X_alpha
    std::optional<double> growth_alpha; ///< L^alpha_sigma: ||sigma(u)||_alpha <= L (1 + ||u||_alpha)
    double omega = 0.0;
    Regime regime = Regime::global_lipschitz;
    double alpha = 0.0;                 ///< index at which the X_alpha constants are declared
    bool alpha_uniform = true;          ///< constants hold for every alpha in [0, 1)
};

struct VectorField {
    FieldKind kind = FieldKind::zero;
    std::string name;
    std::function<ScaleElement(const ScaleElement&)> eval;
    std::function<ScaleElement(const ScaleElement&, const ScaleElement&)> derivative;  ///< (u, h) -> sigma'(u) h
    FieldMetadata metadata;

    ScaleElement operator()(const ScaleElement& u) const { return eval(u); }
    bool has_derivative() const { return static_cast<bool>(derivative); }
    /// sigma(0) = 0, so that psi = 0 is a stationary solution.
    bool vanishes_at_zero(const SemigroupScale& model) const { return model.norm(0.0, eval(model.zero())) == 0.0; }
};

namespace fields {

inline VectorField zero(const SemigroupScale& model) {
    const ModelTag tag = model.tag();
    VectorField f;
    f.kind = FieldKind::zero;
    f.name = "zero";
    f.eval = [tag](const ScaleElement&) { return ScaleElement::zero(tag); };
    f.derivative = [tag](const ScaleElement&, const ScaleElement&) { return ScaleElement::zero(tag); };
    f.metadata = {0.0, 0.0, 0.0, 0.0, Regime::global_lipschitz, 0.0, true};
    return f;
}

/// sigma(u) = c; growth constant ||c||_alpha declared at `alpha`.
inline VectorField constant(const SemigroupScale& model, ScaleElement c, double alpha = 0.0) {
    model.check_member(c);
    const ModelTag tag = model.tag();
    VectorField f;
    f.kind = FieldKind::constant;
    f.name = "constant";
    f.metadata = {0.0, 0.0, model.norm(alpha, c), 0.0, Regime::global_lipschitz, alpha, false};
    f.eval = [c = std::move(c)](const ScaleElement&) { return c; };
    f.derivative = [tag](const ScaleElement&, const ScaleElement&) { return ScaleElement::zero(tag); };
    return f;
}

/// sigma(u) = kappa u.
inline VectorField linear(const SemigroupScale& model, double kappa) {
    (void)model;
    VectorField f;
    f.kind = FieldKind::linear;
    f.name = "linear";
    const double a = std::abs(kappa);
    f.metadata = {a, a, a, 0.0, Regime::global_lipschitz, 0.0, true};
    f.eval = [kappa](const ScaleElement& u) { return kappa * u; };
    f.derivative = [kappa](const ScaleElement&, const ScaleElement& h) { return kappa * h; };
    return f;
}

/// sigma(u) = sigma_hat o u on the spectral model; grid_size = 0 selects 4N.
/// Only X -> X constants are declared: Lip_sigma = sup |sigma_hat'|, omega = 1.
inline VectorField nemytskii(const SemigroupScale& model, ScalarMap sigma_hat, std::size_t grid_size = 0) {
    if (model.tag().kind != ModelKind::spectral) throw ConfigError("Nemytskii fields require the spectral model");
    const std::size_t n = model.dimension();
    auto tr = std::make_shared<const SineTransform>(n, grid_size == 0 ? 4 * n : grid_size);
    auto map = std::make_shared<const ScalarMap>(std::move(sigma_hat));
    VectorField f;
    f.kind = FieldKind::nemytskii;
    f.name = "nemytskii:" + map->name;
    f.metadata.lip = map->sup_df;
    f.metadata.omega = 1.0;
    f.metadata.regime = Regime::derivative_locally_lipschitz;
    f.metadata.alpha_uniform = false;
    f.eval = [tr, map](const ScaleElement& u) { return nemytskii_apply(*map, u, *tr); };
    f.derivative = [tr, map](const ScaleElement& u, const ScaleElement& h) {
        const Vector uv = tr->synthesize(u.coefficients());
        Vector hv = tr->synthesize(h.coefficients());
        for (Eigen::Index j = 0; j < hv.size(); ++j) hv[j] *= map->df(uv[j]);
        return ScaleElement(h.tag(), tr->analyze(hv));
    };
    return f;
}

} // namespace fields

struct MetadataViolation {
    std::string inequality;
    double lhs = 0.0;
    double rhs = 0.0;
    ScaleElement u;
    ScaleElement v;
};

struct MetadataReport {
    std::size_t samples = 0;
    double worst_lip_ratio = 0.0;         ///< sup ||s(u)-s(v)||_0 / ||u-v||_0
    double worst_lip_alpha_ratio = 0.0;   ///< sup ||s(u)-s(v)||_a / ||u-v||_a
    double worst_growth_ratio = 0.0;      ///< sup ||s(u)||_a / (1 + ||u||_a)
    std::vector<MetadataViolation> violations;
    bool passed() const { return violations.empty(); }
};

/// Random element with coefficients N(0,1) amp / k, amplitude log-uniform in [1e-2, 1e1].
inline ScaleElement random_element(const SemigroupScale& model, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> la(std::log(1e-2), std::log(1e1));
    const double amp = std::exp(la(rng));
    ScaleElement u = model.zero();
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = amp * g(rng) / static_cast<double>(k + 1);
    return u;
}

/// Samples random pairs and checks every populated inequality of the metadata.
inline MetadataReport field_metadata_check(const VectorField& field, const SemigroupScale& model, std::size_t sample_count,
                                           std::mt19937_64& rng, double rel_slack = 1e-9) {
    const FieldMetadata& md = field.metadata;
    const double a = md.alpha;
    MetadataReport rep;
    rep.samples = sample_count;
    auto record = [&](const char* what, double lhs, double rhs, const ScaleElement& u, const ScaleElement& v) {
        if (lhs > rhs * (1.0 + rel_slack) + 1e-300) rep.violations.push_back({what, lhs, rhs, u, v});
    };
    for (std::size_t n = 0; n < sample_count; ++n) {
        const ScaleElement u = random_element(model, rng);
        ScaleElement v = random_element(model, rng);
        if (n % 2 == 1) v = u + 1e-3 * v;  // nearby pairs probe the local slope
        const ScaleElement su = field(u), sv = field(v);
        const double d0 = model.norm(0.0, u - v), s0 = model.norm(0.0, su - sv);
        if (d0 > 0.0) rep.worst_lip_ratio = std::max(rep.worst_lip_ratio, s0 / d0);
        if (md.lip) record("||sigma(u)-sigma(v)||_X <= Lip_sigma ||u-v||_X", s0, *md.lip * d0, u, v);
        if (md.lip_alpha) {
            const double da = model.norm(a, u - v), sa = model.norm(a, su - sv);
            if (da > 0.0) rep.worst_lip_alpha_ratio = std::max(rep.worst_lip_alpha_ratio, sa / da);
            record("||sigma(u)-sigma(v)||_alpha <= Lip^alpha_sigma ||u-v||_alpha", sa, *md.lip_alpha * da, u, v);
        }
        if (md.growth_alpha) {
            const double g = model.norm(a, su), r = 1.0 + model.norm(a, u);
            rep.worst_growth_ratio = std::max(rep.worst_growth_ratio, g / r);
            record("||sigma(u)||_alpha <= L^alpha_sigma (1 + ||u||_alpha)", g, *md.growth_alpha * r, u, u);
        }
    }
    return rep;
}

/// ||sigma(u + h_j) - sigma(u) - sigma'(u) h_j||_0 / ||h_j||_0 for h_j = h 2^-j, j = 0..halvings.
inline std::vector<double> derivative_remainder_ratios(const VectorField& field, const SemigroupScale& model, const ScaleElement& u,
                                                       const ScaleElement& h, int halvings = 4) {
    if (!field.has_derivative()) throw UsageError("field '" + field.name + "' provides no derivative action");
    std::vector<double> out;
    const ScaleElement su = field(u);
    for (int j = 0; j <= halvings; ++j) {
        const ScaleElement hj = std::ldexp(1.0, -j) * h;
        const ScaleElement rem = field(u + hj) - su - field.derivative(u, hj);
        out.push_back(model.norm(0.0, rem) / model.norm(0.0, hj));
    }
    return out;
}

} // namespace sewconv
