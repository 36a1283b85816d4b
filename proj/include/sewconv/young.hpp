#pragma once

// Young integrals int_s^t y dx: the identity-model specialization of the
// convolution integral. Integrands may blow up at the left endpoint.

#include "sewconv/core.hpp"
#include "sewconv/paths.hpp"
#include "sewconv/scale.hpp"
#include "sewconv/sewing.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace sewconv {

struct YoungSpec {
    double rho = 1.0;     ///< Hoelder exponent of the integrand increments
    double gamma = 0.0;   ///< singularity order at the left endpoint
    double eta = kNaN;    ///< NaN takes the driver's nominal exponent
    bool singular = false;
    int max_level = 14;
    int min_level = 2;
    double tol = 1e-9;
    bool stop_early = true;

    void validate(double driver_eta) const {
        const double e = std::isnan(eta) ? driver_eta : eta;
        if (!(rho + e > 1.0))
            throw ConfigError("Young integral requires rho + eta > 1 (got rho + eta = " + std::to_string(rho + e) + ")");
        if (singular && !(gamma > 0.0 && gamma < e))
            throw ConfigError("singular Young integral requires gamma in (0, eta) (got gamma = " + std::to_string(gamma) + ")");
    }

    SewingConfig sewing(double driver_eta) const {
        SewingConfig c;
        c.max_level = max_level;
        c.min_level = min_level;
        c.tol = tol;
        c.stop_early = stop_early;
        c.eta = std::isnan(eta) ? driver_eta : eta;
        c.rho = rho;
        c.singular = singular;
        c.gamma = gamma;
        return c;
    }
};

struct YoungResult {
    Vector value;
    std::vector<double> level_deltas;
    bool converged = false;
    int levels_used = 0;

    double scalar() const { return value[0]; }
};

/// Vector-valued integrand y: [s,t] -> R^d.
inline YoungResult young_integral(const std::function<Vector(double)>& y, std::size_t dim, const HolderPath& x, double s, double t,
                                  const YoungSpec& spec) {
    spec.validate(x.nominal_exponent());
    const IdentityModel model(dim);
    SimplexFn1 phi = [&](double r) { return model.element(y(r)); };
    const SewingConfig cfg = spec.sewing(x.nominal_exponent());
    SewingResult r = spec.singular ? singular_convolution_integral(model, phi, x, s, t, cfg)
                                   : convolution_integral(model, phi, x, s, t, cfg);
    return {r.value.coefficients(), std::move(r.level_deltas), r.converged, r.levels_used};
}

inline YoungResult young_integral(const std::function<double(double)>& y, const HolderPath& x, double s, double t,
                                  const YoungSpec& spec) {
    return young_integral([&](double r) { return Vector::Constant(1, y(r)); }, 1, x, s, t, spec);
}

struct SingularOrderReport {
    double alpha = 0.0;
    double sup = 0.0;          ///< sup s^{2 alpha} |f(t) - f(s)| / (t - s)^alpha
    std::size_t pairs = 0;
    double witness_s = kNaN;
    double witness_t = kNaN;
    bool passed() const { return sup <= 1.0 + 1e-9; }
};

/// Empirical membership of f in the singular Hoelder class of order (alpha, -2 alpha)
/// on (0,1], over all pairs of grid points i 2^-level, i >= 1.
inline SingularOrderReport singular_order_check(const std::function<double(double)>& f, double alpha, int level) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("singular_order_check requires alpha in (0, 1)");
    if (level < 0 || level > 16) throw DomainError("singular_order_check level must be in [0, 16]");
    const std::size_t n = std::size_t{1} << level;
    std::vector<double> fv(n + 1), wv(n + 1), lag(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        const double r = std::ldexp(static_cast<double>(i), -level);
        fv[i] = f(r);
        wv[i] = std::pow(r, 2.0 * alpha);
        lag[i] = std::pow(r, alpha);
    }
    SingularOrderReport rep;
    rep.alpha = alpha;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = i + 1; j <= n; ++j) {
            const double v = wv[i] * std::abs(fv[j] - fv[i]) / lag[j - i];
            ++rep.pairs;
            if (v > rep.sup) {
                rep.sup = v;
                rep.witness_s = std::ldexp(static_cast<double>(i), -level);
                rep.witness_t = std::ldexp(static_cast<double>(j), -level);
            }
        }
    return rep;
}

} // namespace sewconv
