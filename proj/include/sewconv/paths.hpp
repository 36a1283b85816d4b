#pragma once

// Hoelder driver paths sampled on the uniform dyadic grid t_i = i 2^-m.

#include "sewconv/core.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sewconv {

inline constexpr const char* kRngName = "mt19937_64+seed_seq(seed,stream)";

/// Seeded generator; `stream` splits independent substreams off one seed.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5e3cu};
    return std::mt19937_64(seq);
}

struct PathInfo {
    std::string kind;                       ///< power | weierstrass | fbm | sine | linear | csv
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, double>> parameters;
    std::string generator;                  ///< PRNG identity for stochastic paths
};

/// Real-valued driver x sampled at t_i = i 2^-m, i = 0..2^m.
class HolderPath {
public:
    HolderPath(std::vector<double> values, int level, double nominal_exponent, PathInfo info = {},
               std::function<double(double)> derivative = {})
        : values_(std::move(values)), level_(level), eta_(nominal_exponent), info_(std::move(info)),
          derivative_(std::move(derivative)) {
        if (level_ < 0 || level_ > 30) throw DomainError("path level must be in [0, 30]");
        if (values_.size() != (std::size_t{1} << level_) + 1)
            throw DomainError("path must hold 2^m + 1 samples, got " + std::to_string(values_.size()));
        if (!(eta_ > 0.0 && eta_ <= 1.0)) throw DomainError("nominal Hoelder exponent must be in (0, 1]");
        for (double v : values_)
            if (!std::isfinite(v)) throw DomainError("path samples must be finite");
    }

    int level() const { return level_; }
    std::size_t size() const { return values_.size(); }
    std::size_t steps() const { return values_.size() - 1; }
    double step() const { return std::ldexp(1.0, -level_); }
    double nominal_exponent() const { return eta_; }
    const PathInfo& info() const { return info_; }
    const std::vector<double>& values() const { return values_; }

    double time(std::size_t i) const { return std::ldexp(static_cast<double>(i), -level_); }
    double at_index(std::size_t i) const { return values_.at(i); }

    /// x(t) for a grid point t of level <= m; any other t is rejected.
    double at(double t) const {
        if (!(t >= 0.0 && t <= 1.0) || !is_dyadic(t, level_))
            throw DomainError("path of level " + std::to_string(level_) + " cannot be evaluated at t = " + std::to_string(t) +
                              " (not a grid point)");
        return values_[static_cast<std::size_t>(std::ldexp(t, level_))];
    }

    /// Analytic derivative for drivers from the C^1 catalog.
    bool has_derivative() const { return static_cast<bool>(derivative_); }
    double derivative(double t) const {
        if (!derivative_) throw UsageError("path '" + info_.kind + "' has no analytic derivative (rough driver)");
        return derivative_(t);
    }
    const std::function<double(double)>& derivative_fn() const { return derivative_; }

private:
    std::vector<double> values_;
    int level_;
    double eta_;
    PathInfo info_;
    std::function<double(double)> derivative_;
};

namespace detail {
inline void check_level(int m) {
    if (m < 1 || m > 24) throw DomainError("path level must be in [1, 24], got " + std::to_string(m));
}
} // namespace detail

/// x(t) = t^eta.
inline HolderPath make_power_path(double eta, int m) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("power path exponent must be in (0, 1], got " + std::to_string(eta));
    detail::check_level(m);
    const std::size_t n = std::size_t{1} << m;
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = std::pow(std::ldexp(static_cast<double>(i), -m), eta);
    std::function<double(double)> dx;
    if (eta == 1.0) dx = [](double) { return 1.0; };
    return {std::move(v), m, eta, PathInfo{"power", std::nullopt, {{"eta", eta}}, ""}, std::move(dx)};
}

/// x(t) = sin(2 pi f t), a C^1 driver with known derivative.
inline HolderPath make_sine_path(double frequency, int m) {
    detail::check_level(m);
    const std::size_t n = std::size_t{1} << m;
    std::vector<double> v(n + 1);
    const double w = 2.0 * std::numbers::pi * frequency;
    for (std::size_t i = 0; i <= n; ++i) v[i] = std::sin(w * std::ldexp(static_cast<double>(i), -m));
    return {std::move(v), m, 1.0, PathInfo{"sine", std::nullopt, {{"frequency", frequency}}, ""},
            [w](double t) { return w * std::cos(w * t); }};
}

/// Number of Weierstrass terms needed for a^terms < 1e-14.
inline int weierstrass_terms(double a) { return static_cast<int>(std::ceil(std::log(1e-14) / std::log(a))) + 1; }

/// x(t) = sum_{k<terms} a^k cos(b^k pi t); nominal exponent -ln a / ln b.
/// terms <= 0 selects weierstrass_terms(a).
inline HolderPath make_weierstrass_path(double a, int b, int m, int terms = 0) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("Weierstrass amplitude a must be in (0,1)");
    if (b < 2) throw ConfigError("Weierstrass frequency base b must be an integer >= 2");
    if (!(a * b > 1.0)) throw ConfigError("Weierstrass path requires a*b > 1 (roughness regime)");
    detail::check_level(m);
    if (terms <= 0) terms = weierstrass_terms(a);
    const double eta = std::min(1.0, -std::log(a) / std::log(static_cast<double>(b)));
    const std::size_t n = std::size_t{1} << m;
    std::vector<double> v(n + 1);
    std::vector<double> terms_k(static_cast<std::size_t>(terms));
    for (std::size_t i = 0; i <= n; ++i) {
        // b^k t mod 2 is tracked exactly: t is dyadic and b an integer.
        double q = std::fmod(std::ldexp(static_cast<double>(i), -m), 2.0);
        double amp = 1.0;
        for (int k = 0; k < terms; ++k) {
            terms_k[static_cast<std::size_t>(k)] = amp * std::cos(std::numbers::pi * q);
            q = std::fmod(q * b, 2.0);
            amp *= a;
        }
        v[i] = pairwise_sum(terms_k.data(), terms_k.size());
    }
    return {std::move(v), m, eta,
            PathInfo{"weierstrass", std::nullopt, {{"a", a}, {"b", static_cast<double>(b)}, {"terms", static_cast<double>(terms)}}, ""}};
}

inline constexpr double kFbmExponentMargin = 0.05;

/// Fractional Brownian motion with Hurst index H by circulant embedding of
/// the fractional Gaussian noise covariance. Nominal exponent H - margin.
inline HolderPath make_fbm_path(double hurst, int m, std::uint64_t seed, double margin = kFbmExponentMargin) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fBm Hurst index must be in (0,1)");
    detail::check_level(m);
    if (!(margin >= 0.0 && margin < hurst)) throw DomainError("fBm exponent margin must be in [0, H)");
    const std::size_t n = std::size_t{1} << m;
    const std::size_t len = 2 * n;
    const double two_h = 2.0 * hurst;
    auto gamma = [two_h](double k) {
        return 0.5 * (std::pow(std::abs(k + 1.0), two_h) - 2.0 * std::pow(std::abs(k), two_h) + std::pow(std::abs(k - 1.0), two_h));
    };

    fftw_complex* buf = fftw_alloc_complex(len);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(len), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t j = 0; j < len; ++j) {
        const std::size_t k = j <= n ? j : len - j;
        buf[j][0] = gamma(static_cast<double>(k));
        buf[j][1] = 0.0;
    }
    fftw_execute(plan);
    std::vector<double> eig(len);
    double scale = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
        eig[j] = buf[j][0];
        scale = std::max(scale, std::abs(eig[j]));
    }
    for (std::size_t j = 0; j < len; ++j) {
        if (eig[j] < -1e-10 * scale) {
            fftw_destroy_plan(plan);
            fftw_free(buf);
            throw DomainError("circulant embedding not positive definite for H = " + std::to_string(hurst) +
                              ", m = " + std::to_string(m));
        }
        eig[j] = std::max(eig[j], 0.0);
    }

    auto rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t j = 0; j < len; ++j) {
        const double s = std::sqrt(eig[j] / static_cast<double>(len));
        buf[j][0] = s * normal(rng);
        buf[j][1] = s * normal(rng);
    }
    fftw_execute(plan);

    const double h_scale = std::pow(std::ldexp(1.0, -m), hurst);
    std::vector<double> v(n + 1);
    v[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) v[i] = v[i - 1] + h_scale * buf[i - 1][0];
    fftw_destroy_plan(plan);
    fftw_free(buf);
    return {std::move(v), m, hurst - margin, PathInfo{"fbm", seed, {{"H", hurst}, {"margin", margin}}, kRngName}};
}

/// Optional index window [first, last] of grid points.
struct IndexWindow {
    std::size_t first = 0;
    std::size_t last = 0;
};

/// max over grid pairs s < t of |x(t) - x(s)| / (t - s)^eta.
/// `max_lag` > 0 restricts pairs to t - s <= max_lag grid steps.
inline double holder_seminorm(const HolderPath& path, double eta, std::optional<IndexWindow> window = std::nullopt,
                              std::size_t max_lag = 0) {
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("Hoelder exponent must be in (0, 1]");
    std::size_t first = 0, last = path.size() - 1;
    if (window) {
        if (window->first > window->last || window->last >= path.size()) throw DomainError("invalid index window");
        first = window->first;
        last = window->last;
    }
    const auto& x = path.values();
    const std::size_t span = last - first;
    const std::size_t lag_cap = max_lag == 0 ? span : std::min(span, max_lag);
    std::vector<double> inv_pow(lag_cap + 1, 0.0);
    for (std::size_t l = 1; l <= lag_cap; ++l) inv_pow[l] = std::pow(path.time(l), -eta);
    double best = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const std::size_t jmax = std::min(last, i + lag_cap);
        for (std::size_t j = i + 1; j <= jmax; ++j) best = std::max(best, std::abs(x[j] - x[i]) * inv_pow[j - i]);
    }
    return best;
}

/// Time-window overload: [s, t] must be grid points.
inline double holder_seminorm(const HolderPath& path, double eta, double s, double t) {
    if (!(s <= t) || !is_dyadic(s, path.level()) || !is_dyadic(t, path.level()) || s < 0.0 || t > 1.0)
        throw DomainError("holder_seminorm window endpoints must be ordered grid points");
    return holder_seminorm(path, eta,
                           IndexWindow{static_cast<std::size_t>(std::ldexp(s, path.level())),
                                       static_cast<std::size_t>(std::ldexp(t, path.level()))});
}

/// Formats a double with 17 significant digits.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header "t,x".
inline void write_path_csv(const HolderPath& path, std::ostream& os) {
    os << "t,x\n";
    for (std::size_t i = 0; i < path.size(); ++i) os << format_real(path.time(i)) << ',' << format_real(path.at_index(i)) << '\n';
}

inline HolderPath read_path_csv(std::istream& is, double nominal_exponent) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("path CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,x") throw ConfigError("path CSV header must be 't,x'");
    std::vector<double> ts, xs;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("malformed path CSV row: " + line);
        ts.push_back(std::stod(line.substr(0, comma)));
        xs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 3) throw ConfigError("path CSV needs at least 3 rows");
    const std::size_t n = xs.size() - 1;
    if ((n & (n - 1)) != 0) throw ConfigError("path CSV must hold 2^m + 1 rows");
    int m = 0;
    while ((std::size_t{1} << m) < n) ++m;
    for (std::size_t i = 0; i <= n; ++i)
        if (std::abs(ts[i] - std::ldexp(static_cast<double>(i), -m)) > 1e-15)
            throw ConfigError("path CSV times must be the uniform dyadic grid i/2^m");
    return {std::move(xs), m, nominal_exponent, PathInfo{"csv", std::nullopt, {}, ""}};
}

} // namespace sewconv
