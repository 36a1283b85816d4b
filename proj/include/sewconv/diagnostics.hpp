#pragma once

// Least-squares rate fits and pass/fail exponent records.

#include "sewconv/core.hpp"

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sewconv {

struct RateFit {
    std::vector<std::pair<double, double>> samples;  ///< (scale parameter, value)
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / n);
    return f;
}

/// Slope of log v against log s.
inline RateFit fit_rate(std::vector<std::pair<double, double>> pairs) {
    if (pairs.size() < 4) throw DomainError("fit_rate needs at least 4 samples, got " + std::to_string(pairs.size()));
    std::vector<double> ls, lv;
    RateFit fit;
    fit.window_lo = pairs.front().first;
    fit.window_hi = pairs.front().first;
    for (const auto& [s, v] : pairs) {
        if (!(s > 0.0) || !(v > 0.0) || !std::isfinite(s) || !std::isfinite(v))
            throw DomainError("fit_rate: nonpositive sample (" + std::to_string(s) + ", " + std::to_string(v) + ")");
        ls.push_back(std::log(s));
        lv.push_back(std::log(v));
        fit.window_lo = std::min(fit.window_lo, s);
        fit.window_hi = std::max(fit.window_hi, s);
    }
    const LineFit lf = fit_line(ls, lv);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual_rms = lf.residual_rms;
    fit.samples = std::move(pairs);
    return fit;
}

inline constexpr std::size_t kPreasymptoticLevels = 2;

/// Slope of log2(delta_n) against n for n in [first, last] (inclusive).
/// By default the two coarsest levels are excluded.
inline RateFit fit_level_decay(std::span<const double> deltas, std::size_t first = kPreasymptoticLevels,
                               std::size_t last = static_cast<std::size_t>(-1)) {
    if (last >= deltas.size()) last = deltas.size() - 1;
    if (deltas.empty() || first > last || last - first + 1 < 4) throw DomainError("fit_level_decay needs at least 4 levels in the window");
    std::vector<double> n, l;
    RateFit fit;
    for (std::size_t k = first; k <= last; ++k) {
        if (!(deltas[k] > 0.0) || !std::isfinite(deltas[k]))
            throw DomainError("fit_level_decay: nonpositive level delta at n = " + std::to_string(k));
        n.push_back(static_cast<double>(k));
        l.push_back(std::log2(deltas[k]));
        fit.samples.emplace_back(static_cast<double>(k), deltas[k]);
    }
    const LineFit lf = fit_line(n, l);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual_rms = lf.residual_rms;
    fit.window_lo = static_cast<double>(first);
    fit.window_hi = static_cast<double>(last);
    return fit;
}

struct ExponentReport {
    std::string name;
    double expected = 0.0;
    double fitted = 0.0;
    double tolerance = 0.0;
    double delta = 0.0;
    bool passed = false;
};

inline ExponentReport exponent_report(std::string name, double fitted, double expected, double tolerance) {
    ExponentReport r{std::move(name), expected, fitted, tolerance, std::abs(fitted - expected), false};
    r.passed = std::isfinite(fitted) && r.delta <= tolerance;
    return r;
}

/// Fits the log-log slope of `results` and compares it with `expected`.
inline ExponentReport exponent_report(std::string name, const std::vector<std::pair<double, double>>& results, double expected,
                                      double tolerance) {
    if (results.empty()) throw DomainError("exponent_report: no experiment results");
    return exponent_report(std::move(name), fit_rate(results).slope, expected, tolerance);
}

} // namespace sewconv
