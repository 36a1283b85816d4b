#pragma once

// Increment operators on functions of ordered time arguments a <= t1 <= ... <= tn <= b.
//
//   hat_delta_n : semigroup-twisted coboundary
//   delta_S_n   : increment whose image/kernel chain drives the singular sewing
//   S_wrap_n    : (S_1 f)(t) = S(t-a) f(t), (S_n f)(t1..tn) = S(tn - t(n-1)) f(t1..tn)
//
// Returned callables hold a reference to the model; the model must outlive them.

#include "sewconv/core.hpp"
#include "sewconv/scale.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace sewconv {

using SimplexFn1 = std::function<ScaleElement(double)>;
using SimplexFn2 = std::function<ScaleElement(double, double)>;
using SimplexFn3 = std::function<ScaleElement(double, double, double)>;
using SimplexFn4 = std::function<ScaleElement(double, double, double, double)>;

namespace detail {
template <std::size_t N>
void check_ordered(const char* op, const std::array<double, N>& t) {
    for (std::size_t i = 1; i < N; ++i)
        if (!(t[i - 1] <= t[i])) throw DomainError(std::string(op) + ": time arguments must be ordered");
}
} // namespace detail

/// (S(t-s) - Id) u.
inline ScaleElement frak_a(const SemigroupScale& model, double s, double t, const ScaleElement& u) {
    if (!(s <= t)) throw DomainError("frak_a requires s <= t");
    return model.apply(t - s, u) - u;
}

/// (hat_delta_1 f)(s,t) = f(t) - S(t-s) f(s).
inline SimplexFn2 hat_delta1(const SemigroupScale& model, SimplexFn1 f) {
    return [&model, f = std::move(f)](double s, double t) {
        detail::check_ordered<2>("hat_delta1", {s, t});
        return f(t) - model.apply(t - s, f(s));
    };
}

/// (hat_delta_2 f)(r,s,t) = f(r,t) - f(s,t) - S(t-s) f(r,s).
inline SimplexFn3 hat_delta2(const SemigroupScale& model, SimplexFn2 f) {
    return [&model, f = std::move(f)](double r, double s, double t) {
        detail::check_ordered<3>("hat_delta2", {r, s, t});
        return f(r, t) - f(s, t) - model.apply(t - s, f(r, s));
    };
}

/// (delta_S1 f)(t1,t2) = S(t1-a)(f(t2) - f(t1)).
inline SimplexFn2 delta_S1(const SemigroupScale& model, SimplexFn1 f, double a) {
    return [&model, f = std::move(f), a](double t1, double t2) {
        detail::check_ordered<3>("delta_S1", {a, t1, t2});
        return model.apply(t1 - a, f(t2) - f(t1));
    };
}

/// (delta_S2 g)(r,s,t) = -g(s,t) + S(s-r) g(r,t) - S(s-r) g(r,s).
/// `flip_sign` negates the first term; it exists only as a mutation hook for
/// the identity suite.
inline SimplexFn3 delta_S2(const SemigroupScale& model, SimplexFn2 g, bool flip_sign = false) {
    return [&model, g = std::move(g), flip_sign](double r, double s, double t) {
        detail::check_ordered<3>("delta_S2", {r, s, t});
        ScaleElement first = g(s, t);
        if (!flip_sign) first = -first;
        return first + model.apply(s - r, g(r, t) - g(r, s));
    };
}

/// (delta_S3 f)(t1,t2,t3,t4) = f(t2,t3,t4) - f(t1,t3,t4) + S(t3-t2)[f(t1,t2,t4) - f(t1,t2,t3)].
inline SimplexFn4 delta_S3(const SemigroupScale& model, SimplexFn3 f) {
    return [&model, f = std::move(f)](double t1, double t2, double t3, double t4) {
        detail::check_ordered<4>("delta_S3", {t1, t2, t3, t4});
        return f(t2, t3, t4) - f(t1, t3, t4) + model.apply(t3 - t2, f(t1, t2, t4) - f(t1, t2, t3));
    };
}

inline SimplexFn1 S_wrap1(const SemigroupScale& model, SimplexFn1 f, double a) {
    return [&model, f = std::move(f), a](double t) {
        detail::check_ordered<2>("S_wrap1", {a, t});
        return model.apply(t - a, f(t));
    };
}

inline SimplexFn2 S_wrap2(const SemigroupScale& model, SimplexFn2 f) {
    return [&model, f = std::move(f)](double t1, double t2) {
        detail::check_ordered<2>("S_wrap2", {t1, t2});
        return model.apply(t2 - t1, f(t1, t2));
    };
}

inline SimplexFn3 S_wrap3(const SemigroupScale& model, SimplexFn3 f) {
    return [&model, f = std::move(f)](double t1, double t2, double t3) {
        detail::check_ordered<3>("S_wrap3", {t1, t2, t3});
        return model.apply(t3 - t2, f(t1, t2, t3));
    };
}

/// sup over dyadic grid pairs a < s < t <= b (level `level`) of
/// (s-a)^gamma ||f(s,t)||_alpha / (t-s)^beta.
inline double simplex_holder_estimate(const SemigroupScale& model, const SimplexFn2& f, double alpha, double beta,
                                      double gamma, double a, double b, int level) {
    if (!(a < b)) throw DomainError("simplex_holder_estimate requires a < b");
    const std::size_t n = std::size_t{1} << level;
    const double h = (b - a) / static_cast<double>(n);
    double best = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double s = a + static_cast<double>(i) * h;
        for (std::size_t j = i + 1; j <= n; ++j) {
            const double t = a + static_cast<double>(j) * h;
            best = std::max(best, std::pow(s - a, gamma) * model.norm(alpha, f(s, t)) / std::pow(t - s, beta));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Identity suite: the cochain and commutation identities evaluated on random
// ordered tuples.

/// Smooth random function of k ordered arguments; coefficient vectors are
/// Gaussian, time dependence is a sum of a few sinusoids.
class RandomSimplexFunction {
public:
    RandomSimplexFunction(const SemigroupScale& model, std::size_t arity, std::mt19937_64& rng, std::size_t terms = 3)
        : tag_(model.tag()), arity_(arity) {
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        for (std::size_t j = 0; j < terms; ++j) {
            Term term;
            term.v = Vector(static_cast<Eigen::Index>(tag_.dimension));
            for (Eigen::Index k = 0; k < term.v.size(); ++k) term.v[k] = normal(rng);
            for (std::size_t a = 0; a < arity_; ++a) term.freq.push_back(unif(rng));
            term.phase = unif(rng);
            terms_.push_back(std::move(term));
        }
    }

    ScaleElement operator()(std::initializer_list<double> args) const {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(tag_.dimension));
        for (const auto& term : terms_) {
            double arg = term.phase;
            std::size_t a = 0;
            for (double t : args) arg += term.freq[a++] * t;
            out += std::sin(arg) * term.v;
        }
        return {tag_, std::move(out)};
    }

    SimplexFn1 as1() const {
        return [self = *this](double t) { return self({t}); };
    }
    SimplexFn2 as2() const {
        return [self = *this](double s, double t) { return self({s, t}); };
    }
    SimplexFn3 as3() const {
        return [self = *this](double r, double s, double t) { return self({r, s, t}); };
    }

private:
    struct Term {
        Vector v;
        std::vector<double> freq;
        double phase = 0.0;
    };
    ModelTag tag_;
    std::size_t arity_;
    std::vector<Term> terms_;
};

struct IdentityCheck {
    std::string name;
    double max_violation = 0.0;  ///< max relative violation over samples
    std::size_t samples = 0;
    bool passed = false;
};

struct IdentitySuiteOptions {
    std::size_t samples = 200;
    double tolerance = 1e-10;
    double a = 0.0;
    double b = 1.0;
    bool flip_delta_S2_sign = false;  ///< mutation hook: must make the suite fail
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
    }
};

namespace detail {
template <std::size_t N>
std::array<double, N> ordered_tuple(std::mt19937_64& rng, double a, double b) {
    std::uniform_real_distribution<double> u(a, b);
    std::array<double, N> t{};
    for (auto& v : t) v = u(rng);
    std::sort(t.begin(), t.end());
    return t;
}

inline double relative(const SemigroupScale& model, const ScaleElement& residual, double scale) {
    return model.norm(0.0, residual) / std::max(scale, 1e-300);
}
} // namespace detail

/// Runs delta_hat_2 o delta_hat_1 = 0, delta_S3 o delta_S2 = 0 and
/// hat_delta_n S_n = S_(n+1) delta_S_n (n = 1, 2) on random ordered tuples.
/// Violations are measured in X relative to the largest input value involved.
inline IdentityReport run_identity_suite(const SemigroupScale& model, std::mt19937_64& rng, const IdentitySuiteOptions& opt = {}) {
    IdentityReport report;
    const double a = opt.a, b = opt.b;
    auto norm0 = [&](const ScaleElement& u) { return model.norm(0.0, u); };

    IdentityCheck c1{"hat_delta2 . hat_delta1 = 0"}, c2{"delta_S3 . delta_S2 = 0"};
    IdentityCheck c3{"hat_delta1 S_1 = S_2 delta_S1"}, c4{"hat_delta2 S_2 = S_3 delta_S2"};

    for (std::size_t n = 0; n < opt.samples; ++n) {
        RandomSimplexFunction f1(model, 1, rng), f2(model, 2, rng);

        {
            const auto t = detail::ordered_tuple<3>(rng, a, b);
            const auto lhs = hat_delta2(model, hat_delta1(model, f1.as1()))(t[0], t[1], t[2]);
            const double scale = std::max({norm0(f1({t[0]})), norm0(f1({t[1]})), norm0(f1({t[2]}))});
            c1.max_violation = std::max(c1.max_violation, detail::relative(model, lhs, scale));
        }
        {
            const auto t = detail::ordered_tuple<4>(rng, a, b);
            const auto lhs = delta_S3(model, delta_S2(model, f2.as2(), opt.flip_delta_S2_sign))(t[0], t[1], t[2], t[3]);
            double scale = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = i; j < 4; ++j) scale = std::max(scale, norm0(f2({t[i], t[j]})));
            c2.max_violation = std::max(c2.max_violation, detail::relative(model, lhs, scale));
        }
        {
            const auto t = detail::ordered_tuple<2>(rng, a, b);
            const auto lhs = hat_delta1(model, S_wrap1(model, f1.as1(), a))(t[0], t[1]);
            const auto rhs = S_wrap2(model, delta_S1(model, f1.as1(), a))(t[0], t[1]);
            const double scale = std::max(norm0(f1({t[0]})), norm0(f1({t[1]})));
            c3.max_violation = std::max(c3.max_violation, detail::relative(model, lhs - rhs, scale));
        }
        {
            const auto t = detail::ordered_tuple<3>(rng, a, b);
            const auto lhs = hat_delta2(model, S_wrap2(model, f2.as2()))(t[0], t[1], t[2]);
            const auto rhs = S_wrap3(model, delta_S2(model, f2.as2(), opt.flip_delta_S2_sign))(t[0], t[1], t[2]);
            double scale = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = i; j < 3; ++j) scale = std::max(scale, norm0(f2({t[i], t[j]})));
            c4.max_violation = std::max(c4.max_violation, detail::relative(model, lhs - rhs, scale));
        }
    }
    for (IdentityCheck* c : {&c1, &c2, &c3, &c4}) {
        c->samples = opt.samples;
        c->passed = c->max_violation <= opt.tolerance;
        report.checks.push_back(std::move(*c));
    }
    return report;
}

} // namespace sewconv
