#pragma once

// Shared vocabulary for the sewconv library: error types, the coefficient
// vector type, and deterministic pairwise summation.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sewconv {

inline constexpr const char* kVersion = "1.0.0";

/// Argument outside the mathematical domain of an operation (negative time,
/// unordered simplex arguments, exponent out of range, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Misuse of the API, e.g. mixing elements of two different scale models.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid configuration. The message names the violated inequality.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Vector = Eigen::VectorXd;

enum class ModelKind { spectral, diagonal, identity };

inline const char* to_string(ModelKind k) {
    switch (k) {
    case ModelKind::spectral: return "spectral";
    case ModelKind::diagonal: return "diagonal";
    case ModelKind::identity: return "identity";
    }
    return "?";
}

/// Identifies the scale model owning an element.
struct ModelTag {
    ModelKind kind = ModelKind::identity;
    std::size_t dimension = 0;

    friend bool operator==(const ModelTag&, const ModelTag&) = default;
};

/// An element of X, stored as coefficients in the model basis.
class ScaleElement {
public:
    ScaleElement() = default;
    ScaleElement(ModelTag tag, Vector coefficients) : tag_(tag), c_(std::move(coefficients)) {
        if (static_cast<std::size_t>(c_.size()) != tag_.dimension)
            throw UsageError("ScaleElement: coefficient length " + std::to_string(c_.size()) +
                             " does not match model dimension " + std::to_string(tag_.dimension));
    }

    static ScaleElement zero(ModelTag tag) { return {tag, Vector::Zero(static_cast<Eigen::Index>(tag.dimension))}; }

    const ModelTag& tag() const { return tag_; }
    std::size_t size() const { return static_cast<std::size_t>(c_.size()); }
    const Vector& coefficients() const { return c_; }
    Vector& coefficients() { return c_; }
    double operator[](std::size_t k) const { return c_[static_cast<Eigen::Index>(k)]; }
    double& operator[](std::size_t k) { return c_[static_cast<Eigen::Index>(k)]; }

    bool all_finite() const { return c_.allFinite(); }

    ScaleElement& operator+=(const ScaleElement& o) {
        check_same(o);
        c_ += o.c_;
        return *this;
    }
    ScaleElement& operator-=(const ScaleElement& o) {
        check_same(o);
        c_ -= o.c_;
        return *this;
    }
    ScaleElement& operator*=(double a) {
        c_ *= a;
        return *this;
    }

    friend ScaleElement operator+(ScaleElement a, const ScaleElement& b) { return a += b; }
    friend ScaleElement operator-(ScaleElement a, const ScaleElement& b) { return a -= b; }
    friend ScaleElement operator-(ScaleElement a) {
        a.c_ = -a.c_;
        return a;
    }
    friend ScaleElement operator*(double s, ScaleElement a) { return a *= s; }
    friend ScaleElement operator*(ScaleElement a, double s) { return a *= s; }

    void check_same(const ScaleElement& o) const {
        if (!(tag_ == o.tag_))
            throw UsageError(std::string("ScaleElement: model mismatch (") + to_string(tag_.kind) + "/" +
                             std::to_string(tag_.dimension) + " vs " + to_string(o.tag_.kind) + "/" +
                             std::to_string(o.tag_.dimension) + ")");
    }

private:
    ModelTag tag_{};
    Vector c_{};
};

namespace detail {
inline constexpr std::size_t kPairwiseBlock = 16;

template <class T, class Term>
T pairwise_range(std::size_t lo, std::size_t hi, const Term& term) {
    if (hi - lo <= kPairwiseBlock) {
        T acc = term(lo);
        for (std::size_t i = lo + 1; i < hi; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    T left = pairwise_range<T>(lo, mid, term);
    left += pairwise_range<T>(mid, hi, term);
    return left;
}
} // namespace detail

/// Sum term(0) + ... + term(n-1) with a fixed left-to-right pairwise tree.
/// Returns `zero` when n == 0.
template <class T, class Term>
T pairwise_sum(std::size_t n, const Term& term, T zero) {
    if (n == 0) return zero;
    return detail::pairwise_range<T>(0, n, term);
}

inline double pairwise_sum(const double* data, std::size_t n) {
    return pairwise_sum<double>(n, [data](std::size_t i) { return data[i]; }, 0.0);
}

/// `x` is an exact dyadic multiple of 2^-level.
inline bool is_dyadic(double x, int level) {
    const double scaled = std::ldexp(x, level);
    return std::isfinite(scaled) && scaled == std::floor(scaled);
}

} // namespace sewconv
