#include "sewconv/diagnostics.hpp"
#include "sewconv/sewing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sewconv;

namespace {

SewingConfig smooth_cfg(int max_level, double eta = 1.0, double rho = 1.0) {
    SewingConfig c;
    c.max_level = max_level;
    c.eta = eta;
    c.rho = rho;
    c.stop_early = false;
    return c;
}

double rel(const SemigroupScale& m, const ScaleElement& a, const ScaleElement& b) {
    return m.norm(0.0, a - b) / std::max(m.norm(0.0, b), 1e-300);
}

ScaleElement decaying(const SemigroupScale& m, double power) {
    ScaleElement u = m.zero();
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::pow(static_cast<double>(k + 1), -power) * (k % 2 ? -1.0 : 1.0);
    return u;
}

} // namespace

TEST(SewingConfig, RefusesMuAtMostOne) {
    SewingConfig c;
    c.eta = 0.4;
    c.rho = 0.5;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("mu = eta + rho > 1"), std::string::npos);
    }
}

TEST(SewingConfig, SingularOrderMustBeAdmissible) {
    SewingConfig c;
    c.eta = 0.75;
    c.rho = 0.5;
    c.singular = true;
    c.gamma = 0.8;
    EXPECT_THROW(c.validate(), ConfigError);
    c.gamma = 0.5;
    EXPECT_NO_THROW(c.validate());
    c.alpha = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Sew, CoboundaryGivesZeroAtEveryLevel) {
    SpectralDirichletModel m(16);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 f = [&](double t) { return std::cos(3.0 * t) * psi + t * t * m.basis(2); };
    const SimplexFn2 g = [&](double s, double t) { return m.apply(s, f(t) - f(s)); };
    const auto r = sew(m, g, 0.125, 0.875, smooth_cfg(10));
    EXPECT_LE(m.norm(0.0, r.value), 1e-14);
    for (double d : r.level_deltas) EXPECT_LE(d, 1e-14);
    EXPECT_TRUE(r.converged);
}

TEST(Sew, DiagonalIsZero) {
    SpectralDirichletModel m(4);
    const SimplexFn2 g = [&](double, double) { return m.basis(0); };
    const auto r = sew(m, g, 0.3, 0.3, smooth_cfg(6));
    EXPECT_EQ(m.norm(0.0, r.value), 0.0);
}

TEST(Sew, MatchesClassicalOracleForSmoothDriver) {
    SpectralDirichletModel m(32);
    const auto x = make_sine_path(1.0, 13);
    const auto psi = decaying(m, 1.5);
    const SimplexFn1 phi = [&](double r) { return std::cos(r) * psi; };
    const SimplexFn2 g = [&](double s, double t) { return (x.at(t) - x.at(s)) * phi(s); };
    const double s = 0.25, t = 0.75;
    const auto M = sew(m, g, s, t, smooth_cfg(12));
    const auto k = classical_convolution(m, phi, x, s, t, 1 << 14);
    const auto expected = m.apply(t - s, g(s, t)) - k;
    EXPECT_LE(m.norm(0.0, M.value - expected), 1e-3 * m.norm(0.0, expected));
}

TEST(Sew, LevelDecayForPathIntegrand) {
    // identity model, phi = x with x Weierstrass of exponent 3/4: mu - 1 = 1/2
    IdentityModel m(1);
    const auto x = make_weierstrass_path(std::pow(2.0, -0.75), 2, 18);
    const SimplexFn2 g = [&](double s, double t) { return m.element(Vector::Constant(1, (x.at(t) - x.at(s)) * x.at(s))); };
    auto cfg = smooth_cfg(15, 0.75, 0.75);
    cfg.tol = 0.0;
    const auto r = sew(m, g, 0.0, 1.0, cfg);
    const auto fit = fit_level_decay(r.level_deltas, 6, 14);
    EXPECT_NEAR(fit.slope, -0.5, 0.15);
}

TEST(Sew, SemigroupOrbitIntegrandHasNoLevelDecay) {
    // phi(t) = S(t) psi makes hat_delta_1 phi vanish, so every M_n is zero.
    SpectralDirichletModel m(32);
    const auto x = make_power_path(0.75, 12);
    const auto psi = decaying(m, 1.0);
    const SimplexFn2 g = [&](double s, double t) { return (x.at(t) - x.at(s)) * m.apply(s, psi); };
    auto cfg = smooth_cfg(12, 0.75, 1.0);
    cfg.tol = 0.0;
    const auto r = sew(m, g, 0.0, 1.0, cfg);
    for (double d : r.level_deltas) EXPECT_LE(d, 1e-14);
    EXPECT_TRUE(std::isnan(r.fitted_decay_rate));
}

TEST(ConvolutionIntegral, ConstantDriverGivesZero) {
    SpectralDirichletModel m(8);
    const HolderPath x(std::vector<double>(65, 2.5), 6, 1.0);
    const auto psi = decaying(m, 1.0);
    const auto r = convolution_integral(m, [&](double) { return psi; }, x, 0.0, 1.0, smooth_cfg(6));
    EXPECT_EQ(m.norm(0.0, r.value), 0.0);
}

TEST(ConvolutionIntegral, IdentityModelTelescopes) {
    IdentityModel m(3);
    const auto x = make_fbm_path(0.7, 10, 5);
    const auto psi = m.element(Vector::LinSpaced(3, 1.0, 3.0));
    const auto r = convolution_integral(m, [&](double) { return psi; }, x, 0.25, 0.75, smooth_cfg(9, x.nominal_exponent()));
    EXPECT_LE(rel(m, r.value, (x.at(0.75) - x.at(0.25)) * psi), 1e-13);
}

TEST(ConvolutionIntegral, DiagonalClosedForm) {
    DiagonalMatrixModel m({-1.0});
    const auto x = make_power_path(1.0, 20);
    const auto psi = m.element(Vector::Ones(1));
    const auto r = convolution_integral(m, [&](double) { return psi; }, x, 0.0, 1.0, smooth_cfg(20));
    EXPECT_NEAR(r.value[0], 1.0 - std::exp(-1.0), 1e-6);
    EXPECT_NEAR(r.value[0], 0.6321206, 1e-6);
    EXPECT_LE(r.form_mismatch, 1e-12);
}

TEST(ConvolutionIntegral, BothFormsAgree) {
    SpectralDirichletModel m(32);
    const auto x = make_fbm_path(0.75, 14, 3);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return std::sin(2.0 * r) * psi + x.at(r) * m.basis(1); };
    const auto r = convolution_integral(m, phi, x, 0.125, 0.875, smooth_cfg(12, x.nominal_exponent(), x.nominal_exponent()));
    EXPECT_LE(r.form_mismatch, 1e-12 * (1.0 + m.norm(0.0, r.value)));
}

TEST(ConvolutionIntegral, DiagonalIsZero) {
    SpectralDirichletModel m(8);
    const auto x = make_power_path(0.75, 8);
    const auto r = convolution_integral(m, [&](double) { return m.basis(0); }, x, 0.5, 0.5, smooth_cfg(8, 0.75));
    EXPECT_EQ(m.norm(0.0, r.value), 0.0);
}

TEST(ConvolutionIntegral, InsufficientDriverResolutionNamesRequiredLevel) {
    SpectralDirichletModel m(8);
    const auto x = make_power_path(0.75, 8);
    try {
        convolution_integral(m, [&](double) { return m.basis(0); }, x, 0.0, 1.0, smooth_cfg(10, 0.75));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("10"), std::string::npos) << e.what();
    }
}

TEST(ConvolutionIntegral, Linearity) {
    SpectralDirichletModel m(16);
    const auto x1 = make_fbm_path(0.8, 11, 1), x2 = make_fbm_path(0.8, 11, 2);
    std::vector<double> sum(x1.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = 2.0 * x1.at_index(i) - 0.5 * x2.at_index(i);
    const HolderPath x12(sum, 11, x1.nominal_exponent());
    const auto p1 = decaying(m, 1.0), p2 = decaying(m, 2.0);
    const SimplexFn1 f1 = [&](double r) { return std::cos(r) * p1; }, f2 = [&](double r) { return r * p2; };
    const SimplexFn1 f12 = [&](double r) { return 3.0 * f1(r) + f2(r); };
    const auto cfg = smooth_cfg(10, x1.nominal_exponent());
    const double s = 0.25, t = 0.75;
    const auto a = convolution_integral(m, f12, x1, s, t, cfg).value;
    const auto b = 3.0 * convolution_integral(m, f1, x1, s, t, cfg).value + convolution_integral(m, f2, x1, s, t, cfg).value;
    EXPECT_LE(rel(m, a, b), 1e-12);
    const auto c = convolution_integral(m, f1, x12, s, t, cfg).value;
    const auto d = 2.0 * convolution_integral(m, f1, x1, s, t, cfg).value - 0.5 * convolution_integral(m, f1, x2, s, t, cfg).value;
    EXPECT_LE(rel(m, c, d), 1e-12);
}

TEST(ConvolutionIntegral, DiscreteChaslesOnNestedPartitions) {
    SpectralDirichletModel m(32);
    const auto x = make_fbm_path(0.7, 12, 9);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return m.apply(r, psi) + x.at(r) * m.basis(0); };
    const double s = 0.125, tau = 0.5, t = 0.875;
    const auto left = uniform_convolution_sum(m, phi, x, s, tau, 1536);
    const auto right = uniform_convolution_sum(m, phi, x, tau, t, 1536);
    const auto whole = uniform_convolution_sum(m, phi, x, s, t, 3072);
    EXPECT_LE(rel(m, chasles_compose(m, left, right, tau, t), whole), 1e-10);
}

TEST(ConvolutionIntegral, ChaslesAtMidpointForSemigroupIntegrand) {
    SpectralDirichletModel m(32);
    const auto x = make_power_path(0.75, 12);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return m.apply(r, psi); };
    const auto cfg = smooth_cfg(10, 0.75);
    const double s = 0.25, t = 0.75, tau = 0.5;
    const auto left = convolution_integral(m, phi, x, s, tau, cfg).value;
    const auto right = convolution_integral(m, phi, x, tau, t, cfg).value;
    auto cfg11 = cfg;
    cfg11.max_level = 11;
    const auto whole = convolution_integral(m, phi, x, s, t, cfg11).value;
    EXPECT_LE(rel(m, chasles_compose(m, left, right, tau, t), whole), 1e-10);
}

TEST(Chasles, TrivialCases) {
    IdentityModel id(2);
    const auto a = id.element(Vector::Ones(2)), b = id.element(Vector::LinSpaced(2, 0.0, 1.0));
    EXPECT_EQ(chasles_compose(id, a, b, 0.3, 0.9).coefficients(), (a + b).coefficients());
    SpectralDirichletModel m(4);
    EXPECT_EQ(chasles_compose(m, m.zero(), m.basis(1), 0.2, 0.9).coefficients(), m.basis(1).coefficients());
    EXPECT_THROW(chasles_compose(m, m.zero(), m.zero(), 0.9, 0.2), DomainError);
}

TEST(ConvolutionIntegral, PartitionRobustness) {
    SpectralDirichletModel m(16);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return std::exp(-r) * psi; };
    const auto xf = [](double r) { return std::pow(r, 0.75); };
    std::mt19937_64 rng(21);
    std::vector<std::pair<double, double>> pts;
    for (int n = 6; n <= 12; n += 2) {
        const std::size_t cells = std::size_t{1} << n;
        std::vector<double> dyadic(cells + 1), random;
        for (std::size_t i = 0; i <= cells; ++i) dyadic[i] = static_cast<double>(i) / static_cast<double>(cells);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < cells; ++i) {
            random.push_back(dyadic[i]);
            random.push_back(dyadic[i] + u(rng) / static_cast<double>(cells));
        }
        random.push_back(1.0);
        const auto a = partition_convolution_sum(m, phi, xf, dyadic);
        const auto b = partition_convolution_sum(m, phi, xf, random);
        pts.emplace_back(1.0 / static_cast<double>(cells), m.norm(0.0, a - b));
    }
    for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i].second, pts[i - 1].second);
    EXPECT_GE(fit_rate(pts).slope, 0.75 - 0.15);
}

TEST(SingularIntegral, SemigroupIntegrandIsExactAtEveryLevel) {
    SpectralDirichletModel m(16);
    const auto x = make_power_path(0.75, 10);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return m.apply(r, psi); };
    const auto expected = (x.at(1.0) - x.at(0.0)) * m.apply(1.0, psi);
    for (int n = 1; n <= 10; ++n) {
        auto cfg = smooth_cfg(n, 0.75);
        cfg.min_level = 1;
        const auto r = singular_convolution_integral(m, phi, x, 0.0, 1.0, cfg);
        EXPECT_LE(m.norm(0.0, r.value - expected), 1e-13 * m.norm(0.0, expected)) << "level " << n;
    }
}

TEST(SingularIntegral, PowerIntegrandIdentityModel) {
    IdentityModel m(1);
    const auto x = make_power_path(1.0, 20);
    auto cfg = smooth_cfg(20);
    cfg.gamma = 0.25;
    const SimplexFn1 phi = [&](double r) { return m.element(Vector::Constant(1, std::pow(r, -0.25))); };
    const auto r = singular_convolution_integral(m, phi, x, 0.0, 1.0, cfg);
    EXPECT_NEAR(r.value[0], 4.0 / 3.0, 1e-4);
}

TEST(SingularIntegral, AgreesWithRegularIntegral) {
    SpectralDirichletModel m(16);
    const auto x = make_fbm_path(0.75, 10, 4);
    const auto psi = decaying(m, 1.0);
    const SimplexFn1 phi = [&](double r) { return std::cos(r) * psi; };
    auto cfg = smooth_cfg(10, x.nominal_exponent());
    cfg.tol = 1e-9;
    const auto a = singular_convolution_integral(m, phi, x, 0.0, 1.0, cfg).value;
    const auto b = convolution_integral(m, phi, x, 0.0, 1.0, cfg).value;
    EXPECT_LE(m.norm(0.0, a - b), 10.0 * cfg.tol * m.norm(0.0, b));
}

TEST(SingularIntegral, RejectsInadmissibleOrder) {
    IdentityModel m(1);
    const auto x = make_power_path(0.75, 8);
    auto cfg = smooth_cfg(8, 0.75);
    cfg.gamma = 0.9;
    try {
        singular_convolution_integral(m, [&](double r) { return m.element(Vector::Constant(1, std::pow(r, -0.9))); }, x, 0.0, 1.0, cfg);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("gamma <"), std::string::npos);
    }
}

TEST(ClassicalConvolution, Examples) {
    IdentityModel id(1);
    const auto psi = id.element(Vector::Constant(1, 2.0));
    const auto lin = make_power_path(1.0, 4);
    EXPECT_NEAR(classical_convolution(id, [&](double) { return psi; }, lin, 0.25, 0.75, 8)[0], 1.0, 1e-14);
    DiagonalMatrixModel d({-1.0});
    const auto one = d.element(Vector::Ones(1));
    EXPECT_NEAR(classical_convolution(d, [&](double) { return one; }, lin, 0.0, 1.0, 4)[0], 1.0 - std::exp(-1.0), 1e-14);
    EXPECT_THROW(classical_convolution(id, [&](double) { return psi; }, make_fbm_path(0.7, 4, 1), 0.0, 1.0, 4), UsageError);
}

TEST(ClassicalConvolution, OracleForSineDriver) {
    SpectralDirichletModel m(32);
    const auto x = make_sine_path(1.0, 14);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    ScaleElement psi = m.zero();
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = g(rng) / static_cast<double>(k + 1);
    const SimplexFn1 phi = [&](double r) { return m.apply(r, psi); };
    for (auto [s, t] : {std::pair{0.0, 0.25}, std::pair{0.25, 0.75}, std::pair{0.125, 0.875}}) {
        const auto oracle = classical_convolution(m, phi, x, s, t, 1 << 14);
        const auto r = convolution_integral(m, phi, x, s, t, smooth_cfg(12));
        EXPECT_LE(rel(m, r.value, oracle), 1e-3);
    }
}
