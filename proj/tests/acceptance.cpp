// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (no arguments runs all)

#include "sewconv.hpp"
#include "sewconv/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sewconv;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

ScaleElement random_psi(const SemigroupScale& m, std::uint64_t seed, double decay = 1.0) {
    auto rng = make_rng(seed, 2);
    std::normal_distribution<double> g;
    ScaleElement u = m.zero();
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = g(rng) * std::pow(static_cast<double>(k + 1), -decay);
    return u;
}

double rel(const SemigroupScale& m, const ScaleElement& a, const ScaleElement& b) {
    const double nb = m.norm(0.0, b);
    return m.norm(0.0, a - b) / (nb > 0.0 ? nb : 1.0);
}

SewingConfig fixed_level(int n, double eta, double rho = 1.0) {
    SewingConfig c;
    c.max_level = n;
    c.eta = eta;
    c.rho = rho;
    c.stop_early = false;
    c.tol = 0.0;
    return c;
}

Outcome identity_suite() {
    SpectralDirichletModel spec(16);
    DiagonalMatrixModel diag({-0.5, -2.0, -7.0});
    IdentityModel id(3);
    double worst = 0.0;
    bool ok = true;
    std::uint64_t stream = 3;
    for (const SemigroupScale* m : {static_cast<const SemigroupScale*>(&spec), static_cast<const SemigroupScale*>(&diag),
                                    static_cast<const SemigroupScale*>(&id)}) {
        auto rng = make_rng(0, stream++);
        const auto rep = run_identity_suite(*m, rng, {200, 1e-10});
        ok = ok && rep.passed() && rep.checks.size() == 4;
        for (const auto& c : rep.checks) worst = std::max(worst, c.max_violation);
    }
    return {ok, "3 models x 4 identities x 200 tuples, max violation " + fmt(worst)};
}

Outcome classical_oracle() {
    SpectralDirichletModel m(64);
    const auto x = make_sine_path(1.0, 15);
    const auto psi = random_psi(m, 1);
    const SimplexFn1 phi = [&](double t) { return m.apply(t, psi); };
    auto rng = make_rng(1, 5);
    std::uniform_int_distribution<int> pick(0, 8);
    double worst = 0.0;
    for (int p = 0; p < 10; ++p) {
        int a = pick(rng), b = pick(rng);
        while (a == b) b = pick(rng);
        if (a > b) std::swap(a, b);
        const double s = a / 8.0, t = b / 8.0;
        const auto r = convolution_integral(m, phi, x, s, t, fixed_level(12, 1.0));
        const auto oracle = classical_convolution(m, phi, x, s, t, std::size_t{1} << 14);
        worst = std::max(worst, rel(m, r.value, oracle));
    }
    return {worst <= 1e-3, "10 pairs, level 12 vs 2^14 Gauss panels, max relative X_0 error " + fmt(worst)};
}

Outcome discrete_chasles() {
    SpectralDirichletModel spec(32);
    DiagonalMatrixModel diag({-0.3, -4.0, -25.0, -90.0});
    IdentityModel id(2);
    const std::vector<const SemigroupScale*> models{&spec, &diag, &id};
    auto rng = make_rng(3, 7);
    std::uniform_int_distribution<int> level(2, 5);
    double worst = 0.0;
    for (int sc = 0; sc < 20; ++sc) {
        const SemigroupScale& m = *models[sc % 3];
        const int n = 10, k = level(rng);
        const auto x = make_fbm_path(0.75, n + k, 100 + sc);
        const auto psi = random_psi(m, 200 + sc);
        const double w = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
        const SimplexFn1 phi = [&](double r) { return std::cos(w * r) * m.apply(r, psi) + x.at(r) * psi; };
        // s < tau < t on the level-k grid
        std::uniform_int_distribution<int> cell(0, (1 << k));
        int a, b, c;
        do {
            a = cell(rng), b = cell(rng), c = cell(rng);
            if (a > b) std::swap(a, b);
            if (b > c) std::swap(b, c);
            if (a > b) std::swap(a, b);
        } while (!(a < b && b < c));
        const double s = std::ldexp(a, -k), tau = std::ldexp(b, -k), t = std::ldexp(c, -k);
        const std::size_t per_cell = std::size_t{1} << n;
        const auto left = uniform_convolution_sum(m, phi, x, s, tau, (b - a) * per_cell);
        const auto right = uniform_convolution_sum(m, phi, x, tau, t, (c - b) * per_cell);
        const auto whole = uniform_convolution_sum(m, phi, x, s, t, (c - a) * per_cell);
        worst = std::max(worst, rel(m, chasles_compose(m, left, right, tau, t), whole));
    }
    return {worst <= 1e-10, "20 scenarios, max relative difference " + fmt(worst)};
}

Outcome level_decay_literal() {
    SpectralDirichletModel m(64);
    const auto x = make_power_path(0.75, 12);
    const auto psi = random_psi(m, 4);
    const SimplexFn2 g = [&](double s, double t) { return (x.at(t) - x.at(s)) * m.apply(s, psi); };
    const auto r = sew(m, g, 0.0, 1.0, fixed_level(12, 0.75, 0.5));
    double biggest = 0.0;
    for (double d : r.level_deltas) biggest = std::max(biggest, d);
    std::string detail = "phi = S(.)psi, n = 4..12: ";
    try {
        const auto fit = fit_level_decay(r.level_deltas, 4, 12);
        const bool ok = std::abs(fit.slope + 0.25) <= 0.15;
        std::string why;
        if (biggest <= 1e-13 * m.norm(0.0, psi))
            why = " (max level delta " + fmt(biggest) + ", rounding only: hat_delta_1 phi = 0 for this integrand, so every M_n vanishes)";
        return {ok, detail + "fitted slope " + fmt(fit.slope) + " vs -0.25" + why};
    } catch (const DomainError&) {
        return {false, detail + "max level delta " + fmt(biggest) +
                           "; hat_delta_1 phi = 0 for this integrand, so every M_n vanishes and no slope can be fitted"};
    }
}

Outcome singular_closed_forms() {
    IdentityModel id(1);
    const auto lin = make_power_path(1.0, 14);
    auto cfg = fixed_level(14, 1.0);
    cfg.gamma = 0.25;
    const auto r = singular_convolution_integral(
        id, [&](double u) { return id.element(Vector::Constant(1, std::pow(u, -0.25))); }, lin, 0.0, 1.0, cfg);
    const double err = std::abs(r.value[0] - 4.0 / 3.0);

    SpectralDirichletModel m(32);
    const auto x = make_fbm_path(0.75, 12, 6);
    const auto psi = random_psi(m, 6);
    const auto expected = (x.at(1.0) - x.at(0.0)) * m.apply(1.0, psi);
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n) {
        auto c = fixed_level(n, x.nominal_exponent());
        c.min_level = 1;
        const auto v = singular_convolution_integral(m, [&](double u) { return m.apply(u, psi); }, x, 0.0, 1.0, c).value;
        worst = std::max(worst, rel(m, v, expected));
    }
    return {err <= 1e-3 && worst <= 1e-12, "|I - 4/3| = " + fmt(err) + " at level 14; collapsed case max error " + fmt(worst) + " over levels 1..12"};
}

Outcome holder_rate() {
    namespace ex = sewconv::experiment;
    ex::json detail;
    const auto rep = ex::rate_holder(ex::scenario(ex::default_config(), "holder"), detail);
    return {rep.passed, "geometric spectrum, fitted slope " + fmt(rep.fitted) + " vs " + fmt(rep.expected)};
}

Outcome zero_field() {
    SpectralDirichletModel m(64);
    const auto x = make_fbm_path(0.8, 12, 7);
    const auto psi = random_psi(m, 7);
    SolverConfig c;
    c.level = 12;
    const auto sol = solve_mild(m, fields::zero(m), x, psi, c);
    double worst = 0.0;
    for (std::size_t j = 0; j < sol.times.size(); ++j) worst = std::max(worst, rel(m, sol.values[j], m.apply(sol.times[j], psi)));
    return {worst <= 1e-12, "4097 grid points, max relative error " + fmt(worst)};
}

Outcome linear_young() {
    DiagonalMatrixModel m({-1.0});
    const auto x = make_power_path(0.75, 16);
    const auto psi = m.element(Vector::Ones(1));
    const double exact = std::exp(-1.0 + x.at(1.0));
    std::vector<double> errs;
    for (int level : {8, 10, 12}) {
        SolverConfig c;
        c.level = level;
        c.refinement = 4;
        const auto sol = solve_mild(m, fields::linear(m, 1.0), x, psi, c);
        errs.push_back(std::abs(sol.values.back()[0] - exact) / exact);
    }
    const bool ok = errs[2] <= 1e-2 && errs[1] < errs[0] && errs[2] < errs[1];
    return {ok, "relative error at t = 1 for m = 8, 10, 12: " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " + fmt(errs[2])};
}

Outcome constant_field() {
    SpectralDirichletModel m(64);
    const auto x = make_fbm_path(0.8, 12, 9);
    const auto psi = random_psi(m, 9);
    const auto cst = random_psi(m, 10, 1.5);
    SolverConfig c;
    c.level = 10;
    c.refinement = 2;
    const auto sol = solve_mild(m, fields::constant(m, cst, c.alpha), x, psi, c);
    const SimplexFn1 phi = [&](double) { return cst; };
    double worst = 0.0;
    for (int k = 0; k <= 10; ++k) {
        const double t = std::ldexp(1.0, -k);
        const auto ref = m.apply(t, psi) + convolution_integral(m, phi, x, 0.0, t, fixed_level(12 - k, x.nominal_exponent())).value;
        worst = std::max(worst, rel(m, sol.at(t), ref));
    }
    for (std::size_t j = 1; j < sol.times.size(); ++j) {
        const double t = sol.times[j];
        const auto ref = m.apply(t, psi) + uniform_convolution_sum(m, phi, x, 0.0, t, j * 4);
        worst = std::max(worst, rel(m, sol.values[j], ref));
    }
    return {worst <= 1e-10, "max relative difference to S(t)psi + integral " + fmt(worst)};
}

Outcome blowup() {
    SpectralDirichletModel m(256);
    const double theta = 0.25;
    const auto x = make_power_path(0.9, 12);
    ScaleElement psi = m.zero();
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = std::pow(static_cast<double>(k + 1), -(2.0 * theta + 0.5 + 0.01));
    SolverConfig c;
    c.level = 12;
    c.alpha = 0.3;
    c.theta = theta;
    const auto free = solve_mild(m, fields::zero(m), x, psi, c);
    const double s0 = blowup_profile(m, free, {0.0})[0].fit.slope;
    const auto forced = solve_mild(m, fields::nemytskii(m, scalar_maps::scaled_sin(0.1)), x, psi, c);
    const double s1 = blowup_profile(m, forced, {0.0})[0].fit.slope;
    const bool ok = std::abs(s0 - (theta - 1.0)) <= 0.1 && std::abs(s1 - s0) <= 0.15;
    return {ok, "sigma = 0 slope " + fmt(s0) + " vs -0.75; 0.1 sin Nemytskii slope " + fmt(s1)};
}

Outcome picard_cross() {
    SpectralDirichletModel m(32);
    const auto x = make_power_path(0.75, 12);
    const auto psi = random_psi(m, 11);
    bool ok = true;
    std::ostringstream os;
    for (const auto& field : {fields::linear(m, 1.0), fields::nemytskii(m, scalar_maps::scaled_sin(0.1))}) {
        SolverConfig c;
        c.level = 10;
        c.refinement = 2;
        c.mode = SolverMode::picard;
        const auto pic = solve_mild(m, field, x, psi, c);
        const double res = picard_residual(m, field, x, psi, pic, c);
        c.mode = SolverMode::stepper;
        const auto stp = solve_mild(m, field, x, psi, c);
        std::vector<ScaleElement> diff = stp.values;
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= pic.values[j];
        const double d = compute_Y_norm(m, stp.times, diff, c.alpha, c.gamma()).total();
        ok = ok && pic.status == SolveStatus::converged && d <= 5.0 * c.picard_tol && res <= c.picard_tol;
        os << field.name << ": " << pic.iterations << " iterations, distance " << fmt(d) << ", residual " << fmt(res) << "; ";
    }
    return {ok, os.str()};
}

Outcome regime_gates() {
    SpectralDirichletModel m(8);
    const auto psi = m.basis(0);
    struct Gate {
        VectorField field;
        double eta, alpha, theta;
        const char* needle;
    };
    auto omega_field = fields::linear(m, 1.0);
    omega_field.metadata.regime = Regime::locally_lipschitz_omega;
    omega_field.metadata.omega = 0.5;
    const std::vector<Gate> gates{
        {fields::linear(m, 1.0), 0.75, 0.5, 0.2, "eta > 2 alpha - theta"},
        {fields::constant(m, m.basis(1), 0.45), 0.8, 0.45, 0.05, "eta > 2 alpha - theta"},
        {fields::zero(m), 0.6, 0.45, 0.2, "eta > 2 alpha - theta"},
        {fields::nemytskii(m, scalar_maps::tanh()), 0.9, 0.5, 0.3, "eta > alpha + (1 + omega)(alpha - theta)"},
        {fields::nemytskii(m, scalar_maps::scaled_sin(0.1)), 0.75, 0.35, 0.15, "eta > alpha + (1 + omega)(alpha - theta)"},
        {omega_field, 0.7, 0.4, 0.2, "eta > alpha + (1 + omega)(alpha - theta)"},
    };
    int rejected = 0;
    for (const auto& g : gates) {
        SolverConfig c;
        c.level = 4;
        c.alpha = g.alpha;
        c.theta = g.theta;
        c.eta = g.eta;
        try {
            solve_mild(m, g.field, make_power_path(g.eta, 4), psi, c);
        } catch (const ConfigError& e) {
            if (std::string(e.what()).find(g.needle) != std::string::npos) ++rejected;
        }
    }
    return {rejected == 6, std::to_string(rejected) + "/6 violating configurations rejected with the inequality named"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "algebraic identity suite", 5, identity_suite},
        {2, "classical-oracle equivalence", 30, classical_oracle},
        {3, "discrete Chasles", 5, discrete_chasles},
        {4, "sewing level decay", 60, level_decay_literal},
        {5, "singular-integral closed forms", 10, singular_closed_forms},
        {6, "Hoelder-rate law", 60, holder_rate},
        {7, "zero-field solve", 5, zero_field},
        {8, "linear Young equation", 60, linear_young},
        {9, "constant-field decoupling", 30, constant_field},
        {10, "blow-up sharpness", 120, blowup},
        {11, "Picard/stepper cross-validation", 180, picard_cross},
        {12, "regime gates", 1, regime_gates},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_seconds;
        const bool ok = o.passed && in_time;
        failures += ok ? 0 : 1;
        std::printf("%s  criterion %2d  %-32s %s  [%.2f s / %.0f s%s]\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    c.budget_seconds, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
