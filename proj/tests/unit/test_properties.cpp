// Randomised invariants. Inputs come from the project RNG so failures replay.
#include "fbsde/backward.hpp"
#include "fbsde/experiments.hpp"
#include "fbsde/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fbsde;

namespace {

double draw(std::uint64_t stream, std::uint64_t i, double lo, double hi) {
    return lo + (hi - lo) * rng::uniform_open(977, stream, i);
}

}  // namespace

TEST(Properties, FitRateIsScaleInvariant) {
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        const double rate = draw(trial, 0, -2.0, 0.5);
        const double scale = draw(trial, 1, 1e-6, 1e3);
        std::vector<std::pair<double, double>> pts, scaled;
        for (int j = 0; j < 5; ++j) {
            const double N = 8 << j;
            const double v = std::pow(N, rate) * (1 + 0.05 * draw(trial, 2 + j, -1, 1));
            pts.emplace_back(N, v);
            scaled.emplace_back(N, scale * v);
        }
        const RateFit a = fit_rate("m", pts), b = fit_rate("m", scaled);
        EXPECT_NEAR(a.slope, b.slope, 1e-10);
        EXPECT_NEAR(a.r_squared, b.r_squared, 1e-10);
        EXPECT_NEAR(b.intercept - a.intercept, std::log(scale), 1e-10);
        EXPECT_NEAR(a.slope, rate, 0.1);
        EXPECT_GE(a.r_squared, 0.0);
        EXPECT_LE(a.r_squared, 1.0 + 1e-15);
    }
}

TEST(Properties, InterpolantIsExactForQuadratics) {
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        const double lo = draw(trial, 0, -5, 0);
        const double hi = lo + draw(trial, 1, 0.5, 6);
        const int n = 5 + static_cast<int>(draw(trial, 2, 0, 60));
        const double a = draw(trial, 3, -2, 2), b = draw(trial, 4, -2, 2), c = draw(trial, 5, -2, 2);
        const SpatialGrid g{lo, hi, n};
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) v[i] = a + b * g.x(i) + c * g.x(i) * g.x(i);
        const Interpolant f(g, v);
        for (std::uint64_t j = 0; j < 40; ++j) {
            const double x = draw(trial, 100 + j, lo, hi);
            EXPECT_NEAR(f(x), a + b * x + c * x * x, 1e-11 * (1 + std::abs(c) * hi * hi));
        }
    }
}

TEST(Properties, QuadratureIntegratesRandomPolynomials) {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(draw(trial, 0, 0, 30));
        const QuadratureRule r = gauss_hermite(n);
        // E[(xi + s)^2] = 1 + s^2 and E[exp(a xi)] = exp(a^2/2) (the latter approximately).
        const double s = draw(trial, 1, -3, 3);
        EXPECT_NEAR(integrate(r, [s](double x) { return (x + s) * (x + s); }), 1 + s * s, 1e-12);
        if (n >= 16) {
            const double a = draw(trial, 2, -1, 1);
            EXPECT_NEAR(integrate(r, [a](double x) { return std::exp(a * x); }),
                        std::exp(a * a / 2), 1e-12);
        }
    }
}

TEST(Properties, DiscountIsExactForAnyRate) {
    const QuadratureRule rule = gauss_hermite(8);
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        CatalogOptions opt;
        const double r = draw(trial, 0, 0.0, 2.0);
        const int N = 1 + static_cast<int>(draw(trial, 1, 0, 40));
        opt.params["r"] = r;
        const Problem p = builtin("discount", opt);
        const TimeGrid time = make_time_grid(1.0, N);
        const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, rule,
                                              build_grid(p, rule, time, SchemeKind::Euler));
        const double x = draw(trial, 2, -1, 1);
        EXPECT_NEAR(eval_y(sol, 0, x), std::pow(1 - r / N, N), 1e-12) << "r=" << r << " N=" << N;
    }
}

TEST(Properties, AbmLinearIsExactForAnyParameters) {
    const QuadratureRule rule = gauss_hermite(6);
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        CatalogOptions opt;
        const double s = draw(trial, 0, 0.1, 1.0);
        opt.params["s"] = s;
        const Problem p = builtin("abm-linear", opt);
        const TimeGrid time = make_time_grid(1.0, 4 + static_cast<int>(draw(trial, 1, 0, 12)));
        const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, rule,
                                              build_grid(p, rule, time, SchemeKind::Euler));
        for (std::uint64_t j = 0; j < 10; ++j) {
            const double x = draw(trial, 10 + j, p.domain.lo, p.domain.hi);
            const int k = static_cast<int>(draw(trial, 30 + j, 0, time.N));
            const YZ v = eval_solution(sol, k, x);
            EXPECT_NEAR(v.y, x, 1e-10);
            EXPECT_NEAR(v.z, s, 1e-10);
        }
    }
}

TEST(Properties, EstimatesDependOnlyOnSeed) {
    const Problem p = builtin("const-sigma");
    const QuadratureRule rule = gauss_hermite(12);
    const TimeGrid time = make_time_grid(1.0, 8);
    const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, rule,
                                          build_grid(p, rule, time, SchemeKind::Euler));
    MonteCarloOptions mc;
    mc.M = 300;
    mc.R = 4;
    mc.L = 2;
    const ErrorReport a = estimate_errors(p, time, SchemeKind::Euler, sol, mc);
    mc.threads = 2;
    const ErrorReport b = estimate_errors(p, time, SchemeKind::Euler, sol, mc);
    mc.seed += 1;
    const ErrorReport c = estimate_errors(p, time, SchemeKind::Euler, sol, mc);
    EXPECT_EQ(a.at("y_err_2").value, b.at("y_err_2").value);
    EXPECT_NE(a.at("y_err_2").value, c.at("y_err_2").value);
    // Deterministic metrics do not depend on the seed.
    EXPECT_EQ(a.at("uN_gap").value, c.at("uN_gap").value);
    EXPECT_EQ(a.at("y0_err").value, c.at("y0_err").value);
}

TEST(Properties, LpNormsAreOrdered) {
    const Problem p = builtin("gbm");
    const QuadratureRule rule = gauss_hermite(16);
    MonteCarloOptions mc;
    mc.M = 400;
    mc.R = 8;
    mc.L = 2;
    for (int N : {4, 8}) {
        const TimeGrid time = make_time_grid(1.0, N);
        const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, rule,
                                              build_grid(p, rule, time, SchemeKind::Euler));
        const ErrorReport r = estimate_errors(p, time, SchemeKind::Euler, sol, mc);
        EXPECT_LE(r.at("y_err_1").value, r.at("y_err_2").value * (1 + 1e-12));
        EXPECT_LE(r.at("z_int_1").value, r.at("z_int_2").value * (1 + 1e-12));
        EXPECT_LE(r.at("y_err_2").value, r.at("e_2").value * (1 + 1e-12));
        EXPECT_LE(r.at("y0_err").value, r.at("y_err_1").value * (1 + 1e-12));
    }
}
