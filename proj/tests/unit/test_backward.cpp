#include "fbsde/backward.hpp"
#include "fbsde/error.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include <cmath>
#include <sstream>

using namespace fbsde;

namespace {

struct Solved {
    Problem problem;
    QuadratureRule rule;
    DiscreteSolution sol;
};

Solved solve(const std::string& id, int N, SchemeKind scheme = SchemeKind::Euler,
             GridOptions grid = {}, int threads = 1) {
    Problem p = builtin(id);
    QuadratureRule rule = gauss_hermite(20);
    const TimeGrid time = make_time_grid(p.coefficients.T, N);
    const SpatialGrid spatial = build_grid(p, rule, time, scheme, grid);
    DiscreteSolution sol = dp_solve(p, time, scheme, rule, spatial, threads);
    return {std::move(p), std::move(rule), std::move(sol)};
}

Problem constant_problem(double c) {
    ManufacturedParts parts{
        [c](double, double) { return c; },  [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },
    };
    return make_manufactured(
        parts, [](double, double x) { return 0.1 * std::sin(x); },
        [](double, double) { return 0.3; }, [](double, double) { return 0.0; }, 1.0, 0.0);
}

}  // namespace

TEST(DpStep, ConstantTerminalStaysConstant) {
    const Problem p = constant_problem(1.7);
    const QuadratureRule rule = gauss_hermite(20);
    const SpatialGrid g = grid_covering(p.domain.lo, p.domain.hi, 0.05);
    const Interpolant next(g, std::vector<double>(g.n_pts, 1.7));
    const DpRows rows = dp_step(p, SchemeKind::Euler, rule, next, 0.0, g, 0.1);
    for (int i = 0; i < g.n_pts; ++i) {
        EXPECT_NEAR(rows.y[i], 1.7, 1e-12);
        EXPECT_NEAR(rows.z[i], 0.0, 1e-12);
    }
}

TEST(DpStep, IdentityUnderBrownianMotion) {
    const Problem p = builtin("abm-linear");
    const QuadratureRule rule = gauss_hermite(20);
    const SpatialGrid g = grid_covering(-2.0, 4.0, 0.05);
    std::vector<double> v(g.n_pts);
    for (int i = 0; i < g.n_pts; ++i) v[i] = g.x(i);
    const DpRows rows = dp_step(p, SchemeKind::Euler, rule, Interpolant(g, v), 0.0, g, 0.25);
    for (int i = 0; i < g.n_pts; ++i) {
        EXPECT_NEAR(rows.z[i], 0.4, 1e-12);
        EXPECT_NEAR(rows.y[i], g.x(i), 1e-12);
    }
}

TEST(DpStep, DiscountOneStep) {
    const Problem p = builtin("discount");
    const QuadratureRule rule = gauss_hermite(20);
    const SpatialGrid g = grid_covering(p.domain.lo, p.domain.hi, 0.05);
    const Interpolant next(g, std::vector<double>(g.n_pts, 1.0));
    const DpRows rows = dp_step(p, SchemeKind::Euler, rule, next, 0.75, g, 0.25);
    for (double y : rows.y) EXPECT_NEAR(y, 1.0 - 0.1 * 0.25, 1e-15);
}

TEST(DpStep, RejectsForeignGrid) {
    const Problem p = builtin("discount");
    const SpatialGrid g{0.0, 1.0, 11}, other{0.0, 1.0, 21};
    const Interpolant next(g, std::vector<double>(11, 1.0));
    EXPECT_THROW(dp_step(p, SchemeKind::Euler, gauss_hermite(5), next, 0.0, other, 0.1), ModelError);
}

TEST(DpSolve, TerminalTableIsPhiBitExact) {
    for (const char* id : {"trig", "gbm", "discount"}) {
        const Solved s = solve(id, 8);
        const SpatialGrid& g = s.sol.spatial;
        for (int i = 0; i < g.n_pts; ++i) {
            EXPECT_EQ(s.sol.y_tables.back().values()[i], s.problem.coefficients.phi(g.x(i))) << id;
        }
    }
}

TEST(DpSolve, DiscountClosedRecursion) {
    const Solved s = solve("discount", 4);
    for (double x : {-1.0, 0.0, 0.37, 2.0}) {
        EXPECT_NEAR(eval_y(s.sol, 0, x), 0.9036878906249999, 1e-12);
        for (int k = 0; k < 4; ++k) {
            const YZ v = eval_solution(s.sol, k, x);
            EXPECT_NEAR(v.y, std::pow(0.975, 4 - k), 1e-12);
            EXPECT_NEAR(v.z, 0.0, 1e-12);
        }
    }
}

TEST(DpSolve, AbmLinearIsExactEverywhere) {
    const Solved s = solve("abm-linear", 8);
    for (int k = 0; k < 8; ++k) {
        for (double x : {-1.234, 0.5, 1.0, 3.3}) {
            const YZ v = eval_solution(s.sol, k, x);
            EXPECT_NEAR(v.y, x, 1e-10);
            EXPECT_NEAR(v.z, 0.4, 1e-10);
        }
    }
}

TEST(DpSolve, ExactAbmKernelMatchesEulerOnAbmLinear) {
    const Solved a = solve("abm-linear", 8, SchemeKind::Euler);
    const Solved b = solve("abm-linear", 8, SchemeKind::ExactAbm);
    for (int k = 0; k <= 8; ++k) {
        const auto& va = a.sol.y_tables[k].values();
        const auto& vb = b.sol.y_tables[k].values();
        for (std::size_t i = 0; i < va.size(); ++i) EXPECT_NEAR(va[i], vb[i], 1e-13);
    }
}

TEST(DpSolve, MartingaleWhenDriverVanishes) {
    // With f = 0 each table is the quadrature expectation of the next one.
    Problem p = builtin("trig");
    p.coefficients.f = [](double, double, double, double) { return 0.0; };
    const QuadratureRule rule = gauss_hermite(20);
    const TimeGrid time = make_time_grid(1.0, 8);
    const SpatialGrid g = build_grid(p, rule, time, SchemeKind::Euler);
    const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, rule, g);
    const double h = time.h();
    for (int k = 0; k < 8; ++k) {
        for (int i = 0; i < g.n_pts; i += 37) {
            const double x = g.x(i);
            const double e = integrate(rule, [&](double xi) {
                return sol.y_tables[k + 1](step(SchemeKind::Euler, p, time.t(k), x,
                                                std::sqrt(h) * xi, h));
            });
            EXPECT_NEAR(sol.y_tables[k].values()[i], e, 1e-9);
        }
    }
}

TEST(DpSolve, GapShrinksLinearlyInH) {
    double prev = 1.0;
    for (int N : {8, 16, 32}) {
        const Solved s = solve("trig", N);
        const double x0 = s.problem.coefficients.x0;
        const double gap = std::abs(eval_y(s.sol, 0, x0) - s.problem.closed_form->u(0.0, x0));
        EXPECT_LT(gap, 0.6 * prev);
        prev = gap;
    }
}

TEST(DpSolve, GridRefinementIsStable) {
    const Solved base = solve("trig", 32);
    GridOptions fine;
    fine.dx_cap = 0.01;
    const Solved refined = solve("trig", 32, SchemeKind::Euler, fine);
    ASSERT_GE(refined.sol.spatial.n_pts, 19 * base.sol.spatial.n_pts / 10);
    const double x0 = base.problem.coefficients.x0;
    const double u0 = base.problem.closed_form->u(0.0, x0);
    const double a = eval_y(base.sol, 0, x0), b = eval_y(refined.sol, 0, x0);
    EXPECT_LT(std::abs(a - b), 1e-6);
    EXPECT_LT(std::abs(a - b), 0.1 * std::abs(a - u0));
}

TEST(DpSolve, Deterministic) {
    const Solved a = solve("trig", 8, SchemeKind::Euler, {}, 1);
    const Solved b = solve("trig", 8, SchemeKind::Euler, {}, 3);
    for (int k = 0; k < 8; ++k) {
        const auto ya = a.sol.y_tables[k].values(), yb = b.sol.y_tables[k].values();
        const auto za = a.sol.z_tables[k].values(), zb = b.sol.z_tables[k].values();
        EXPECT_TRUE(std::equal(ya.begin(), ya.end(), yb.begin(), yb.end()));
        EXPECT_TRUE(std::equal(za.begin(), za.end(), zb.begin(), zb.end()));
    }
}

TEST(DpSolve, BlowUpNamesTheStep) {
    Problem p = builtin("discount");
    p.coefficients.f = [](double t, double, double, double) {
        return t < 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    const QuadratureRule rule = gauss_hermite(5);
    const TimeGrid time = make_time_grid(1.0, 4);
    const SpatialGrid g = grid_covering(-1.0, 1.0, 0.1);
    try {
        dp_solve(p, time, SchemeKind::Euler, rule, g);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("step k=1"), std::string::npos) << e.what();
    }
}

TEST(Eval, TerminalZIsUndefined) {
    const Solved s = solve("discount", 4);
    EXPECT_THROW(eval_solution(s.sol, 4, 0.0), ModelError);
    EXPECT_NO_THROW(eval_y(s.sol, 4, 0.0));
    EXPECT_THROW(eval_y(s.sol, 5, 0.0), ModelError);
}

TEST(Eval, KnotReturnsTableValue) {
    const Solved s = solve("trig", 8);
    const SpatialGrid& g = s.sol.spatial;
    const YZ v = eval_solution(s.sol, 3, g.x(100));
    EXPECT_EQ(v.y, s.sol.y_tables[3].values()[100]);
    EXPECT_EQ(v.z, s.sol.z_tables[3].values()[100]);
}

TEST(Between, DiscountRecursion) {
    const Solved s = solve("discount", 4);
    const double h = 0.25;
    for (double t : {0.0, 0.1, 0.3, 0.6, 0.99}) {
        const int k = static_cast<int>(t / h);
        const double delta = (k + 1) * h - t;
        const YZ v = eval_between(s.sol, s.problem, s.rule, t, 0.2);
        EXPECT_NEAR(v.y, (1 - 0.1 * delta) * std::pow(0.975, 4 - k - 1), 1e-12) << t;
        EXPECT_NEAR(v.z, 0.0, 1e-12);
    }
}

TEST(Between, AbmLinear) {
    const Solved s = solve("abm-linear", 8);
    for (double t : {0.0, 0.07, 0.5, 0.93}) {
        const YZ v = eval_between(s.sol, s.problem, s.rule, t, 1.3);
        EXPECT_NEAR(v.y, 1.3, 1e-10);
        EXPECT_NEAR(v.z, 0.4, 1e-10);
    }
}

TEST(Between, MatchesNodeValuesAtGridTimes) {
    const Solved s = solve("trig", 8);
    for (int k : {0, 3, 7}) {
        const double x = s.sol.spatial.x(s.sol.spatial.n_pts / 2);
        const YZ a = eval_between(s.sol, s.problem, s.rule, s.sol.time.t(k), x);
        const YZ b = eval_solution(s.sol, k, x);
        EXPECT_NEAR(a.y, b.y, 1e-12);
        EXPECT_NEAR(a.z, b.z, 1e-12);
    }
}

TEST(Between, Errors) {
    const Solved s = solve("discount", 4);
    EXPECT_THROW(eval_between(s.sol, s.problem, s.rule, 1.0, 0.0), ModelError);
    EXPECT_THROW(eval_between(s.sol, s.problem, s.rule, -0.1, 0.0), ModelError);
    const Solved m = solve("trig", 4, SchemeKind::Milstein);
    EXPECT_THROW(eval_between(m.sol, m.problem, m.rule, 0.1, 0.0), ModelError);
}

TEST(Export, ColumnarText) {
    const Solved s = solve("discount", 2);
    std::ostringstream out;
    write_solution(out, s.sol, "discount");
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("#", 0), 0u);
    EXPECT_NE(text.find("k,x,y,z\n"), std::string::npos);
    EXPECT_NE(text.find(",nan\n"), std::string::npos);
    std::size_t rows = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line[0] != '#' && line != "k,x,y,z") ++rows;
    }
    EXPECT_EQ(rows, 3u * s.sol.spatial.n_pts);
}
