#include "fbsde/error.hpp"
#include "fbsde/model.hpp"
#include "fbsde/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fbsde;

namespace {

CouplingFn coupling() {
    return [](double y, double z) { return 0.4 * std::sin(y) + 0.3 * std::cos(z); };
}

// u = sin(x+t) e^-t, b = 0.2, sigma = 0.3 + 0.1 sin x.
Problem worked_example() {
    ManufacturedParts parts{
        [](double t, double x) { return std::sin(x + t) * std::exp(-t); },
        [](double t, double x) { return (std::cos(x + t) - std::sin(x + t)) * std::exp(-t); },
        [](double t, double x) { return std::cos(x + t) * std::exp(-t); },
        [](double t, double x) { return -std::sin(x + t) * std::exp(-t); },
        coupling(),
    };
    return make_manufactured(
        parts, [](double, double) { return 0.2; },
        [](double, double x) { return 0.3 + 0.1 * std::sin(x); },
        [](double, double x) { return 0.1 * std::cos(x); }, 1.0, 0.0);
}

ManufacturedParts constant_parts(double c) {
    return {
        [c](double, double) { return c; },       [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },      [](double, double) { return 0.0; },
        [](double, double) { return 0.0; },
    };
}

}  // namespace

// Frozen from tests/oracles/manufactured_oracle.py.
TEST(Manufactured, DriverMatchesSymbolicOracle) {
    const Problem p = worked_example();
    EXPECT_NEAR(p.coefficients.f(0.0, 0.0, 0.5, 0.2), -1.0008107579436281164, 1e-14);
    EXPECT_NEAR(p.coefficients.f(0.3, 0.7, -0.4, 1.1), -0.36556344985438045255, 1e-14);
}

TEST(Manufactured, TrueSolutionMatchesSymbolicOracle) {
    const Problem p = worked_example();
    const TrueSolution a = true_solution(p, 0.0, 0.0);
    EXPECT_NEAR(a.y, 0.0, 1e-15);
    EXPECT_NEAR(a.z, 0.3, 1e-15);
    EXPECT_NEAR(a.ux, 1.0, 1e-15);
    EXPECT_NEAR(a.zgrad, 0.1, 1e-15);
    const TrueSolution b = true_solution(p, 0.3, 0.7);
    EXPECT_NEAR(b.y, 0.62337703772067873612, 1e-14);
    EXPECT_NEAR(b.z, 0.14586556819492555060, 1e-14);
    EXPECT_NEAR(b.ux, 0.40026579286346455514, 1e-14);
    EXPECT_NEAR(b.zgrad, -0.19655814621706825525, 1e-14);
}

TEST(Manufactured, CatalogTrigMatchesSymbolicOracle) {
    const Problem p = builtin("trig");
    EXPECT_NEAR(p.coefficients.f(0.3, 0.7, -0.4, 1.1), -0.60759313925760258393, 1e-14);
    const TrueSolution s = true_solution(p, 0.2, 0.8);
    EXPECT_NEAR(s.y, 1.2000720103244559949, 1e-14);
    EXPECT_NEAR(s.z, 0.20939769033601092202, 1e-14);
    EXPECT_NEAR(s.ux, 1.0255883578292381542, 1e-14);
    EXPECT_NEAR(s.zgrad, 0.0041806509785730051817, 1e-14);
}

TEST(Manufactured, ConstantSolutionHasZeroDriver) {
    const Problem p = make_manufactured(
        constant_parts(2.5), [](double, double) { return 0.1; },
        [](double, double) { return 0.3; }, [](double, double) { return 0.0; }, 1.0, 0.0);
    for (double x : {-1.0, 0.0, 0.7}) {
        EXPECT_EQ(p.coefficients.f(0.4, x, 2.5, 0.0), 0.0);
        EXPECT_EQ(p.coefficients.phi(x), 2.5);
        const TrueSolution s = true_solution(p, 0.4, x);
        EXPECT_EQ(s.y, 2.5);
        EXPECT_EQ(s.z, 0.0);
    }
}

TEST(Manufactured, TerminalIsUAtHorizon) {
    const Problem p = worked_example();
    for (double x : {-2.0, -0.3, 0.0, 1.7}) {
        EXPECT_EQ(p.coefficients.phi(x), p.closed_form->u(1.0, x));
    }
}

TEST(Manufactured, RejectsSigmaWithSignChange) {
    EXPECT_THROW(make_manufactured(
                     constant_parts(1.0), [](double, double) { return 0.0; },
                     [](double, double x) { return 0.1 + x; },
                     [](double, double) { return 1.0; }, 1.0, 0.0),
                 ModelError);
}

TEST(Manufactured, ResidualAgainstFiniteDifferences) {
    // The residual recomputed from central differences of u must also vanish.
    const Problem p = worked_example();
    const auto& cf = *p.closed_form;
    const auto& c = p.coefficients;
    for (auto [t, x] : {std::pair{0.2, -0.5}, std::pair{0.6, 1.1}}) {
        const double e = 1e-4;
        const double ut = (cf.u(t + e, x) - cf.u(t - e, x)) / (2 * e);
        const double ux = (cf.u(t, x + e) - cf.u(t, x - e)) / (2 * e);
        const double uxx = (cf.u(t, x + e) - 2 * cf.u(t, x) + cf.u(t, x - e)) / (e * e);
        const double s = c.sigma(t, x);
        const double r = ut + c.b(t, x) * ux + 0.5 * s * s * uxx + c.f(t, x, cf.u(t, x), ux * s);
        EXPECT_LT(std::abs(r), 1e-5);
    }
}

TEST(Catalog, ContainsTheFiveProblems) {
    std::vector<std::string> ids;
    for (const auto& e : catalog()) ids.push_back(e.id);
    for (const char* id : {"trig", "const-sigma", "gbm", "abm-linear", "discount"}) {
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
    }
}

TEST(Catalog, ResidualVanishesEverywhere) {
    for (const auto& e : catalog()) {
        const Problem p = builtin(e.id);
        ASSERT_TRUE(p.closed_form) << e.id;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const double t = p.coefficients.T * rng::uniform_open(11, i, 0);
            const double x = p.domain.lo + p.domain.width() * rng::uniform_open(11, i, 1);
            EXPECT_LT(std::abs(pde_residual(p, t, x)), 1e-8) << e.id << " t=" << t << " x=" << x;
        }
    }
}

// sigma_min is sampled on a coarse lattice, so allow a small undershoot.
TEST(Catalog, EllipticOnWorkingDomain) {
    for (const auto& e : catalog()) {
        const Problem p = builtin(e.id);
        EXPECT_GT(p.sigma_min, 0.0) << e.id;
        for (int i = 0; i <= 200; ++i) {
            const double x = p.domain.lo + p.domain.width() * i / 200.0;
            EXPECT_GE(p.coefficients.sigma(0.5, x), p.sigma_min * 0.99) << e.id;
        }
    }
}

TEST(Catalog, ExactTransitionTags) {
    EXPECT_EQ(builtin("gbm").exact_transition->kind, ExactTransition::GeometricBm);
    EXPECT_EQ(builtin("abm-linear").exact_transition->kind, ExactTransition::ArithmeticBm);
    EXPECT_FALSE(builtin("trig").exact_transition);
}

TEST(Catalog, ExactTransitionMismatchIsRejected) {
    Problem p = builtin("trig");
    EXPECT_THROW(attach_exact_transition(p, {ExactTransition::ArithmeticBm, 0.05, 0.2}),
                 ModelError);
    Problem q = builtin("const-sigma");
    EXPECT_THROW(attach_exact_transition(q, {ExactTransition::GeometricBm, 0.0, 0.4}), ModelError);
}

TEST(Catalog, UnknownIdAndParameter) {
    EXPECT_THROW(builtin("nope"), ModelError);
    CatalogOptions opt;
    opt.params["bogus"] = 1.0;
    EXPECT_THROW(builtin("trig", opt), ModelError);
}

TEST(Catalog, ParameterOverride) {
    CatalogOptions opt;
    opt.params["r"] = 0.2;
    const Problem p = builtin("discount", opt);
    EXPECT_DOUBLE_EQ(p.coefficients.f(0.0, 0.0, 1.0, 0.0), -0.2);
}

TEST(Catalog, DiscountClosedForm) {
    const Problem p = builtin("discount");
    EXPECT_DOUBLE_EQ(true_solution(p, 0.0, 0.3).y, std::exp(-0.1));
    EXPECT_EQ(true_solution(p, 0.0, 0.3).z, 0.0);
}

TEST(Catalog, MissingClosedFormIsAnError) {
    Problem p = builtin("trig");
    p.closed_form.reset();
    EXPECT_THROW(true_solution(p, 0.0, 0.0), ModelError);
}

TEST(Domain, ContainsStartAndIsWide) {
    for (const auto& e : catalog()) {
        const Problem p = builtin(e.id);
        EXPECT_TRUE(p.domain.contains(p.coefficients.x0)) << e.id;
        EXPECT_GT(p.domain.width(), 6.0 * p.sigma_min) << e.id;
    }
}
