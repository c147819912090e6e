#include "fbsde/model.hpp"

#include "fbsde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fbsde {

namespace {

constexpr int kLattice = 50;

struct Range {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    void add(double v) {
        min = std::min(min, v);
        max = std::max(max, v);
    }
};

template <typename F>
void for_lattice(double T, Domain d, F&& visit) {
    for (int i = 0; i < kLattice; ++i) {
        const double t = T * i / (kLattice - 1);
        for (int j = 0; j < kLattice; ++j) {
            visit(t, d.lo + d.width() * j / (kLattice - 1));
        }
    }
}

Range sample(const SpaceTimeFn& fn, double T, Domain d) {
    Range r;
    for_lattice(T, d, [&](double t, double x) { r.add(fn(t, x)); });
    return r;
}

const ClosedForm& require_closed_form(const Problem& p) {
    if (!p.closed_form) {
        throw ModelError("problem '" + p.id + "' has no reference solution");
    }
    return *p.closed_form;
}

}  // namespace

Domain working_domain(const SpaceTimeFn& b, const SpaceTimeFn& sigma, double T, double x0,
                      double width_sigmas) {
    if (!(T > 0.0)) throw ModelError("horizon T must be positive");
    if (!(width_sigmas > 0.0)) throw ModelError("domain width in sigmas must be positive");
    double s = std::abs(sigma(0.0, x0));
    double drift = std::abs(b(0.0, x0));
    Domain d;
    for (int iter = 0; iter < 100; ++iter) {
        const double half = width_sigmas * s * std::sqrt(T) + drift * T;
        d = {x0 - half, x0 + half};
        if (!(half > 0.0)) {
            throw ModelError("degenerate working domain (sigma vanishes at x0)");
        }
        if (half > 1e6) {
            throw ModelError("working domain does not settle; supply an explicit domain");
        }
        const Range rs = sample(sigma, T, d);
        const Range rb = sample(b, T, d);
        const double s_new = std::max(std::abs(rs.min), std::abs(rs.max));
        const double drift_new = std::max(std::abs(rb.min), std::abs(rb.max));
        if (s_new <= s * (1 + 1e-12) && drift_new <= drift * (1 + 1e-12)) break;
        s = std::max(s, s_new);
        drift = std::max(drift, drift_new);
    }
    return d;
}

Problem make_manufactured(const ManufacturedParts& parts, SpaceTimeFn b, SpaceTimeFn sigma,
                          SpaceTimeFn sigma_x, double T, double x0,
                          const ManufacturedOptions& options) {
    if (!parts.u || !parts.u_t || !parts.u_x || !parts.u_xx || !parts.g) {
        throw ModelError("manufactured solution requires u, u_t, u_x, u_xx and g");
    }
    if (!b || !sigma) throw ModelError("manufactured problem requires b and sigma");

    Problem p;
    p.id = options.id;
    p.domain = options.domain ? *options.domain
                              : working_domain(b, sigma, T, x0, options.width_sigmas);
    if (!(p.domain.lo < p.domain.hi) || !p.domain.contains(x0)) {
        throw ModelError("working domain must be a nonempty interval containing x0");
    }

    const Range rs = sample(sigma, T, p.domain);
    if (!(rs.min > 0.0) && !(rs.max < 0.0)) {
        std::ostringstream msg;
        msg << "sigma violates ellipticity on [" << p.domain.lo << ", " << p.domain.hi
            << "]: range [" << rs.min << ", " << rs.max << "]";
        throw ModelError(msg.str());
    }
    const Range rb = sample(b, T, p.domain);
    p.sigma_min = std::min(std::abs(rs.min), std::abs(rs.max));
    p.sigma_max = std::max(std::abs(rs.min), std::abs(rs.max));
    p.drift_max = std::max(std::abs(rb.min), std::abs(rb.max));

    ClosedForm cf{parts.u, parts.u_t, parts.u_x, parts.u_xx, parts.g};
    auto f = [cf, b, sigma](double t, double x, double y, double z) {
        const double s = sigma(t, x);
        const double ux = cf.u_x(t, x);
        const double generator = cf.u_t(t, x) + b(t, x) * ux + 0.5 * s * s * cf.u_xx(t, x);
        return -generator - cf.g(cf.u(t, x), ux * s) + cf.g(y, z);
    };
    auto phi = [u = parts.u, T](double x) { return u(T, x); };

    p.coefficients = Coefficients{std::move(b), std::move(sigma), std::move(sigma_x),
                                  std::move(f),  std::move(phi),   T, x0};
    p.closed_form = std::move(cf);
    return p;
}

void attach_exact_transition(Problem& problem, ExactKernel kernel) {
    const auto& c = problem.coefficients;
    double worst = 0.0;
    for_lattice(c.T, problem.domain, [&](double t, double x) {
        const bool geometric = kernel.kind == ExactTransition::GeometricBm;
        const double b_expected = geometric ? kernel.mu * x : kernel.mu;
        const double s_expected = geometric ? kernel.s * x : kernel.s;
        const double scale = 1.0 + std::abs(x);
        worst = std::max({worst, std::abs(c.b(t, x) - b_expected) / scale,
                          std::abs(c.sigma(t, x) - s_expected) / scale});
    });
    if (!(worst <= 1e-12)) {
        throw ModelError("exact transition tag does not match the coefficients of '" +
                         problem.id + "'");
    }
    problem.exact_transition = kernel;
}

double pde_residual(const Problem& problem, double t, double x) {
    const ClosedForm& cf = require_closed_form(problem);
    const auto& c = problem.coefficients;
    const double s = c.sigma(t, x);
    const double ux = cf.u_x(t, x);
    return cf.u_t(t, x) + c.b(t, x) * ux + 0.5 * s * s * cf.u_xx(t, x) +
           c.f(t, x, cf.u(t, x), ux * s);
}

TrueSolution true_solution(const Problem& problem, double t, double x) {
    const ClosedForm& cf = require_closed_form(problem);
    const auto& c = problem.coefficients;
    if (!c.sigma_x) throw ModelError("problem '" + problem.id + "' does not provide sigma_x");
    const double s = c.sigma(t, x);
    const double ux = cf.u_x(t, x);
    return {cf.u(t, x), ux * s, ux, cf.u_xx(t, x) * s + ux * c.sigma_x(t, x)};
}

}  // namespace fbsde
