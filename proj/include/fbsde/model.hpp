#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fbsde {

using SpaceTimeFn = std::function<double(double t, double x)>;
using DriverFn = std::function<double(double t, double x, double y, double z)>;
using TerminalFn = std::function<double(double x)>;
using CouplingFn = std::function<double(double y, double z)>;

/// Scalar decoupled FBSDE
///
///   dX = b(t,X) dt + sigma(t,X) dW,          X_0 = x0
///   -dY = f(t,X,Y,Z) dt - Z dW,               Y_T = phi(X_T)
///
/// sigma_x (the spatial derivative of sigma) is optional; the Milstein
/// kernel refuses problems that do not provide it.
struct Coefficients {
    SpaceTimeFn b;
    SpaceTimeFn sigma;
    SpaceTimeFn sigma_x;
    DriverFn f;
    TerminalFn phi;
    double T = 1.0;
    double x0 = 0.0;
};

/// Analytic solution u of the associated semi-linear PDE and the pieces
/// needed to evaluate (Y, Z) and the gradient of Z along paths.
struct ClosedForm {
    SpaceTimeFn u;
    SpaceTimeFn u_t;
    SpaceTimeFn u_x;
    SpaceTimeFn u_xx;
    CouplingFn g;
};

enum class ExactTransition { ArithmeticBm, GeometricBm };

/// Exact one-step transition that is a deterministic function of the
/// Brownian increment.
///   arithmetic: x' = x + mu h + s dW
///   geometric:  x' = x exp((mu - s^2/2) h + s dW)
struct ExactKernel {
    ExactTransition kind;
    double mu;
    double s;
};

struct Domain {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct Problem {
    std::string id;
    std::string summary;
    std::string hypotheses;
    Coefficients coefficients;
    std::optional<ClosedForm> closed_form;
    std::optional<ExactKernel> exact_transition;
    /// Working domain: every grid and truncation decision references it.
    Domain domain;
    /// Coefficient bounds, sampled on a space-time lattice over the domain.
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double drift_max = 0.0;
};

struct ManufacturedParts {
    SpaceTimeFn u;
    SpaceTimeFn u_t;
    SpaceTimeFn u_x;
    SpaceTimeFn u_xx;
    CouplingFn g;
};

struct ManufacturedOptions {
    std::string id = "manufactured";
    /// Overrides the automatic x0 +- width_sigmas * sigma_max * sqrt(T) domain.
    std::optional<Domain> domain;
    double width_sigmas = 6.0;
};

/// Builds the problem whose PDE solution is `parts.u` by choosing
///   f(t,x,y,z) = -(u_t + b u_x + sigma^2 u_xx / 2)(t,x) - g(u, u_x sigma) + g(y,z)
/// and phi(x) = u(T,x).
Problem make_manufactured(const ManufacturedParts& parts, SpaceTimeFn b, SpaceTimeFn sigma,
                          SpaceTimeFn sigma_x, double T, double x0,
                          const ManufacturedOptions& options = {});

/// Declares an exact transition on `problem` after checking that (b, sigma)
/// have the matching functional form on the working domain.
void attach_exact_transition(Problem& problem, ExactKernel kernel);

/// x0 +- width_sigmas * sigma_max * sqrt(T), widened by the drift range. The
/// maxima are taken over the domain itself, so this iterates to a fixed point.
Domain working_domain(const SpaceTimeFn& b, const SpaceTimeFn& sigma, double T, double x0,
                      double width_sigmas);

/// (u_t + b u_x + sigma^2 u_xx / 2)(t,x) + f(t, x, u, u_x sigma).
double pde_residual(const Problem& problem, double t, double x);

struct TrueSolution {
    double y;
    double z;
    double ux;
    /// d/dx (u_x sigma) = u_xx sigma + u_x sigma_x
    double zgrad;
};

TrueSolution true_solution(const Problem& problem, double t, double x);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

using ParamMap = std::map<std::string, double>;

struct CatalogOptions {
    /// Per-problem parameter overrides (keys without the "problem.<id>." prefix).
    ParamMap params;
    double width_sigmas = 6.0;
};

struct CatalogEntry {
    std::string id;
    std::string summary;
    std::string hypotheses;
    ParamMap defaults;
};

const std::vector<CatalogEntry>& catalog();

Problem builtin(std::string_view id, const CatalogOptions& options = {});

}  // namespace fbsde
