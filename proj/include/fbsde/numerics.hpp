#pragma once

#include "fbsde/error.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

namespace fbsde {

/// Gauss-Hermite rule for the standard normal measure (probabilists'
/// weight e^{-x^2/2}/sqrt(2 pi)); weights sum to one.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int order() const { return static_cast<int>(nodes.size()); }
};

/// Nodes are roots of the orthonormal Hermite recurrence, polished by Newton
/// from Golub-Welsch starting values. 1 <= n <= 64.
QuadratureRule gauss_hermite(int n);

/// sum_j w_j g(xi_j); throws NumericalError if g is non-finite at a node.
template <typename F>
double integrate(const QuadratureRule& rule, F&& g) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double v = g(rule.nodes[j]);
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "integrand is not finite at node " << rule.nodes[j];
            throw NumericalError(msg.str());
        }
        acc += rule.weights[j] * v;
    }
    return acc;
}

struct SpatialGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n_pts = 4;

    double dx() const { return (hi - lo) / (n_pts - 1); }
    double x(int i) const { return i == n_pts - 1 ? hi : lo + i * dx(); }
};

/// Uniform grid starting at `lo` with spacing exactly `dx` whose last point
/// is the first one at or beyond `hi`.
SpatialGrid grid_covering(double lo, double hi, double dx);

struct GridOptions {
    double dx_cap = 0.02;
    double dx_coeff = 1.0;
    /// Extend the working domain by the reach of one quadrature step so that
    /// transitions from working-domain points stay on the grid.
    bool quadrature_margin = true;
};

/// min(dx_cap, dx_coeff * N^{-3/4})
double grid_spacing(int N, const GridOptions& options);

SpatialGrid build_grid(const Problem& problem, const QuadratureRule& rule, const TimeGrid& time,
                       SchemeKind scheme, const GridOptions& options = {});

/// C^1 piecewise-cubic Hermite interpolant on a uniform grid. Knot slopes
/// come from five-point finite differences (one-sided near the ends), so
/// polynomials up to degree three are reproduced exactly. Outside [lo, hi]
/// the interpolant continues linearly with the end slope.
class Interpolant {
public:
    Interpolant() = default;
    Interpolant(SpatialGrid grid, std::vector<double> values);

    double operator()(double x) const;
    bool inside(double x) const { return x >= grid_.lo && x <= grid_.hi; }

    const SpatialGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> slopes() const { return slopes_; }

private:
    SpatialGrid grid_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

}  // namespace fbsde
