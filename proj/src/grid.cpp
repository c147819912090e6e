#include "fbsde/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

SpatialGrid grid_covering(double lo, double hi, double dx) {
    if (!(lo < hi) || !(dx > 0.0)) throw ModelError("grid needs lo < hi and dx > 0");
    const int cells = std::max(3, static_cast<int>(std::ceil((hi - lo) / dx - 1e-9)));
    return {lo, lo + cells * dx, cells + 1};
}

double grid_spacing(int N, const GridOptions& options) {
    if (!(options.dx_cap > 0.0) || !(options.dx_coeff > 0.0)) {
        throw ConfigError("numerics.dx_cap and numerics.dx_coeff must be positive");
    }
    return std::min(options.dx_cap, options.dx_coeff * std::pow(static_cast<double>(N), -0.75));
}

SpatialGrid build_grid(const Problem& problem, const QuadratureRule& rule, const TimeGrid& time,
                       SchemeKind scheme, const GridOptions& options) {
    const double dx = grid_spacing(time.N, options);
    double lo = problem.domain.lo;
    double hi = problem.domain.hi;
    if (options.quadrature_margin) {
        const double sqrt_h = std::sqrt(time.h());
        for (int k = 0; k < time.N; ++k) {
            for (double edge : {problem.domain.lo, problem.domain.hi}) {
                for (double xi : rule.nodes) {
                    const double target = step(scheme, problem, time.t(k), edge, sqrt_h * xi,
                                               time.h());
                    lo = std::min(lo, target);
                    hi = std::max(hi, target);
                }
            }
        }
        if (lo < problem.domain.lo) lo -= 2 * dx;
        if (hi > problem.domain.hi) hi += 2 * dx;
    }
    return grid_covering(lo, hi, dx);
}

}  // namespace fbsde
