#include "fbsde/error.hpp"
#include "fbsde/experiments.hpp"

#include <cmath>

namespace fbsde {

RateFit fit_rate(const std::string& metric, std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) {
        throw ModelError("rate fit for '" + metric + "' needs at least three points");
    }
    double sx = 0, sy = 0;
    for (const auto& [n, v] : points) {
        if (!(n > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
            throw ModelError("rate fit for '" + metric + "' got a nonpositive value");
        }
        sx += std::log(n);
        sy += std::log(v);
    }
    const double count = static_cast<double>(points.size());
    const double mx = sx / count, my = sy / count;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [n, v] : points) {
        const double dx = std::log(n) - mx, dy = std::log(v) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw ModelError("rate fit for '" + metric + "' needs distinct N values");

    RateFit fit;
    fit.metric = metric;
    fit.points.assign(points.begin(), points.end());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

}  // namespace fbsde
