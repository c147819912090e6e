#include "fbsde/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fbsde {

namespace {

// Weights c_j such that p'(0) = sum_j c_j v_j for the Lagrange polynomial
// through the integer offsets o_j (unit spacing).
template <std::size_t M>
std::array<double, M> derivative_weights(const std::array<int, M>& offsets) {
    std::array<double, M> c{};
    for (std::size_t j = 0; j < M; ++j) {
        double denom = 1.0;
        for (std::size_t m = 0; m < M; ++m) {
            if (m != j) denom *= offsets[j] - offsets[m];
        }
        double numer = 0.0;
        for (std::size_t l = 0; l < M; ++l) {
            if (l == j) continue;
            double prod = 1.0;
            for (std::size_t m = 0; m < M; ++m) {
                if (m != j && m != l) prod *= -offsets[m];
            }
            numer += prod;
        }
        c[j] = numer / denom;
    }
    return c;
}

template <std::size_t M>
double stencil_slope(std::span<const double> v, int i, double dx) {
    const int n = static_cast<int>(v.size());
    const int start = std::clamp(i - static_cast<int>(M / 2), 0, n - static_cast<int>(M));
    std::array<int, M> offsets{};
    for (std::size_t j = 0; j < M; ++j) offsets[j] = start + static_cast<int>(j) - i;
    const auto c = derivative_weights(offsets);
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) s += c[j] * v[start + j];
    return s / dx;
}

}  // namespace

Interpolant::Interpolant(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (grid_.n_pts < 4 || !(grid_.lo < grid_.hi)) {
        throw ModelError("interpolation grid needs lo < hi and at least 4 points");
    }
    if (static_cast<int>(values_.size()) != grid_.n_pts) {
        throw ModelError("interpolant value count does not match the grid");
    }
    const double dx = grid_.dx();
    slopes_.resize(values_.size());
    for (int i = 0; i < grid_.n_pts; ++i) {
        slopes_[i] = grid_.n_pts >= 5 ? stencil_slope<5>(values_, i, dx)
                                      : stencil_slope<4>(values_, i, dx);
    }
}

double Interpolant::operator()(double x) const {
    const int n = grid_.n_pts;
    if (x <= grid_.lo) return values_.front() + slopes_.front() * (x - grid_.lo);
    if (x >= grid_.hi) return values_.back() + slopes_.back() * (x - grid_.hi);

    const double dx = grid_.dx();
    const double pos = (x - grid_.lo) / dx;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= 1e-12) return values_[static_cast<std::size_t>(nearest)];

    const int i = std::min(static_cast<int>(pos), n - 2);
    const double tau = pos - i;
    const double tau2 = tau * tau;
    const double tau3 = tau2 * tau;
    const double h00 = 2 * tau3 - 3 * tau2 + 1;
    const double h10 = tau3 - 2 * tau2 + tau;
    const double h01 = -2 * tau3 + 3 * tau2;
    const double h11 = tau3 - tau2;
    return h00 * values_[i] + h10 * dx * slopes_[i] + h01 * values_[i + 1] +
           h11 * dx * slopes_[i + 1];
}

}  // namespace fbsde
