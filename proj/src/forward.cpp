#include "fbsde/forward.hpp"

#include "fbsde/error.hpp"
#include "fbsde/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace fbsde {

namespace rng {

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const double u = uniform_open(seed, stream, index);
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace rng

namespace {

double exact_step(const ExactKernel& k, double x, double dW, double h) {
    if (k.kind == ExactTransition::ArithmeticBm) return x + k.mu * h + k.s * dW;
    return x * std::exp((k.mu - 0.5 * k.s * k.s) * h + k.s * dW);
}

[[noreturn]] void blow_up(double t, double x) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "blow-up: non-finite transition from (t=" << t << ", x=" << x << ")";
    throw NumericalError(msg.str());
}

}  // namespace

TimeGrid make_time_grid(double T, int N) {
    if (!(T > 0.0)) throw ModelError("time horizon must be positive");
    if (N < 1) throw ModelError("step count N must be >= 1");
    return {T, N};
}

BrownianPath sample_brownian(const TimeGrid& grid, int R, std::uint64_t seed,
                             std::uint64_t path_id) {
    if (R < 1) throw ModelError("refinement factor R must be >= 1");
    BrownianPath path;
    path.R = R;
    const std::size_t n_fine = static_cast<std::size_t>(grid.N) * R;
    const double scale = std::sqrt(grid.h() / R);
    path.fine.resize(n_fine);
    for (std::size_t j = 0; j < n_fine; ++j) {
        path.fine[j] = scale * rng::standard_normal(seed, path_id, j);
    }
    path.coarse.assign(grid.N, 0.0);
    for (int k = 0; k < grid.N; ++k) {
        double sum = 0.0;
        for (int r = 0; r < R; ++r) sum += path.fine[static_cast<std::size_t>(k) * R + r];
        path.coarse[k] = sum;
    }
    return path;
}

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::Euler: return "euler";
        case SchemeKind::Milstein: return "milstein";
        case SchemeKind::ExactAbm: return "exact-abm";
        case SchemeKind::ExactGbm: return "exact-gbm";
    }
    return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
    if (name == "euler") return SchemeKind::Euler;
    if (name == "milstein") return SchemeKind::Milstein;
    if (name == "exact-abm") return SchemeKind::ExactAbm;
    if (name == "exact-gbm") return SchemeKind::ExactGbm;
    throw ConfigError("unknown scheme '" + std::string(name) +
                      "'; valid: euler milstein exact-abm exact-gbm");
}

void check_scheme(SchemeKind kind, const Problem& problem) {
    const auto& exact = problem.exact_transition;
    switch (kind) {
        case SchemeKind::Euler: return;
        case SchemeKind::Milstein:
            if (!problem.coefficients.sigma_x) {
                throw ModelError("milstein needs sigma_x, which '" + problem.id +
                                 "' does not provide");
            }
            return;
        case SchemeKind::ExactAbm:
            if (!exact || exact->kind != ExactTransition::ArithmeticBm) {
                throw ModelError("'" + problem.id + "' has no arithmetic-bm exact transition");
            }
            return;
        case SchemeKind::ExactGbm:
            if (!exact || exact->kind != ExactTransition::GeometricBm) {
                throw ModelError("'" + problem.id + "' has no geometric-bm exact transition");
            }
            return;
    }
}

double step(SchemeKind kind, const Problem& problem, double t, double x, double dW, double h) {
    const auto& c = problem.coefficients;
    double next = 0.0;
    switch (kind) {
        case SchemeKind::Euler:
            next = x + c.b(t, x) * h + c.sigma(t, x) * dW;
            break;
        case SchemeKind::Milstein: {
            if (!c.sigma_x) check_scheme(kind, problem);
            const double s = c.sigma(t, x);
            next = x + c.b(t, x) * h + s * dW + 0.5 * s * c.sigma_x(t, x) * (dW * dW - h);
            break;
        }
        case SchemeKind::ExactAbm:
        case SchemeKind::ExactGbm:
            check_scheme(kind, problem);
            next = exact_step(*problem.exact_transition, x, dW, h);
            break;
    }
    if (!std::isfinite(next)) blow_up(t, x);
    return next;
}

PathPair simulate_pair(const Problem& problem, const TimeGrid& grid, SchemeKind scheme,
                       const BrownianPath& path, int L) {
    const int R = path.R;
    if (L < 1 || R % L != 0) {
        throw ModelError("interior sample count L must divide the refinement factor R");
    }
    check_scheme(scheme, problem);
    const int N = grid.N;
    const double h = grid.h();
    const double x0 = problem.coefficients.x0;

    PathPair pair;
    pair.L = L;
    pair.reference.resize(N + 1);
    pair.scheme.resize(N + 1);
    pair.interior.resize(static_cast<std::size_t>(N) * L);
    pair.reference[0] = pair.scheme[0] = x0;

    for (int k = 0; k < N; ++k) {
        pair.scheme[k + 1] = step(scheme, problem, grid.t(k), pair.scheme[k], path.coarse[k], h);
    }

    const int stride = R / L;
    const std::size_t base_stride = static_cast<std::size_t>(R);
    if (problem.exact_transition) {
        const ExactKernel& kernel = *problem.exact_transition;
        for (int k = 0; k < N; ++k) {
            const double xk = pair.reference[k];
            const std::size_t base = k * base_stride;
            double partial = 0.0;
            for (int j = 0; j < L; ++j) {
                pair.interior[static_cast<std::size_t>(k) * L + j] =
                    j == 0 ? xk : exact_step(kernel, xk, partial, j * h / L);
                for (int r = 0; r < stride; ++r) partial += path.fine[base + j * stride + r];
            }
            pair.reference[k + 1] = exact_step(kernel, xk, path.coarse[k], h);
            if (!std::isfinite(pair.reference[k + 1])) blow_up(grid.t(k), xk);
        }
    } else {
        const double dt = h / R;
        double x = x0;
        for (int k = 0; k < N; ++k) {
            for (int r = 0; r < R; ++r) {
                if (r % stride == 0) pair.interior[static_cast<std::size_t>(k) * L + r / stride] = x;
                const double t = grid.t(k) + r * dt;
                x = step(SchemeKind::Euler, problem, t, x, path.fine[k * base_stride + r], dt);
            }
            pair.reference[k + 1] = x;
        }
    }
    return pair;
}

PathPair simulate_pair(const Problem& problem, const TimeGrid& grid, SchemeKind scheme, int R,
                       int L, std::uint64_t seed, std::uint64_t path_id) {
    return simulate_pair(problem, grid, scheme, sample_brownian(grid, R, seed, path_id), L);
}

}  // namespace fbsde
