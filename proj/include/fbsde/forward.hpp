#pragma once

#include "fbsde/model.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace fbsde {

/// Uniform grid t_k = k T / N, k = 0..N.
struct TimeGrid {
    double T = 1.0;
    int N = 1;

    double h() const { return T / N; }
    double t(int k) const { return k == N ? T : k * h(); }
};

TimeGrid make_time_grid(double T, int N);

/// Fine increments dW_j ~ Normal(0, h/R), j < N R, and the coarse increments
/// Delta W_k obtained by summing each consecutive block of R fine ones.
struct BrownianPath {
    int R = 1;
    std::vector<double> fine;
    std::vector<double> coarse;
};

/// Fine increment j of path `path_id` is sqrt(h/R) * Phi^{-1}(U) where U is
/// the Philox block keyed by `seed` at counter (j, path_id).
BrownianPath sample_brownian(const TimeGrid& grid, int R, std::uint64_t seed,
                             std::uint64_t path_id);

enum class SchemeKind { Euler, Milstein, ExactAbm, ExactGbm };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme(std::string_view name);

/// Checks that `kind` can be used with `problem` (exact kernels need the
/// matching tag, Milstein needs sigma_x). Throws ModelError otherwise.
void check_scheme(SchemeKind kind, const Problem& problem);

/// One-step transition x -> x' over a step of length h with increment dW.
/// Throws NumericalError on a non-finite result.
double step(SchemeKind kind, const Problem& problem, double t, double x, double dW, double h);

/// Reference and scheme trajectories driven by one Brownian path.
///
/// `interior[k * L + j]` holds the reference state at t_k + j h / L for
/// j = 0..L-1, so `interior[k * L] == reference[k]`.
struct PathPair {
    std::vector<double> reference;
    std::vector<double> scheme;
    std::vector<double> interior;
    int L = 1;
};

/// Reference: exact transition (coarse increments at the nodes, partial sums
/// of fine increments at interior points) when the problem declares one;
/// otherwise Euler over the N R fine steps. Requires R % L == 0.
PathPair simulate_pair(const Problem& problem, const TimeGrid& grid, SchemeKind scheme,
                       const BrownianPath& path, int L);

PathPair simulate_pair(const Problem& problem, const TimeGrid& grid, SchemeKind scheme, int R,
                       int L, std::uint64_t seed, std::uint64_t path_id);

}  // namespace fbsde
