#pragma once

#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"
#include "fbsde/numerics.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

namespace fbsde {

/// Quadrature targets that fell outside the spatial grid and were
/// evaluated by linear extrapolation. The `domain_*` counters only count
/// targets issued from grid points inside the working domain.
struct DpDiagnostics {
    std::int64_t targets = 0;
    std::int64_t outside = 0;
    std::int64_t domain_targets = 0;
    std::int64_t domain_outside = 0;

    double outside_fraction() const {
        return targets ? static_cast<double>(outside) / targets : 0.0;
    }
    double domain_outside_fraction() const {
        return domain_targets ? static_cast<double>(domain_outside) / domain_targets : 0.0;
    }
    DpDiagnostics& operator+=(const DpDiagnostics& o) {
        targets += o.targets;
        outside += o.outside;
        domain_targets += o.domain_targets;
        domain_outside += o.domain_outside;
        return *this;
    }
};

struct DpRows {
    std::vector<double> y;
    std::vector<double> z;
    DpDiagnostics diagnostics;
};

/// One backward step at t_k. For grid point x_i and x'_j = T(t_k, x_i, sqrt(h) xi_j, h),
/// v_j = y_next(x'_j):
///   z_i = sum_j w_j v_j xi_j / sqrt(h)
///   y_i = sum_j w_j v_j + h sum_j w_j f(t_k, x_i, v_j, z_i)
/// f sees Y at t_{k+1} and the Z just computed, so the step is explicit.
DpRows dp_step(const Problem& problem, SchemeKind scheme, const QuadratureRule& rule,
               const Interpolant& y_next, double t_k, const SpatialGrid& spatial, double h,
               int threads = 1);

struct DiscreteSolution {
    TimeGrid time;
    SpatialGrid spatial;
    SchemeKind scheme = SchemeKind::Euler;
    std::vector<Interpolant> y_tables;  // k = 0..N
    std::vector<Interpolant> z_tables;  // k = 0..N-1
    DpDiagnostics diagnostics;
};

DiscreteSolution dp_solve(const Problem& problem, const TimeGrid& time, SchemeKind scheme,
                          const QuadratureRule& rule, const SpatialGrid& spatial,
                          int threads = 1);

struct YZ {
    double y;
    double z;
};

/// (u^N(t_k, x), z^N(t_k, x)); z is undefined at k = N, which throws.
YZ eval_solution(const DiscreteSolution& sol, int k, double x);
double eval_y(const DiscreteSolution& sol, int k, double x);

/// Between-times values on [t_k, t_{k+1}) with delta = t_{k+1} - t:
///   z = E_t[Y^N_{t_{k+1}} (W_{t_{k+1}} - W_t)] / delta
///   y = E_t[Y^N_{t_{k+1}} + delta f(t, X^N_t, Y^N_{t_{k+1}}, z)]
/// The Euler continuation keeps the coefficients frozen at (t_k, x_at_tk)
/// (defaults to x); exact kernels continue exactly from x. Milstein is not
/// supported because its continuation is not a function of X^N_t alone.
YZ eval_between(const DiscreteSolution& sol, const Problem& problem, const QuadratureRule& rule,
                double t, double x, std::optional<double> x_at_tk = std::nullopt);

/// Columnar text export: '#'-prefixed header lines, then "k,x,y,z" rows
/// (z is "nan" at k = N).
void write_solution(std::ostream& out, const DiscreteSolution& sol, std::string_view problem_id);

}  // namespace fbsde
