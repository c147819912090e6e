#include "fbsde/backward.hpp"

#include "fbsde/error.hpp"
#include "fbsde/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fbsde {

namespace {

constexpr int kRowBlock = 64;

struct PointValues {
    double y;
    double z;
};

// Shared quadrature core of dp_step and eval_between. `targets[j]` are the
// transition images of x; f is evaluated at time t_f.
template <typename Diag>
PointValues quadrature_point(const Problem& problem, const QuadratureRule& rule,
                             const Interpolant& y_next, std::span<const double> targets,
                             double t_f, double x, double delta, Diag&& on_target) {
    const int n = rule.order();
    std::array<double, 64> v{};
    double mean = 0.0, cross = 0.0;
    for (int j = 0; j < n; ++j) {
        on_target(targets[j]);
        v[j] = y_next(targets[j]);
        mean += rule.weights[j] * v[j];
        cross += rule.weights[j] * v[j] * rule.nodes[j];
    }
    const double z = cross / std::sqrt(delta);
    double drive = 0.0;
    for (int j = 0; j < n; ++j) {
        drive += rule.weights[j] * problem.coefficients.f(t_f, x, v[j], z);
    }
    return {mean + delta * drive, z};
}

}  // namespace

DpRows dp_step(const Problem& problem, SchemeKind scheme, const QuadratureRule& rule,
               const Interpolant& y_next, double t_k, const SpatialGrid& spatial, double h,
               int threads) {
    if (y_next.grid().n_pts != spatial.n_pts || y_next.grid().lo != spatial.lo ||
        y_next.grid().hi != spatial.hi) {
        throw ModelError("dp_step: y_next is not built on the given spatial grid");
    }
    const int n_pts = spatial.n_pts;
    const double sqrt_h = std::sqrt(h);
    DpRows rows;
    rows.y.resize(n_pts);
    rows.z.resize(n_pts);

    const std::size_t n_blocks = (n_pts + kRowBlock - 1) / kRowBlock;
    std::vector<DpDiagnostics> block_diag(n_blocks);
    parallel_for(n_blocks, threads, [&](std::size_t b) {
        std::vector<double> targets(rule.order());
        DpDiagnostics& diag = block_diag[b];
        const int end = std::min<int>(n_pts, static_cast<int>((b + 1) * kRowBlock));
        for (int i = static_cast<int>(b * kRowBlock); i < end; ++i) {
            const double x = spatial.x(i);
            const bool in_domain = problem.domain.contains(x);
            for (int j = 0; j < rule.order(); ++j) {
                targets[j] = step(scheme, problem, t_k, x, sqrt_h * rule.nodes[j], h);
            }
            const PointValues pv =
                quadrature_point(problem, rule, y_next, targets, t_k, x, h, [&](double xt) {
                    const bool out = !y_next.inside(xt);
                    ++diag.targets;
                    diag.outside += out;
                    if (in_domain) {
                        ++diag.domain_targets;
                        diag.domain_outside += out;
                    }
                });
            if (!std::isfinite(pv.y) || !std::isfinite(pv.z)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "dp_step: non-finite row at t=" << t_k << ", i=" << i << " (x=" << x
                    << ")";
                throw NumericalError(msg.str());
            }
            rows.y[i] = pv.y;
            rows.z[i] = pv.z;
        }
    });
    for (const auto& d : block_diag) rows.diagnostics += d;
    return rows;
}

DiscreteSolution dp_solve(const Problem& problem, const TimeGrid& time, SchemeKind scheme,
                          const QuadratureRule& rule, const SpatialGrid& spatial, int threads) {
    check_scheme(scheme, problem);
    DiscreteSolution sol;
    sol.time = time;
    sol.spatial = spatial;
    sol.scheme = scheme;
    sol.y_tables.resize(time.N + 1);
    sol.z_tables.resize(time.N);

    std::vector<double> terminal(spatial.n_pts);
    for (int i = 0; i < spatial.n_pts; ++i) terminal[i] = problem.coefficients.phi(spatial.x(i));
    sol.y_tables[time.N] = Interpolant(spatial, std::move(terminal));

    for (int k = time.N - 1; k >= 0; --k) {
        DpRows rows;
        try {
            rows = dp_step(problem, scheme, rule, sol.y_tables[k + 1], time.t(k), spatial,
                           time.h(), threads);
        } catch (const NumericalError& e) {
            throw NumericalError("step k=" + std::to_string(k) + ": " + e.what());
        }
        sol.diagnostics += rows.diagnostics;
        sol.y_tables[k] = Interpolant(spatial, std::move(rows.y));
        sol.z_tables[k] = Interpolant(spatial, std::move(rows.z));
    }
    return sol;
}

double eval_y(const DiscreteSolution& sol, int k, double x) {
    if (k < 0 || k > sol.time.N) throw ModelError("time index out of range");
    return sol.y_tables[k](x);
}

YZ eval_solution(const DiscreteSolution& sol, int k, double x) {
    if (k < 0 || k > sol.time.N) throw ModelError("time index out of range");
    if (k == sol.time.N) throw ModelError("z^N is undefined at the terminal time");
    return {sol.y_tables[k](x), sol.z_tables[k](x)};
}

YZ eval_between(const DiscreteSolution& sol, const Problem& problem, const QuadratureRule& rule,
                double t, double x, std::optional<double> x_at_tk) {
    const TimeGrid& time = sol.time;
    if (!(t >= 0.0) || !(t < time.T)) throw ModelError("eval_between: t outside [0, T)");
    if (sol.scheme == SchemeKind::Milstein) {
        throw ModelError("eval_between supports the euler and exact kernels only");
    }
    int k = std::min(time.N - 1, static_cast<int>(t / time.h()));
    if (t < time.t(k)) --k;
    if (t >= time.t(k + 1)) ++k;
    const double delta = time.t(k + 1) - t;
    const double sqrt_delta = std::sqrt(delta);

    std::vector<double> targets(rule.order());
    const auto& c = problem.coefficients;
    if (sol.scheme == SchemeKind::Euler) {
        const double xk = x_at_tk.value_or(x);
        const double drift = c.b(time.t(k), xk);
        const double vol = c.sigma(time.t(k), xk);
        for (int j = 0; j < rule.order(); ++j) {
            targets[j] = x + drift * delta + vol * sqrt_delta * rule.nodes[j];
        }
    } else {
        for (int j = 0; j < rule.order(); ++j) {
            targets[j] = step(sol.scheme, problem, t, x, sqrt_delta * rule.nodes[j], delta);
        }
    }
    const PointValues pv = quadrature_point(problem, rule, sol.y_tables[k + 1], targets, t, x,
                                            delta, [](double) {});
    return {pv.y, pv.z};
}

void write_solution(std::ostream& out, const DiscreteSolution& sol, std::string_view problem_id) {
    char buf[160];
    out << "# fbsde solution table\n";
    out << "# problem=" << problem_id << '\n';
    out << "# scheme=" << to_string(sol.scheme) << '\n';
    std::snprintf(buf, sizeof buf, "# N=%d T=%.17g\n", sol.time.N, sol.time.T);
    out << buf;
    std::snprintf(buf, sizeof buf, "# grid lo=%.17g hi=%.17g n_pts=%d dx=%.17g\n",
                  sol.spatial.lo, sol.spatial.hi, sol.spatial.n_pts, sol.spatial.dx());
    out << buf;
    out << "k,x,y,z\n";
    for (int k = 0; k <= sol.time.N; ++k) {
        const auto y = sol.y_tables[k].values();
        for (int i = 0; i < sol.spatial.n_pts; ++i) {
            if (k < sol.time.N) {
                std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", k, sol.spatial.x(i), y[i],
                              sol.z_tables[k].values()[i]);
            } else {
                std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,nan\n", k, sol.spatial.x(i), y[i]);
            }
            out << buf;
        }
    }
}

}  // namespace fbsde
