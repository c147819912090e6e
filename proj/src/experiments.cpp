#include "fbsde/experiments.hpp"

#include "fbsde/error.hpp"
#include "fbsde/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fbsde {

namespace {

constexpr std::int64_t kPathBlock = 128;
constexpr std::int64_t kMinPaths = 100;

struct Sums {
    double s = 0.0;
    double ss = 0.0;

    void add(double v) {
        s += v;
        ss += v * v;
    }
    Sums& operator+=(const Sums& o) {
        s += o.s;
        ss += o.ss;
        return *this;
    }
};

double mean(const Sums& m, std::int64_t n) { return m.s / static_cast<double>(n); }

double variance(const Sums& m, std::int64_t n) {
    const double dn = static_cast<double>(n);
    return std::max(0.0, (m.ss - m.s * m.s / dn) / (dn - 1.0));
}

double covariance(const Sums& a, const Sums& b, double cross, std::int64_t n) {
    const double dn = static_cast<double>(n);
    return (cross - a.s * b.s / dn) / (dn - 1.0);
}

double std_error(const Sums& m, std::int64_t n) {
    return std::sqrt(variance(m, n) / static_cast<double>(n));
}

// Standard error of sqrt(mean) by the delta method.
Estimate sqrt_estimate(double mean_value, double se_mean) {
    const double v = std::sqrt(mean_value);
    return {v, v > 0.0 ? se_mean / (2.0 * v) : 0.0};
}

struct ErrorAccumulator {
    std::vector<Sums> dx2, ay, ay2, yres, zres;
    std::vector<double> cross_ay_sqrt_s, cross_ay2_s;
    Sums sqrt_s, s, zsum;

    explicit ErrorAccumulator(int N)
        : dx2(N + 1), ay(N + 1), ay2(N + 1), yres(N + 1), zres(N), cross_ay_sqrt_s(N + 1),
          cross_ay2_s(N + 1) {}

    ErrorAccumulator& operator+=(const ErrorAccumulator& o) {
        for (std::size_t k = 0; k < dx2.size(); ++k) {
            dx2[k] += o.dx2[k];
            ay[k] += o.ay[k];
            ay2[k] += o.ay2[k];
            yres[k] += o.yres[k];
            cross_ay_sqrt_s[k] += o.cross_ay_sqrt_s[k];
            cross_ay2_s[k] += o.cross_ay2_s[k];
        }
        for (std::size_t k = 0; k < zres.size(); ++k) zres[k] += o.zres[k];
        sqrt_s += o.sqrt_s;
        s += o.s;
        zsum += o.zsum;
        return *this;
    }
};

std::size_t argmax_mean(const std::vector<Sums>& v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (v[k].s > v[best].s) best = k;
    }
    return best;
}

void check_mc_options(const Problem& problem, const MonteCarloOptions& o) {
    if (!problem.closed_form) {
        throw ModelError("problem '" + problem.id + "' has no reference solution");
    }
    if (o.M < kMinPaths) {
        throw ConfigError("M must be at least 100 paths for meaningful standard errors");
    }
    if (o.R < 1 || o.L < 1 || o.R % o.L != 0) {
        throw ConfigError("need R >= 1, L >= 1 and L dividing R");
    }
}

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{
        "euler_strong", "y_err_1", "y_err_2", "z_int_1", "z_int_2", "e_1",   "e_2",
        "y_resid",      "z_resid", "y0_err",  "z0_err",  "uN_gap",  "z_sum",
    };
    return names;
}

ErrorReport estimate_errors(const Problem& problem, const TimeGrid& grid, SchemeKind scheme,
                            const DiscreteSolution& sol, const MonteCarloOptions& options) {
    check_mc_options(problem, options);
    if (sol.time.N != grid.N || sol.scheme != scheme) {
        throw ModelError("estimate_errors: solution was built for a different grid or scheme");
    }
    const int N = grid.N;
    const int L = options.L;
    const double h = grid.h();
    const std::int64_t M = options.M;
    const ClosedForm& cf = *problem.closed_form;
    const auto& c = problem.coefficients;

    const std::size_t n_blocks = static_cast<std::size_t>((M + kPathBlock - 1) / kPathBlock);
    std::vector<ErrorAccumulator> blocks(n_blocks, ErrorAccumulator(N));

    parallel_for(n_blocks, options.threads, [&](std::size_t b) {
        ErrorAccumulator& acc = blocks[b];
        std::vector<double> abs_dy(N + 1);
        const std::int64_t first = static_cast<std::int64_t>(b) * kPathBlock;
        const std::int64_t last = std::min(M, first + kPathBlock);
        for (std::int64_t path = first; path < last; ++path) {
            const PathPair pair = simulate_pair(problem, grid, scheme, options.R, L, options.seed,
                                                static_cast<std::uint64_t>(path));
            double S = 0.0;
            double zsum = 0.0;
            for (int k = 0; k <= N; ++k) {
                const double t = grid.t(k);
                const double xn = pair.scheme[k];
                const double x = pair.reference[k];
                const TrueSolution truth = true_solution(problem, t, x);
                const double yn = k < N ? sol.y_tables[k](xn) : c.phi(xn);
                const double dx = xn - x;
                const double dy = yn - truth.y;
                acc.dx2[k].add(dx * dx);
                abs_dy[k] = std::abs(dy);
                acc.yres[k].add(std::abs(dy - truth.ux * dx));
                if (k == N) break;

                const double zn = sol.z_tables[k](xn);
                const double dz = zn - truth.z;
                acc.zres[k].add(std::abs(dz - truth.zgrad * dx));
                zsum += h * dz * dz;
                for (int j = 0; j < L; ++j) {
                    const double ts = t + j * h / L;
                    const double xs = pair.interior[static_cast<std::size_t>(k) * L + j];
                    const double zs = j == 0 ? truth.z : cf.u_x(ts, xs) * c.sigma(ts, xs);
                    S += (h / L) * (zn - zs) * (zn - zs);
                }
            }
            const double root_s = std::sqrt(S);
            for (int k = 0; k <= N; ++k) {
                acc.ay[k].add(abs_dy[k]);
                acc.ay2[k].add(abs_dy[k] * abs_dy[k]);
                acc.cross_ay_sqrt_s[k] += abs_dy[k] * root_s;
                acc.cross_ay2_s[k] += abs_dy[k] * abs_dy[k] * S;
            }
            acc.sqrt_s.add(root_s);
            acc.s.add(S);
            acc.zsum.add(zsum);
        }
    });

    ErrorAccumulator total(N);
    for (const auto& blk : blocks) total += blk;

    ErrorReport report;
    report.N = N;
    report.M = M;
    auto& out = report.metrics;

    const std::size_t kx = argmax_mean(total.dx2);
    out["euler_strong"] = sqrt_estimate(mean(total.dx2[kx], M), std_error(total.dx2[kx], M));

    const std::size_t k1 = argmax_mean(total.ay);
    out["y_err_1"] = {mean(total.ay[k1], M), std_error(total.ay[k1], M)};
    const std::size_t k2 = argmax_mean(total.ay2);
    out["y_err_2"] = sqrt_estimate(mean(total.ay2[k2], M), std_error(total.ay2[k2], M));

    out["z_int_1"] = {mean(total.sqrt_s, M), std_error(total.sqrt_s, M)};
    out["z_int_2"] = sqrt_estimate(mean(total.s, M), std_error(total.s, M));

    {
        const double var = variance(total.ay[k1], M) + variance(total.sqrt_s, M) +
                           2.0 * covariance(total.ay[k1], total.sqrt_s,
                                            total.cross_ay_sqrt_s[k1], M);
        out["e_1"] = {mean(total.ay[k1], M) + mean(total.sqrt_s, M),
                      std::sqrt(std::max(0.0, var) / static_cast<double>(M))};
    }
    {
        const double var = variance(total.ay2[k2], M) + variance(total.s, M) +
                           2.0 * covariance(total.ay2[k2], total.s, total.cross_ay2_s[k2], M);
        out["e_2"] = sqrt_estimate(mean(total.ay2[k2], M) + mean(total.s, M),
                                   std::sqrt(std::max(0.0, var) / static_cast<double>(M)));
    }

    const std::size_t ky = argmax_mean(total.yres);
    out["y_resid"] = {mean(total.yres[ky], M), std_error(total.yres[ky], M)};
    const std::size_t kz = argmax_mean(total.zres);
    out["z_resid"] = {mean(total.zres[kz], M), std_error(total.zres[kz], M)};

    const double x0 = c.x0;
    const TrueSolution truth0 = true_solution(problem, 0.0, x0);
    const YZ approx0 = eval_solution(sol, 0, x0);
    out["y0_err"] = {std::abs(approx0.y - truth0.y), 0.0};
    out["z0_err"] = {std::abs(approx0.z - truth0.z), 0.0};
    out["uN_gap"] = {std::abs(approx0.y - cf.u(0.0, x0)), 0.0};
    out["z_sum"] = {mean(total.zsum, M), std_error(total.zsum, M)};
    return report;
}

bool MomentReport::pass() const {
    return !series.empty() &&
           std::all_of(series.begin(), series.end(), [](const MomentSeries& s) { return s.pass; });
}

MomentReport moment_check(const Problem& problem, std::span<const int> ladder,
                          const MonteCarloOptions& options) {
    check_mc_options(problem, options);
    if (options.L % 2 != 0) throw ConfigError("moment check needs an even L (midpoint sample)");
    if (ladder.size() < 3) throw ConfigError("moment check needs at least three step counts");
    const ClosedForm& cf = *problem.closed_form;
    const std::int64_t M = options.M;
    const int L = options.L;

    // [p-1][quantity] -> points
    std::vector<std::pair<double, double>> pts[2][2];
    for (int N : ladder) {
        const TimeGrid grid = make_time_grid(problem.coefficients.T, N);
        const double h = grid.h();
        const std::size_t n_blocks = static_cast<std::size_t>((M + kPathBlock - 1) / kPathBlock);
        // per block, per k: |dX|^2, |dX|^4, |dY|^2, |dY|^4
        std::vector<std::vector<double>> blocks(n_blocks, std::vector<double>(4 * N, 0.0));
        parallel_for(n_blocks, options.threads, [&](std::size_t b) {
            auto& acc = blocks[b];
            const std::int64_t first = static_cast<std::int64_t>(b) * kPathBlock;
            const std::int64_t last = std::min(M, first + kPathBlock);
            for (std::int64_t path = first; path < last; ++path) {
                const PathPair pair =
                    simulate_pair(problem, grid, SchemeKind::Euler, options.R, L, options.seed,
                                  static_cast<std::uint64_t>(path));
                for (int k = 0; k < N; ++k) {
                    const double tk = grid.t(k);
                    const double xk = pair.interior[static_cast<std::size_t>(k) * L];
                    const double xs = pair.interior[static_cast<std::size_t>(k) * L + L / 2];
                    const double dx2 = (xs - xk) * (xs - xk);
                    const double dy = cf.u(tk + 0.5 * h, xs) - cf.u(tk, xk);
                    acc[4 * k] += dx2;
                    acc[4 * k + 1] += dx2 * dx2;
                    acc[4 * k + 2] += dy * dy;
                    acc[4 * k + 3] += dy * dy * dy * dy;
                }
            }
        });
        std::vector<double> total(4 * N, 0.0);
        for (const auto& blk : blocks) {
            for (std::size_t i = 0; i < total.size(); ++i) total[i] += blk[i];
        }
        for (int q = 0; q < 4; ++q) {
            double best = 0.0;
            for (int k = 0; k < N; ++k) best = std::max(best, total[4 * k + q] / M);
            pts[q % 2][q / 2].emplace_back(h, best);
        }
    }

    MomentReport report;
    for (int p = 1; p <= 2; ++p) {
        for (int qty = 0; qty < 2; ++qty) {
            MomentSeries s;
            s.p = p;
            s.quantity = qty == 0 ? "X" : "Y";
            s.points = pts[p - 1][qty];
            std::vector<std::pair<double, double>> by_n;
            for (const auto& [h, v] : s.points) by_n.emplace_back(problem.coefficients.T / h, v);
            s.slope = -fit_rate("moment", by_n).slope;
            s.pass = s.slope >= p - 0.2;
            report.series.push_back(std::move(s));
        }
    }
    return report;
}

}  // namespace fbsde
