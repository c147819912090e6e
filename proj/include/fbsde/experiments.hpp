#pragma once

#include "fbsde/backward.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"
#include "fbsde/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fbsde {

/// Metric names, in report order.
///
///   euler_strong  max_k (E|dX_k|^2)^{1/2}
///   y_err_1/2     max_k (E|dY_k|^q)^{1/q}
///   z_int_1/2     (E S^{q/2})^{1/q},  S = sum_k int |Z^N_{t_k} - Z_t|^2 dt
///   e_1/e_2       (max_k E|dY_k|^q + E S^{q/2})^{1/q}
///   y_resid       max_k E|dY_k - u_x(t_k, X_{t_k}) dX_k|
///   z_resid       max_k E|dZ_k - (u_xx sigma + u_x sigma_x)(t_k, X_{t_k}) dX_k|
///   y0_err/z0_err |Y^N_0 - Y_0|, |Z^N_0 - Z_0|
///   uN_gap        |u^N(0, x0) - u(0, x0)|
///   z_sum         E(h sum_k |dZ_k|^2)   (auxiliary)
const std::vector<std::string>& metric_names();

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct ErrorReport {
    int N = 0;
    std::int64_t M = 0;
    std::map<std::string, Estimate> metrics;

    const Estimate& at(const std::string& name) const { return metrics.at(name); }
};

struct MonteCarloOptions {
    std::int64_t M = 20000;
    int R = 64;
    int L = 4;
    std::uint64_t seed = 20240601;
    int threads = 1;
};

/// Monte Carlo estimates over M coupled path pairs. Expectations are path
/// averages reduced in fixed block order, so the result does not depend on
/// the thread count. The Z integral uses a left Riemann sum over the L
/// interior reference states of each interval.
ErrorReport estimate_errors(const Problem& problem, const TimeGrid& grid, SchemeKind scheme,
                            const DiscreteSolution& sol, const MonteCarloOptions& options);

struct RateFit {
    std::string metric;
    std::vector<std::pair<double, double>> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log(value) against log(N). Needs at least three
/// points, all with positive value.
RateFit fit_rate(const std::string& metric, std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Increment moments
// ---------------------------------------------------------------------------

struct MomentSeries {
    int p = 1;
    std::string quantity;  // "X" or "Y"
    /// (h, max_k E|U_{t_k + h/2} - U_{t_k}|^{2p})
    std::vector<std::pair<double, double>> points;
    double slope = 0.0;  // d log(moment) / d log(h)
    bool pass = false;
};

struct MomentReport {
    std::vector<MomentSeries> series;
    bool pass() const;
};

/// Increment moments of the reference X and of Y = u(t, X) at the interval
/// midpoint for p in {1, 2}, over a ladder of step counts. Passes when every
/// fitted slope in h is at least p - 0.2. Requires an even L.
MomentReport moment_check(const Problem& problem, std::span<const int> ladder,
                          const MonteCarloOptions& options);

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Metric values below this are treated as zero and kept out of rate fits.
inline constexpr double kExactFloor = 1e-9;

struct SlopeBounds {
    std::optional<double> min;
    std::optional<double> max;
};

struct SuiteConfig {
    std::string problem_id = "trig";
    CatalogOptions catalog;
    SchemeKind scheme = SchemeKind::Euler;
    std::vector<int> ladder{8, 16, 32, 64, 128};
    MonteCarloOptions mc;
    int quad_order = 20;
    GridOptions grid;
    /// Metrics to report and fit; empty means all of metric_names().
    std::vector<std::string> metrics;
    std::map<std::string, SlopeBounds> verdicts;
};

enum class FitStatus { Fitted, Exact, Insufficient };

struct MetricSummary {
    std::string metric;
    FitStatus status = FitStatus::Insufficient;
    std::optional<RateFit> fit;
    std::optional<SlopeBounds> bounds;
    /// Empty when no verdict is configured for the metric.
    std::optional<bool> pass;
};

struct SuiteReport {
    SuiteConfig config;
    std::vector<ErrorReport> reports;
    std::map<int, std::string> failures;
    std::vector<MetricSummary> summaries;

    bool all_verdicts_pass() const;
    const MetricSummary* summary(const std::string& metric) const;
};

SuiteReport run_suite(const SuiteConfig& config);

/// Writes <metric>.csv (N,value,std_error,M) for each reported metric plus
/// summary.txt and its machine-readable twin summary.json.
void write_suite_report(const SuiteReport& report, const std::filesystem::path& dir);

std::string summary_text(const SuiteReport& report);
std::string summary_json(const SuiteReport& report);
std::string metric_csv(const SuiteReport& report, const std::string& metric);

}  // namespace fbsde
