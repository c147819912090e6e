#include "fbsde/error.hpp"
#include "fbsde/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbsde {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string status_name(FitStatus s) {
    switch (s) {
        case FitStatus::Fitted: return "fitted";
        case FitStatus::Exact: return "exact";
        case FitStatus::Insufficient: return "insufficient";
    }
    return "unknown";
}

std::vector<std::string> reported_metrics(const SuiteConfig& c) {
    return c.metrics.empty() ? metric_names() : c.metrics;
}

void validate(const SuiteConfig& c) {
    if (c.ladder.size() < 3) throw ConfigError("rate suites need a ladder of at least 3 N values");
    if (!std::is_sorted(c.ladder.begin(), c.ladder.end()) ||
        std::adjacent_find(c.ladder.begin(), c.ladder.end()) != c.ladder.end()) {
        throw ConfigError("ladder must be strictly ascending");
    }
    if (c.ladder.front() < 1) throw ConfigError("ladder entries must be positive");
    if (c.mc.M < 100) throw ConfigError("M must be at least 100");
    const auto& names = metric_names();
    for (const auto& m : c.metrics) {
        if (std::find(names.begin(), names.end(), m) == names.end()) {
            throw ConfigError("unknown metric '" + m + "'");
        }
    }
    for (const auto& [m, b] : c.verdicts) {
        if (std::find(names.begin(), names.end(), m) == names.end()) {
            throw ConfigError("verdict for unknown metric '" + m + "'");
        }
    }
}

}  // namespace

bool SuiteReport::all_verdicts_pass() const {
    return std::all_of(summaries.begin(), summaries.end(),
                       [](const MetricSummary& s) { return s.pass.value_or(true); });
}

const MetricSummary* SuiteReport::summary(const std::string& metric) const {
    for (const auto& s : summaries) {
        if (s.metric == metric) return &s;
    }
    return nullptr;
}

SuiteReport run_suite(const SuiteConfig& config) {
    validate(config);
    const Problem problem = builtin(config.problem_id, config.catalog);
    check_scheme(config.scheme, problem);
    const QuadratureRule rule = gauss_hermite(config.quad_order);

    SuiteReport report;
    report.config = config;
    for (int N : config.ladder) {
        try {
            const TimeGrid time = make_time_grid(problem.coefficients.T, N);
            const SpatialGrid spatial = build_grid(problem, rule, time, config.scheme, config.grid);
            const DiscreteSolution sol =
                dp_solve(problem, time, config.scheme, rule, spatial, config.mc.threads);
            report.reports.push_back(estimate_errors(problem, time, config.scheme, sol, config.mc));
        } catch (const NumericalError& e) {
            report.failures[N] = e.what();
        }
    }

    for (const auto& metric : reported_metrics(config)) {
        MetricSummary s;
        s.metric = metric;
        std::vector<std::pair<double, double>> points;
        bool any_value = false;
        for (const auto& r : report.reports) {
            const double v = r.at(metric).value;
            any_value = true;
            if (v >= kExactFloor) points.emplace_back(r.N, v);
        }
        if (any_value && points.empty()) {
            s.status = FitStatus::Exact;
        } else if (points.size() >= 3) {
            s.status = FitStatus::Fitted;
            s.fit = fit_rate(metric, points);
        }
        if (auto it = config.verdicts.find(metric); it != config.verdicts.end()) {
            s.bounds = it->second;
            if (s.status == FitStatus::Fitted) {
                const double slope = s.fit->slope;
                s.pass = (!s.bounds->min || slope >= *s.bounds->min) &&
                         (!s.bounds->max || slope <= *s.bounds->max);
            } else {
                s.pass = s.status == FitStatus::Exact;
            }
        }
        report.summaries.push_back(std::move(s));
    }
    return report;
}

std::string metric_csv(const SuiteReport& report, const std::string& metric) {
    std::ostringstream out;
    out << "N,value,std_error,M\n";
    for (const auto& r : report.reports) {
        const Estimate& e = r.at(metric);
        out << r.N << ',' << fmt("%.17g", e.value) << ',' << fmt("%.17g", e.std_error) << ','
            << r.M << '\n';
    }
    return out.str();
}

std::string summary_text(const SuiteReport& report) {
    const SuiteConfig& c = report.config;
    std::ostringstream out;
    out << "# fbsde rate suite\n";
    out << "problem = " << c.problem_id << '\n';
    out << "scheme = " << to_string(c.scheme) << '\n';
    out << "ladder = ";
    for (std::size_t i = 0; i < c.ladder.size(); ++i) out << (i ? "," : "") << c.ladder[i];
    out << '\n';
    out << "M = " << c.mc.M << '\n';
    out << "R = " << c.mc.R << '\n';
    out << "L = " << c.mc.L << '\n';
    out << "seed = " << c.mc.seed << '\n';
    out << "quad_order = " << c.quad_order << '\n';
    for (const auto& [n, msg] : report.failures) out << "failure.N" << n << " = " << msg << '\n';
    for (const auto& s : report.summaries) {
        const std::string key = "metric." + s.metric + ".";
        out << key << "status = " << status_name(s.status) << '\n';
        if (s.fit) {
            out << key << "slope = " << fmt("%.6f", s.fit->slope) << '\n';
            out << key << "intercept = " << fmt("%.6f", s.fit->intercept) << '\n';
            out << key << "r_squared = " << fmt("%.6f", s.fit->r_squared) << '\n';
        }
        if (s.bounds) {
            out << key << "bounds = [" << (s.bounds->min ? fmt("%g", *s.bounds->min) : "-inf")
                << ", " << (s.bounds->max ? fmt("%g", *s.bounds->max) : "inf") << "]\n";
        }
        out << key << "verdict = " << (s.pass ? (*s.pass ? "pass" : "fail") : "none") << '\n';
    }
    out << "verdicts = " << (report.all_verdicts_pass() ? "pass" : "fail") << '\n';
    return out.str();
}

std::string summary_json(const SuiteReport& report) {
    using nlohmann::ordered_json;
    const SuiteConfig& c = report.config;
    ordered_json j;
    j["problem"] = c.problem_id;
    j["scheme"] = std::string(to_string(c.scheme));
    j["ladder"] = c.ladder;
    j["M"] = c.mc.M;
    j["R"] = c.mc.R;
    j["L"] = c.mc.L;
    j["seed"] = c.mc.seed;
    j["quad_order"] = c.quad_order;
    ordered_json failures = ordered_json::object();
    for (const auto& [n, msg] : report.failures) failures[std::to_string(n)] = msg;
    j["failures"] = failures;
    ordered_json metrics = ordered_json::object();
    for (const auto& s : report.summaries) {
        ordered_json m;
        m["status"] = status_name(s.status);
        if (s.fit) {
            m["slope"] = s.fit->slope;
            m["intercept"] = s.fit->intercept;
            m["r_squared"] = s.fit->r_squared;
        }
        if (s.bounds) {
            m["min_slope"] = s.bounds->min ? ordered_json(*s.bounds->min) : ordered_json();
            m["max_slope"] = s.bounds->max ? ordered_json(*s.bounds->max) : ordered_json();
        }
        m["verdict"] = s.pass ? ordered_json(*s.pass ? "pass" : "fail") : ordered_json();
        ordered_json pts = ordered_json::array();
        for (const auto& r : report.reports) {
            const Estimate& e = r.at(s.metric);
            pts.push_back({{"N", r.N}, {"value", e.value}, {"std_error", e.std_error}});
        }
        m["points"] = pts;
        metrics[s.metric] = m;
    }
    j["metrics"] = metrics;
    j["verdicts"] = report.all_verdicts_pass() ? "pass" : "fail";
    return j.dump(2) + "\n";
}

void write_suite_report(const SuiteReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (dir / name).string());
        f << content;
    };
    for (const auto& s : report.summaries) write(s.metric + ".csv", metric_csv(report, s.metric));
    write("summary.txt", summary_text(report));
    write("summary.json", summary_json(report));
}

}  // namespace fbsde
