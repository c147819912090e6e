#include "fbsde/cli/commands.hpp"
#include "fbsde/backward.hpp"
#include "fbsde/error.hpp"
#include "fbsde/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbsde::cli {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << content;
}

double double_factorial_moment(int m) {
    if (m % 2) return 0.0;
    double v = 1.0;
    for (int j = m - 1; j > 1; j -= 2) v *= j;
    return v;
}

}  // namespace

const std::vector<std::string>& expansion_metrics() {
    static const std::vector<std::string> names{"y_err_2", "y_resid", "z_resid"};
    return names;
}

int cmd_problems(bool json, std::ostream& out) {
    if (json) {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& e : catalog()) {
            nlohmann::ordered_json params = nlohmann::ordered_json::object();
            for (const auto& [k, v] : e.defaults) params[k] = v;
            list.push_back(
                {{"id", e.id}, {"summary", e.summary}, {"hypotheses", e.hypotheses}, {"params", params}});
        }
        out << list.dump(2) << '\n';
        return kExitOk;
    }
    for (const auto& e : catalog()) {
        out << e.id << "\n  " << e.summary << "\n  hypotheses: " << e.hypotheses << "\n  params:";
        for (const auto& [k, v] : e.defaults) out << ' ' << k << '=' << fmt("%g", v);
        out << '\n';
    }
    return kExitOk;
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
    validate(config, false);
    const Problem problem = builtin(config.problem, catalog_options(config));
    check_scheme(config.scheme, problem);
    const QuadratureRule rule = gauss_hermite(config.quad_order);
    const TimeGrid time = make_time_grid(problem.coefficients.T, config.N);
    const SpatialGrid spatial = build_grid(problem, rule, time, config.scheme, config.grid);
    const DiscreteSolution sol =
        dp_solve(problem, time, config.scheme, rule, spatial, config.mc.threads);

    const double x0 = problem.coefficients.x0;
    const YZ at0 = eval_solution(sol, 0, x0);

    std::ostringstream table;
    write_solution(table, sol, problem.id);
    const auto table_path = config.output_dir / "solution.csv";
    write_file(table_path, table.str());

    std::ostringstream full;
    full << "problem = " << problem.id << '\n'
         << "scheme = " << to_string(config.scheme) << '\n'
         << "N = " << config.N << '\n'
         << "grid.lo = " << fmt("%.17g", spatial.lo) << '\n'
         << "grid.hi = " << fmt("%.17g", spatial.hi) << '\n'
         << "grid.n_pts = " << spatial.n_pts << '\n'
         << "x0 = " << fmt("%.17g", x0) << '\n'
         << "uN = " << fmt("%.17g", at0.y) << '\n'
         << "zN = " << fmt("%.17g", at0.z) << '\n';
    out << "problem " << problem.id << ", scheme " << to_string(config.scheme) << ", N = "
        << config.N << ", grid " << spatial.n_pts << " points on [" << fmt("%g", spatial.lo)
        << ", " << fmt("%g", spatial.hi) << "]\n";
    out << "u^N(0,x0) = " << fmt("%.6g", at0.y) << '\n';
    out << "z^N(0,x0) = " << fmt("%.6g", at0.z) << '\n';
    if (problem.closed_form) {
        const TrueSolution truth = true_solution(problem, 0.0, x0);
        const double gap = std::abs(at0.y - truth.y);
        full << "u = " << fmt("%.17g", truth.y) << '\n'
             << "gap = " << fmt("%.17g", gap) << '\n';
        out << "u(0,x0) = " << fmt("%.6g", truth.y) << '\n';
        out << "gap |u^N - u| = " << fmt("%.6e", gap) << '\n';
    }
    full << "outside_fraction = " << fmt("%.17g", sol.diagnostics.outside_fraction()) << '\n';
    write_file(config.output_dir / "solve.txt", full.str());
    out << "wrote " << table_path.string() << '\n';
    return kExitOk;
}

int cmd_rates(const RunConfig& config, const std::vector<std::string>& metrics, std::ostream& out) {
    validate(config, true);
    const SuiteReport report = run_suite(suite_config(config, metrics));
    write_suite_report(report, config.output_dir);
    out << summary_text(report);
    if (!report.failures.empty() || !report.all_verdicts_pass()) return kExitVerdict;
    return kExitOk;
}

int cmd_moments(const RunConfig& config, std::ostream& out) {
    validate(config, true);
    const Problem problem = builtin(config.problem, catalog_options(config));
    const MomentReport report = moment_check(problem, config.ladder, config.mc);

    std::ostringstream csv, text;
    csv << "p,quantity,h,value\n";
    text << "# fbsde moment check\nproblem = " << problem.id << "\nM = " << config.mc.M
         << "\nseed = " << config.mc.seed << '\n';
    for (const auto& s : report.series) {
        for (const auto& [h, v] : s.points) {
            csv << s.p << ',' << s.quantity << ',' << fmt("%.17g", h) << ',' << fmt("%.17g", v)
                << '\n';
        }
        const std::string key = "moment." + s.quantity + ".p" + std::to_string(s.p) + ".";
        text << key << "slope = " << fmt("%.6f", s.slope) << '\n'
             << key << "min_slope = " << fmt("%g", s.p - 0.2) << '\n'
             << key << "verdict = " << (s.pass ? "pass" : "fail") << '\n';
    }
    text << "verdicts = " << (report.pass() ? "pass" : "fail") << '\n';
    write_file(config.output_dir / "moments.csv", csv.str());
    write_file(config.output_dir / "moments.txt", text.str());
    out << text.str();
    return report.pass() ? kExitOk : kExitVerdict;
}

std::vector<SelfCheckItem> selfcheck(const SelfCheckOptions& options) {
    std::vector<SelfCheckItem> items;
    auto add = [&](std::string name, double measured, double tol) {
        items.push_back({std::move(name), measured, tol, std::isfinite(measured) && measured <= tol});
    };

    QuadratureRule rule = gauss_hermite(20);
    rule.weights.front() += options.weight_perturbation;
    double moment_err = 0.0;
    for (int m = 0; m < 2 * rule.order(); ++m) {
        const double exact = double_factorial_moment(m);
        const double got = integrate(rule, [m](double x) { return std::pow(x, m); });
        // Odd moments vanish; scale them by the neighbouring even moment.
        const double scale = std::max(1.0, double_factorial_moment(m + m % 2));
        moment_err = std::max(moment_err, std::abs(got - exact) / scale);
    }
    add("quadrature moments (order 20, degree <= 39, relative)", moment_err, 1e-12);

    {
        const auto cubic = [](double x) { return 0.5 - x + 0.75 * x * x - 0.2 * x * x * x; };
        const SpatialGrid g{-1.0, 2.0, 31};
        std::vector<double> v(g.n_pts);
        for (int i = 0; i < g.n_pts; ++i) v[i] = cubic(g.x(i));
        const Interpolant interp(g, v);
        double err = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = g.lo + (g.hi - g.lo) * i / 1000.0;
            err = std::max(err, std::abs(interp(x) - cubic(x)));
        }
        add("interpolation reproduces cubics", err, 1e-11);
    }

    for (const auto& entry : catalog()) {
        const Problem p = builtin(entry.id);
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 100; ++i) {
            const double t = p.coefficients.T * rng::uniform_open(7, 2 * i, 0);
            const double x = p.domain.lo + p.domain.width() * rng::uniform_open(7, 2 * i + 1, 0);
            worst = std::max(worst, std::abs(pde_residual(p, t, x)));
        }
        add("pde residual " + entry.id, worst, 1e-8);
    }

    {
        const Problem p = builtin("abm-linear");
        const QuadratureRule r = gauss_hermite(20);
        const TimeGrid time = make_time_grid(p.coefficients.T, 8);
        const SpatialGrid g = build_grid(p, r, time, SchemeKind::Euler, {});
        const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, r, g);
        const double s = p.coefficients.sigma(0.0, 0.0);
        double err = 0.0;
        for (int i = 0; i < g.n_pts; ++i) {
            const YZ v = eval_solution(sol, 0, g.x(i));
            err = std::max({err, std::abs(v.y - g.x(i)), std::abs(v.z - s)});
        }
        add("martingale: abm-linear keeps (y, z) = (x, sigma)", err, 1e-10);
    }

    {
        const Problem p = builtin("discount");
        const QuadratureRule r = gauss_hermite(20);
        const TimeGrid time = make_time_grid(p.coefficients.T, 4);
        const SpatialGrid g = build_grid(p, r, time, SchemeKind::Euler, {});
        const DiscreteSolution sol = dp_solve(p, time, SchemeKind::Euler, r, g);
        const double got = eval_y(sol, 0, p.coefficients.x0);
        add("discount u^N(0,x0) = (1 - rh)^N", std::abs(got - std::pow(1.0 - 0.1 * 0.25, 4)),
            1e-12);
    }
    return items;
}

int cmd_selfcheck(const SelfCheckOptions& options, std::ostream& out) {
    bool ok = true;
    for (const auto& item : selfcheck(options)) {
        out << (item.pass ? "PASS " : "FAIL ") << item.name << ": measured "
            << fmt("%.3e", item.measured) << ", tolerance " << fmt("%.1e", item.tolerance) << '\n';
        ok = ok && item.pass;
    }
    out << (ok ? "selfcheck passed\n" : "selfcheck failed\n");
    return ok ? kExitOk : kExitVerdict;
}

namespace {

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> shortcuts;
};

void add_common(CLI::App* sub, CommonOptions& opts, bool rates) {
    sub->add_option("-c,--config", opts.config_file, "Config file (key = value lines)");
    sub->add_option("--set", opts.sets, "Override a config key: key=value (repeatable)");
    auto shortcut = [&](const char* flag, const char* key, const char* help) {
        sub->add_option_function<std::string>(
            flag, [&opts, key](const std::string& v) { opts.shortcuts.emplace_back(key, v); },
            help);
    };
    shortcut("-p,--problem", "problem.id", "Problem id");
    shortcut("-s,--scheme", "backward.scheme", "euler | milstein | exact-abm | exact-gbm");
    if (rates) {
        shortcut("--ladder", "forward.ladder", "Comma separated step counts");
        shortcut("-M,--paths", "experiments.M", "Monte Carlo paths");
        shortcut("--seed", "experiments.seed", "Random seed");
    } else {
        shortcut("-N,--steps", "forward.N", "Time steps");
    }
    shortcut("-j,--threads", "run.threads", "Worker threads (does not change results)");
    shortcut("-o,--out", "output.dir", "Output directory");
}

RunConfig resolve(const CommonOptions& opts) {
    RunConfig config = default_config();
    if (!opts.config_file.empty()) load_config_file(config, opts.config_file);
    for (const auto& [key, value] : opts.shortcuts) apply_setting(config, key, value);
    for (const auto& s : opts.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    return config;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerics lab for decoupled forward-backward SDEs", "fbsde"};
    app.require_subcommand(1);

    bool json = false;
    auto* problems = app.add_subcommand("problems", "List the built-in problems");
    problems->add_flag("--json", json, "Machine-readable listing");

    CommonOptions solve_opts, rates_opts, expansion_opts, moments_opts;
    auto* solve = app.add_subcommand("solve", "Backward solve for one N; writes solution.csv");
    add_common(solve, solve_opts, false);
    auto* rates = app.add_subcommand("rates", "Rate suite over an N ladder");
    add_common(rates, rates_opts, true);
    auto* expansion = app.add_subcommand("expansion", "Rate suite restricted to residual metrics");
    add_common(expansion, expansion_opts, true);
    auto* moments = app.add_subcommand("moments", "Increment moment check");
    add_common(moments, moments_opts, true);
    auto* check = app.add_subcommand("selfcheck", "Fast deterministic checks");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitConfig;
    }

    try {
        if (problems->parsed()) return cmd_problems(json, out);
        if (solve->parsed()) return cmd_solve(resolve(solve_opts), out);
        if (rates->parsed()) return cmd_rates(resolve(rates_opts), {}, out);
        if (expansion->parsed()) return cmd_rates(resolve(expansion_opts), expansion_metrics(), out);
        if (moments->parsed()) return cmd_moments(resolve(moments_opts), out);
        if (check->parsed()) return cmd_selfcheck({}, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ModelError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    err << app.help();
    return kExitConfig;
}

}  // namespace fbsde::cli
