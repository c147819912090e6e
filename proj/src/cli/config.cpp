#include "fbsde/cli/config.hpp"
#include "fbsde/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fbsde::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ConfigError("bad value '" + text + "' for " + key);
    }
    return value;
}

double parse_positive(const std::string& key, const std::string& text) {
    const double v = parse_number<double>(key, text);
    if (!(v > 0.0)) throw ConfigError(key + " must be positive");
    return v;
}

int parse_positive_int(const std::string& key, const std::string& text) {
    const int v = parse_number<int>(key, text);
    if (v <= 0) throw ConfigError(key + " must be positive");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("bad boolean '" + text + "' for " + key);
}

std::vector<int> parse_ladder(const std::string& key, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_positive_int(key, trim(item)));
    if (out.empty()) throw ConfigError(key + " is empty");
    return out;
}

const CatalogEntry* find_entry(const std::string& id) {
    for (const auto& e : catalog()) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

bool is_metric(const std::string& name) {
    const auto& names = metric_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

RunConfig default_config() {
    RunConfig c;
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) c.output_dir = dir;
    return c;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);

    if (key == "problem.id") {
        c.problem = value;
    } else if (key == "numerics.domain_width_sigmas") {
        c.width_sigmas = parse_positive(key, value);
    } else if (key.starts_with("problem.")) {
        const std::string rest = key.substr(8);
        const auto dot = rest.find('.');
        if (dot == std::string::npos) throw ConfigError("unknown key '" + key + "'");
        const std::string id = rest.substr(0, dot), param = rest.substr(dot + 1);
        const CatalogEntry* entry = find_entry(id);
        if (!entry) throw ConfigError("unknown problem '" + id + "' in key " + key);
        if (!entry->defaults.contains(param)) {
            throw ConfigError("unknown parameter '" + param + "' for problem '" + id + "'");
        }
        c.params[id][param] = parse_number<double>(key, value);
    } else if (key == "backward.scheme") {
        c.scheme = parse_scheme(value);
    } else if (key == "forward.N") {
        c.N = parse_positive_int(key, value);
    } else if (key == "forward.ladder") {
        c.ladder = parse_ladder(key, value);
    } else if (key == "forward.R") {
        c.mc.R = parse_positive_int(key, value);
    } else if (key == "numerics.quad_order") {
        c.quad_order = parse_positive_int(key, value);
    } else if (key == "numerics.dx_cap") {
        c.grid.dx_cap = parse_positive(key, value);
    } else if (key == "numerics.dx_coeff") {
        c.grid.dx_coeff = parse_positive(key, value);
    } else if (key == "numerics.quadrature_margin") {
        c.grid.quadrature_margin = parse_bool(key, value);
    } else if (key == "experiments.M") {
        const auto m = parse_number<std::int64_t>(key, value);
        if (m <= 0) throw ConfigError(key + " must be positive");
        c.mc.M = m;
    } else if (key == "experiments.L") {
        c.mc.L = parse_positive_int(key, value);
    } else if (key == "experiments.seed") {
        c.mc.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "run.threads") {
        c.mc.threads = parse_positive_int(key, value);
    } else if (key == "output.dir") {
        if (value.empty()) throw ConfigError("output.dir is empty");
        c.output_dir = value;
    } else if (key == "verdict.defaults") {
        c.default_verdicts = parse_bool(key, value);
    } else if (key.starts_with("verdict.")) {
        const std::string rest = key.substr(8);
        const auto dot = rest.rfind('.');
        const std::string metric = dot == std::string::npos ? rest : rest.substr(0, dot);
        const std::string side = dot == std::string::npos ? "" : rest.substr(dot + 1);
        if (!is_metric(metric)) throw ConfigError("unknown metric in key " + key);
        if (side != "min" && side != "max") throw ConfigError("unknown key '" + key + "'");
        c.verdicts[rest] =
            value == "none" ? std::nullopt : std::optional(parse_number<double>(key, value));
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

void load_config(RunConfig& config, std::istream& in, const std::string& origin) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const ModelError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    load_config(config, in, path.string());
}

void validate(const RunConfig& c, bool rates) {
    if (!find_entry(c.problem)) {
        std::string ids;
        for (const auto& e : catalog()) ids += " " + e.id;
        throw ConfigError("unknown problem '" + c.problem + "'; valid ids:" + ids);
    }
    if (c.quad_order > 64) throw ConfigError("numerics.quad_order must be at most 64");
    if (c.mc.R % c.mc.L != 0) throw ConfigError("experiments.L must divide forward.R");
    if (rates) {
        if (c.ladder.size() < 3) throw ConfigError("forward.ladder needs at least 3 entries");
        for (std::size_t i = 0; i < c.ladder.size(); ++i) {
            if (!power_of_two(c.ladder[i])) {
                throw ConfigError("forward.ladder entries must be powers of two");
            }
            if (i && c.ladder[i] <= c.ladder[i - 1]) {
                throw ConfigError("forward.ladder must be strictly ascending");
            }
        }
        if (c.mc.M < 100) throw ConfigError("experiments.M must be at least 100");
    }
}

CatalogOptions catalog_options(const RunConfig& c) {
    CatalogOptions opt;
    if (auto it = c.params.find(c.problem); it != c.params.end()) opt.params = it->second;
    opt.width_sigmas = c.width_sigmas;
    return opt;
}

std::map<std::string, SlopeBounds> default_verdicts(const std::string& problem,
                                                    SchemeKind scheme) {
    std::map<std::string, SlopeBounds> v;
    if (problem == "trig") {
        v["uN_gap"] = {-1.3, -0.8};
        if (scheme == SchemeKind::Euler) {
            v["e_2"] = {-0.65, -0.35};
            v["y_resid"] = {-1.25, -0.80};
            v["y_err_2"] = {-0.70, std::nullopt};
            v["z_resid"] = {-1.25, -0.75};
            v["y0_err"] = {-1.3, -0.8};
            v["z0_err"] = {-1.3, -0.8};
        }
    } else if (problem == "gbm") {
        if (scheme == SchemeKind::Euler) v["euler_strong"] = {-0.65, -0.40};
        else v["y_err_1"] = {std::nullopt, -0.8};
    } else if (problem == "const-sigma") {
        if (scheme == SchemeKind::Euler) v["y_err_2"] = {std::nullopt, -0.8};
    } else if (problem == "discount") {
        v["y0_err"] = {-1.2, -0.8};
    }
    return v;
}

std::map<std::string, SlopeBounds> effective_verdicts(const RunConfig& c) {
    std::map<std::string, SlopeBounds> v;
    if (c.default_verdicts) v = default_verdicts(c.problem, c.scheme);
    for (const auto& [key, value] : c.verdicts) {
        const auto dot = key.rfind('.');
        const std::string metric = key.substr(0, dot);
        SlopeBounds& b = v[metric];
        (key.substr(dot + 1) == "min" ? b.min : b.max) = value;
        if (!b.min && !b.max) v.erase(metric);
    }
    return v;
}

SuiteConfig suite_config(const RunConfig& c, const std::vector<std::string>& metrics) {
    SuiteConfig s;
    s.problem_id = c.problem;
    s.catalog = catalog_options(c);
    s.scheme = c.scheme;
    s.ladder = c.ladder;
    s.mc = c.mc;
    s.quad_order = c.quad_order;
    s.grid = c.grid;
    s.metrics = metrics;
    for (const auto& [metric, bounds] : effective_verdicts(c)) {
        if (metrics.empty() || std::find(metrics.begin(), metrics.end(), metric) != metrics.end()) {
            s.verdicts[metric] = bounds;
        }
    }
    return s;
}

}  // namespace fbsde::cli
