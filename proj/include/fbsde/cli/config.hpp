#pragma once

#include "fbsde/experiments.hpp"
#include "fbsde/forward.hpp"
#include "fbsde/model.hpp"
#include "fbsde/numerics.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fbsde::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "FBSDE_OUTPUT_DIR";

/// Everything a command needs. Populated from defaults, then a config file,
/// then command-line overrides, all through apply_setting().
///
/// Keys (flat, dotted):
///   problem.id, problem.<id>.<param>
///   backward.scheme
///   forward.N, forward.ladder (comma list), forward.R
///   numerics.quad_order, numerics.dx_cap, numerics.dx_coeff, numerics.quadrature_margin,
///   numerics.domain_width_sigmas
///   experiments.M, experiments.L, experiments.seed
///   run.threads
///   output.dir
///   verdict.defaults (bool), verdict.<metric>.min, verdict.<metric>.max ("none" clears)
struct RunConfig {
    std::string problem = "trig";
    double width_sigmas = 6.0;
    std::map<std::string, ParamMap> params;  // by problem id
    SchemeKind scheme = SchemeKind::Euler;
    int N = 32;
    std::vector<int> ladder{8, 16, 32, 64, 128};
    MonteCarloOptions mc;
    int quad_order = 20;
    GridOptions grid;
    std::filesystem::path output_dir = "fbsde-out";
    bool default_verdicts = true;
    /// Explicit per-side overrides keyed "<metric>.min" / "<metric>.max";
    /// an empty value clears that side.
    std::map<std::string, std::optional<double>> verdicts;
};

/// Defaults, with output.dir taken from FBSDE_OUTPUT_DIR when set.
RunConfig default_config();

void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// "key = value" lines; '#' starts a comment; blank lines ignored.
void load_config(RunConfig& config, std::istream& in, const std::string& origin = "<config>");
void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Checks cross-field invariants. `rates` additionally demands a ladder of at
/// least three ascending powers of two.
void validate(const RunConfig& config, bool rates);

CatalogOptions catalog_options(const RunConfig& config);

/// Built-in thresholds for the (problem, scheme) pair.
std::map<std::string, SlopeBounds> default_verdicts(const std::string& problem, SchemeKind scheme);

/// Defaults (if enabled) overlaid with explicit verdicts.
std::map<std::string, SlopeBounds> effective_verdicts(const RunConfig& config);

SuiteConfig suite_config(const RunConfig& config, const std::vector<std::string>& metrics = {});

}  // namespace fbsde::cli
