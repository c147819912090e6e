#pragma once

#include "fbsde/cli/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace fbsde::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitVerdict = 4 };

/// Metrics reported by the `expansion` command.
const std::vector<std::string>& expansion_metrics();

int cmd_problems(bool json, std::ostream& out);
int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_rates(const RunConfig& config, const std::vector<std::string>& metrics, std::ostream& out);
int cmd_moments(const RunConfig& config, std::ostream& out);

struct SelfCheckItem {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SelfCheckOptions {
    /// Added to the first Gauss-Hermite weight before the moment check.
    double weight_perturbation = 0.0;
};

std::vector<SelfCheckItem> selfcheck(const SelfCheckOptions& options = {});
int cmd_selfcheck(const SelfCheckOptions& options, std::ostream& out);

/// Full command line (without the program name). Errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fbsde::cli
