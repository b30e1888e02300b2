#ifndef HOED_CLI_COMMANDS_HPP
#define HOED_CLI_COMMANDS_HPP

#include <optional>
#include <ostream>
#include <string>

#include "hoed/cli/config.hpp"

namespace hoed::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kValidationFailed = 1,
    kConfigFailure = 2,
    kNumericalFailure = 3,
};

struct RunOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

/// Writes criteria.json and criteria_spectrum.csv.
int cmd_criteria(const ExperimentConfig& cfg, int threads, std::ostream& log);
/// Writes validate.json and validate.csv; kValidationFailed if any row fails.
int cmd_validate(const ExperimentConfig& cfg, int threads, std::ostream& log);
/// Writes design.json and design.csv.
int cmd_design(const ExperimentConfig& cfg, int threads, std::ostream& log);
/// Writes refine.json and refine.csv.
int cmd_refine(const ExperimentConfig& cfg, int threads, std::ostream& log);

/// Loads the config, applies overrides and dispatches; maps exceptions to
/// exit codes with a message on `err`.
int run(const RunOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace hoed::cli

#endif
