#ifndef HOED_CLI_CONFIG_HPP
#define HOED_CLI_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoed/design.hpp"
#include "hoed/models.hpp"

namespace hoed::cli {

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CriteriaSettings {
    double lowrank_tol = 1e-8;
};

struct ValidateSettings {
    std::size_t samples = 4000;
    std::size_t mse_samples = 100000;
    std::size_t z0_samples = 1000000;
    int z0_grid = 8;
    double z0_noise_sigma = 0.5;
    int kl_instances = 20;
    int map_directions = 20;
    double sigmas = 3.0;
    /// Negative control: perturbs the closed-form EIG so the suite must fail.
    bool corrupt = false;
};

struct DesignSettings {
    int candidates = 10;
    int k = 3;
    Criterion criterion = Criterion::D;
    bool exhaustive = true;
};

struct RefineSettings {
    std::vector<int> grid_sizes = {32, 64, 128, 256};
};

struct ExperimentConfig {
    HeatModelConfig model;
    std::uint64_t seed = 20240601;
    CriteriaSettings criteria;
    ValidateSettings validate;
    DesignSettings design;
    RefineSettings refine;
    std::string output_dir = "out";
    /// Canonical JSON text of the parsed configuration (for hashing).
    std::string canonical;
};

/// Parses the JSON config text. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64-bit hash of the canonical config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace hoed::cli

#endif
