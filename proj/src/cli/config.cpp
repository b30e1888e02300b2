#include "hoed/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hoed/errors.hpp"

namespace hoed::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

json to_json(const ExperimentConfig& c) {
    const auto& m = c.model;
    return json{
        {"model",
         {{"n", m.n},
          {"length", m.length},
          {"kappa", m.kappa},
          {"final_time", m.final_time},
          {"time_steps", m.time_steps},
          {"gamma", m.gamma},
          {"delta", m.delta},
          {"sensors", m.sensors},
          {"noise_sigma", m.noise_sigma}}},
        {"seed", c.seed},
        {"criteria", {{"lowrank_tol", c.criteria.lowrank_tol}}},
        {"validate",
         {{"samples", c.validate.samples},
          {"mse_samples", c.validate.mse_samples},
          {"z0_samples", c.validate.z0_samples},
          {"z0_grid", c.validate.z0_grid},
          {"z0_noise_sigma", c.validate.z0_noise_sigma},
          {"kl_instances", c.validate.kl_instances},
          {"map_directions", c.validate.map_directions},
          {"sigmas", c.validate.sigmas},
          {"corrupt", c.validate.corrupt}}},
        {"design",
         {{"candidates", c.design.candidates},
          {"k", c.design.k},
          {"criterion", to_string(c.design.criterion)},
          {"exhaustive", c.design.exhaustive}}},
        {"refine", {{"grid_sizes", c.refine.grid_sizes}}},
        {"output", {{"dir", c.output_dir}}},
    };
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(root, {"model", "seed", "criteria", "validate", "design", "refine", "output"}, "config");

    ExperimentConfig cfg;
    read(root, "seed", cfg.seed, "config");

    if (root.contains("model")) {
        const json& m = root["model"];
        reject_unknown(m,
                       {"n", "length", "kappa", "final_time", "time_steps", "gamma", "delta", "sensors",
                        "num_sensors", "noise_sigma"},
                       "model");
        auto& mc = cfg.model;
        read(m, "n", mc.n, "model");
        read(m, "length", mc.length, "model");
        read(m, "kappa", mc.kappa, "model");
        read(m, "final_time", mc.final_time, "model");
        read(m, "time_steps", mc.time_steps, "model");
        read(m, "gamma", mc.gamma, "model");
        read(m, "delta", mc.delta, "model");
        if (m.contains("sensors") && m.contains("num_sensors")) {
            throw ConfigError("model: give either sensors or num_sensors, not both");
        }
        if (m.contains("num_sensors")) {
            int count = 0;
            read(m, "num_sensors", count, "model");
            if (count < 0) {
                throw ConfigError("model.num_sensors must be non-negative");
            }
            mc.sensors = equispaced_sensors(count, mc.length);
        }
        read(m, "sensors", mc.sensors, "model");
        if (m.contains("noise_sigma")) {
            if (m["noise_sigma"].is_number()) {
                mc.noise_sigma = {m["noise_sigma"].get<double>()};
            } else {
                read(m, "noise_sigma", mc.noise_sigma, "model");
            }
        }
    }
    if (root.contains("criteria")) {
        const json& c = root["criteria"];
        reject_unknown(c, {"lowrank_tol"}, "criteria");
        read(c, "lowrank_tol", cfg.criteria.lowrank_tol, "criteria");
    }
    if (root.contains("validate")) {
        const json& v = root["validate"];
        reject_unknown(v,
                       {"samples", "mse_samples", "z0_samples", "z0_grid", "z0_noise_sigma", "kl_instances",
                        "map_directions", "sigmas", "corrupt"},
                       "validate");
        auto& vs = cfg.validate;
        read(v, "samples", vs.samples, "validate");
        read(v, "mse_samples", vs.mse_samples, "validate");
        read(v, "z0_samples", vs.z0_samples, "validate");
        read(v, "z0_grid", vs.z0_grid, "validate");
        read(v, "z0_noise_sigma", vs.z0_noise_sigma, "validate");
        read(v, "kl_instances", vs.kl_instances, "validate");
        read(v, "map_directions", vs.map_directions, "validate");
        read(v, "sigmas", vs.sigmas, "validate");
        read(v, "corrupt", vs.corrupt, "validate");
    }
    if (root.contains("design")) {
        const json& d = root["design"];
        reject_unknown(d, {"candidates", "k", "criterion", "exhaustive"}, "design");
        read(d, "candidates", cfg.design.candidates, "design");
        read(d, "k", cfg.design.k, "design");
        read(d, "exhaustive", cfg.design.exhaustive, "design");
        std::string crit = to_string(cfg.design.criterion);
        read(d, "criterion", crit, "design");
        if (crit == "D") {
            cfg.design.criterion = Criterion::D;
        } else if (crit == "A") {
            cfg.design.criterion = Criterion::A;
        } else {
            throw ConfigError("design.criterion must be \"D\" or \"A\"");
        }
    }
    if (root.contains("refine")) {
        const json& r = root["refine"];
        reject_unknown(r, {"grid_sizes"}, "refine");
        read(r, "grid_sizes", cfg.refine.grid_sizes, "refine");
    }
    if (root.contains("output")) {
        const json& o = root["output"];
        reject_unknown(o, {"dir"}, "output");
        read(o, "dir", cfg.output_dir, "output");
    }

    try {
        cfg.model.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    const auto& vs = cfg.validate;
    if (vs.samples < 2 || vs.mse_samples < 2 || vs.z0_samples < 2) {
        throw ConfigError("validate: sample counts must be at least 2");
    }
    if (vs.z0_grid < 4 || !(vs.z0_noise_sigma > 0.0) || !(vs.sigmas > 0.0)) {
        throw ConfigError("validate: z0_grid >= 4, z0_noise_sigma > 0 and sigmas > 0 required");
    }
    if (vs.kl_instances < 1 || vs.map_directions < 1) {
        throw ConfigError("validate: kl_instances and map_directions must be positive");
    }
    if (cfg.design.candidates < 0 || cfg.design.k < 0 || cfg.design.k > cfg.design.candidates) {
        throw ConfigError("design: need 0 <= k <= candidates");
    }
    if (cfg.refine.grid_sizes.empty()) {
        throw ConfigError("refine.grid_sizes must not be empty");
    }
    for (int n : cfg.refine.grid_sizes) {
        if (n < 4) {
            throw ConfigError("refine.grid_sizes entries must be at least 4");
        }
    }
    if (!(cfg.criteria.lowrank_tol > 0.0)) {
        throw ConfigError("criteria.lowrank_tol must be positive");
    }
    cfg.canonical = to_json(cfg).dump();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = cfg.canonical.empty() ? to_json(cfg).dump() : cfg.canonical;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace hoed::cli
