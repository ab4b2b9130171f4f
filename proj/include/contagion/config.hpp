#pragma once

#include "contagion/fixed_point.hpp"
#include "contagion/model.hpp"
#include "contagion/particle_system.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace contagion {

/// Environment variable whose value replaces simulation.seed.
inline constexpr const char* kSeedEnv = "CONTAGION_SEED";

struct SimulationConfig {
    std::size_t n_banks = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    SimulationOptions options;
};

struct PdeConfig {
    double h = 1e-3;
    double y_max = 8.0;
    double dt = 1e-4;
};

struct FixedPointConfig {
    double window_length = 0.05;
    double M0 = 0.0;
    double tol = 1e-7;
    std::size_t max_iter = 200;
    double explosion_threshold = 1e3;
};

struct AnalysisConfig {
    std::vector<double> eta_ladder = {0.1, 0.05, 0.025};
    double epsilon = 1e-4;
    double holder_t0 = 0.0;
    double holder_t1 = 1.0;
};

struct CompareConfig {
    std::vector<std::size_t> n_ladder = {1000, 10000};
    std::size_t n_seeds = 5;
    std::size_t mc_paths = 100000;
};

struct RunConfig {
    ModelParams model;
    nlohmann::json initial_spec;  // as given, for manifests
    InitialDistribution initial = InitialDistribution::uniform(1.0, 1.0, 0.5);
    SimulationConfig simulation;
    PdeConfig pde;
    FixedPointConfig fixedpoint;
    AnalysisConfig analysis;
    CompareConfig compare;
    std::string output_dir = "out";
    nlohmann::json source;  // the parsed document, after the seed override

    [[nodiscard]] FixedPointOptions fixed_point_options() const;
    [[nodiscard]] SpaceGrid space() const { return {pde.h, pde.y_max}; }
};

/// Parses and validates a config document. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& doc, bool apply_env_seed = true);
RunConfig load_config(const std::filesystem::path& path, bool apply_env_seed = true);

InitialDistribution parse_initial(const nlohmann::json& spec);

}  // namespace contagion
