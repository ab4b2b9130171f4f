#pragma once

#include "contagion/fixed_point.hpp"
#include "contagion/model.hpp"
#include "contagion/particle_system.hpp"
#include "contagion/pde.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace contagion {

/// Linear interpolation of node values on a uniform grid; t is clamped to [0, horizon].
double interpolate(const TimeGrid& grid, const std::vector<double>& values, double t);

/// sup over the simulation grid of |Lambda^N(t) - Lambda(t)|, Lambda given at the nodes of `grid`.
double loss_gap(const SimulationResult& sim, const TimeGrid& grid, const std::vector<double>& loss);

struct LadderRow {
    std::size_t n_banks = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> gaps;
    double median_gap = 0.0;
    double mean_gap = 0.0;
    double max_gap = 0.0;
};

struct Checkpoint {
    double time = 0.0;
    double pde_mass = 0.0;
    double mc_survival = 0.0;
    double std_error = 0.0;
    double z = 0.0;  // |mc - pde| / max(std_error, 1 / mc_paths)
};

struct CompareOptions {
    std::vector<std::size_t> n_ladder = {1000, 10000};
    std::size_t n_seeds = 5;
    std::uint64_t base_seed = 1;  // seeds base_seed, base_seed + 1, ...
    double sim_dt = 1e-3;
    std::size_t mc_paths = 100000;
    std::size_t n_checkpoints = 10;
    bool bridge_correction = true;
    unsigned workers = 1;
};

struct CompareReport {
    std::vector<LadderRow> ladder;
    std::vector<Checkpoint> checkpoints;
    double mc_pde_gap = 0.0;  // max |mc - pde mass| over checkpoints
    double max_z = 0.0;
    bool ladder_monotone = true;  // median gap strictly decreasing in N
};

double median(std::vector<double> xs);

/// Particle Lambda^N over the N ladder and the limit SDE driven by the
/// fixed point, both against the PDE solution on the fixed-point grid.
CompareReport compare_methods(const ModelParams& params, const InitialDistribution& f_nu, const LossRate& lam,
                              const DensityGrid& density, const CompareOptions& options);

}  // namespace contagion
