#pragma once

#include "contagion/loss_rate.hpp"
#include "contagion/model.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace contagion {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

/// P(min_{s<=t} (y + alpha s + sigma B_s) > 0); 0 for y <= 0.
double fp_survival(double y, double t, double alpha, double sigma);

/// Downward jump of the loss process at a given time.
struct LossJump {
    double time = 0.0;
    double size = 0.0;  // <= 0
};

/// Drives the limit SDE either through a cumulative loss series Lambda on a
/// time grid (increments between nodes, plus optional jumps) or through a
/// rate lambda (integrated by the trapezoid rule).
struct LossDriver {
    TimeGrid grid;
    std::vector<double> cumulative;  // Lambda at grid nodes, Lambda_0 = 0
    std::vector<LossJump> jumps;

    static LossDriver from_cumulative(const TimeGrid& grid, std::vector<double> cumulative,
                                      std::vector<LossJump> jumps = {});
    static LossDriver from_rate(const LossRate& lam);
    static LossDriver none(const TimeGrid& grid);
};

struct LimitSdeOptions {
    bool bridge_correction = true;
    unsigned workers = 1;
    /// Grid steps at which surviving values are returned.
    std::vector<std::size_t> sample_steps;
};

struct LimitSdeResult {
    std::vector<double> times;
    std::vector<McEstimate> survival;                 // per grid node
    std::vector<std::vector<double>> survivor_samples;  // per requested step
};

/// Independent copies of Z_t = Z_0 + alpha t + Lambda_t + sigma B_t absorbed at 0.
LimitSdeResult simulate_limit_sde(const ModelParams& params, const InitialDistribution& dist,
                                  const LossDriver& loss, std::size_t n_paths, std::uint64_t seed,
                                  const LimitSdeOptions& options = {});

}  // namespace contagion
