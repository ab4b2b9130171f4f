#pragma once

#include "contagion/loss_rate.hpp"
#include "contagion/model.hpp"
#include "contagion/pde.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace contagion {

struct FixedPointOptions {
    SpaceGrid space;
    double dt = 1e-4;
    double window_length = 0.05;
    double M0 = 0.0;  // <= 0: 10 sigma / sqrt(window_length)
    double tol = 1e-7;
    std::size_t max_iter = 200;
    double explosion_threshold = 1e3;
    /// Re-run each window from lambda = 0 and record the distance between
    /// the two fixed points.
    bool uniqueness_probe = true;
};

struct WindowReport {
    double start = 0.0;
    double end = 0.0;
    std::size_t iterations = 0;
    double contraction = 0.0;  // largest ratio of successive iterate changes
    double residual = 0.0;     // ||lambda - picard_map(lambda)||_{L2(window)}
    double M = 0.0;
    double l2_window = 0.0;
    double probe_gap = -1.0;  // < 0 when no probe ran
    std::size_t probe_iterations = 0;
};

struct FixedPointReport {
    std::vector<WindowReport> windows;
    double final_residual = 0.0;
    std::size_t window_halvings = 0;
    std::size_t truncation_doublings = 0;
    std::vector<std::string> notes;  // failures and retries, in order
};

struct FixedPointResult {
    LossRate lam;
    FixedPointReport report;
};

struct PicardOutput {
    LossRate lam;
    DensityGrid density;
};

/// One Picard application on a window: solve the PDE from `entry` driven by
/// lam_in truncated to the L2(window) ball of radius M, then read off
/// lambda_out = -C (sigma^2/2) slope / mass.
PicardOutput picard_map(const LossRate& lam_in, double window_start, const ModelParams& params,
                        const std::vector<double>& entry, const SpaceGrid& space, double M);

FixedPointResult solve_lambda(const ModelParams& params, const InitialDistribution& f_nu,
                              const FixedPointOptions& options);

}  // namespace contagion
