#pragma once

#include "contagion/loss_rate.hpp"
#include "contagion/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace contagion {

struct PdeOptions {
    /// Keep every stride-th time column (0 picks a stride giving ~200 columns).
    /// The last column is always kept. mass and slope are kept at every step.
    std::size_t snapshot_stride = 0;
    /// Implicit Euler half-steps replacing the first CN steps (damps the
    /// start-up oscillation of CN on non-smooth data).
    std::size_t rannacher_steps = 2;
    /// Absolute time of column 0; used by windowed solves.
    double start_time = 0.0;
};

/// Solution p(t, y) of the Dirichlet problem on [0, y_max].
struct DensityGrid {
    SpaceGrid space;
    TimeGrid time;
    double start_time = 0.0;
    std::vector<std::size_t> snapshot_steps;   // ascending step indices
    std::vector<std::vector<double>> snapshots;  // p at those steps, y_max/h + 1 nodes each
    std::vector<double> mass;                  // h * sum p, every step
    std::vector<double> boundary_slope;        // (4 p1 - p2) / (2h), every step
    bool cfl_warning = false;
    std::vector<std::string> warnings;

    [[nodiscard]] double time_at(std::size_t k) const noexcept { return start_time + time.time(k); }
    [[nodiscard]] const std::vector<double>& final_values() const { return snapshots.back(); }
    /// Column at step k; throws if it was not kept.
    [[nodiscard]] const std::vector<double>& column(std::size_t k) const;
};

/// f_nu sampled at the grid nodes, zero at both Dirichlet nodes.
std::vector<double> discretize(const InitialDistribution& f_nu, const SpaceGrid& space);

/// Crank-Nicolson solve driven by `lam` (defined on `time`). Throws
/// NumericalError if the mass drops below 1e-12.
DensityGrid solve_cdp(const ModelParams& params, const InitialDistribution& f_nu, const LossRate& lam,
                      const SpaceGrid& space, const TimeGrid& time, const PdeOptions& options = {});

/// Same, from an explicit initial column (e.g. the end of a previous window).
DensityGrid solve_cdp_from(const ModelParams& params, std::vector<double> p0, const LossRate& lam,
                           const SpaceGrid& space, const TimeGrid& time, const PdeOptions& options = {});

/// r_k = mass_k - mass_0 + (sigma^2/2) int_0^{t_k} slope ds (trapezoidal).
std::vector<double> conservation_residual(const DensityGrid& grid, double sigma);

struct SurvivalBoundsReport {
    std::vector<double> times;
    std::vector<double> lower;
    std::vector<double> mass;
    std::vector<double> upper;
    std::size_t violations = 0;
    double slack = 0.0;

    [[nodiscard]] bool ok() const noexcept { return violations == 0; }
};

/// Checks lower(t) - slack <= mass(t) <= upper(t) + slack at every step.
SurvivalBoundsReport check_survival_bounds(const DensityGrid& grid, const ModelParams& params,
                                           const LossRate& lam, const InitialDistribution& f_nu,
                                           double slack = 1e-3);

}  // namespace contagion
