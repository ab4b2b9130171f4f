#include "contagion/compare.hpp"

#include "contagion/errors.hpp"
#include "contagion/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace contagion {

double interpolate(const TimeGrid& grid, const std::vector<double>& values, double t) {
    require(values.size() == grid.n_steps + 1, "series does not match its grid");
    if (grid.n_steps == 0 || t <= 0.0) {
        return values.front();
    }
    const double x = std::min(t / grid.dt, static_cast<double>(grid.n_steps));
    const auto k = std::min(static_cast<std::size_t>(x), grid.n_steps - 1);
    const double w = x - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
}

double loss_gap(const SimulationResult& sim, const TimeGrid& grid, const std::vector<double>& loss) {
    double gap = 0.0;
    for (const SeriesRow& row : sim.series) {
        gap = std::max(gap, std::abs(row.cum_log_loss - interpolate(grid, loss, row.time)));
    }
    return gap;
}

double median(std::vector<double> xs) {
    require(!xs.empty(), "median of an empty sample");
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

CompareReport compare_methods(const ModelParams& params, const InitialDistribution& f_nu, const LossRate& lam,
                              const DensityGrid& density, const CompareOptions& options) {
    require(!options.n_ladder.empty() && options.n_seeds >= 1, "compare needs a ladder and at least one seed");
    require(density.mass.size() == lam.values.size(), "density and loss rate grids differ");
    const std::vector<double> loss = loss_from_rate(lam);
    const double horizon = lam.time.time(lam.time.n_steps);
    ModelParams sim_params = params;
    sim_params.horizon = horizon;
    const TimeGrid sim_grid = TimeGrid::covering(horizon, options.sim_dt);

    CompareReport rep;
    SimulationOptions so;
    so.bridge_correction = options.bridge_correction;
    so.workers = options.workers;
    for (std::size_t n : options.n_ladder) {
        LadderRow row;
        row.n_banks = n;
        for (std::size_t s = 0; s < options.n_seeds; ++s) {
            const std::uint64_t seed = options.base_seed + s;
            const SimulationResult sim = simulate(sim_params, f_nu, n, sim_grid, seed, so);
            row.seeds.push_back(seed);
            row.gaps.push_back(loss_gap(sim, lam.time, loss));
        }
        row.median_gap = median(row.gaps);
        row.mean_gap = std::accumulate(row.gaps.begin(), row.gaps.end(), 0.0) / static_cast<double>(row.gaps.size());
        row.max_gap = *std::max_element(row.gaps.begin(), row.gaps.end());
        if (!rep.ladder.empty() && !(row.median_gap < rep.ladder.back().median_gap)) {
            rep.ladder_monotone = false;
        }
        rep.ladder.push_back(std::move(row));
    }

    LimitSdeOptions lo;
    lo.bridge_correction = options.bridge_correction;
    lo.workers = options.workers;
    const LimitSdeResult mc =
        simulate_limit_sde(sim_params, f_nu, LossDriver::from_rate(lam), options.mc_paths, options.base_seed, lo);
    const std::size_t n_steps = lam.time.n_steps;
    for (std::size_t c = 1; c <= options.n_checkpoints && n_steps > 0; ++c) {
        const std::size_t k = (c * n_steps) / options.n_checkpoints;
        Checkpoint cp;
        cp.time = lam.time.time(k);
        cp.pde_mass = density.mass[k] / density.mass[0];
        cp.mc_survival = mc.survival[k].value;
        cp.std_error = mc.survival[k].std_error;
        const double diff = std::abs(cp.mc_survival - cp.pde_mass);
        cp.z = diff / std::max(cp.std_error, 1.0 / static_cast<double>(options.mc_paths));
        rep.mc_pde_gap = std::max(rep.mc_pde_gap, diff);
        rep.max_z = std::max(rep.max_z, cp.z);
        rep.checkpoints.push_back(cp);
    }
    return rep;
}

}  // namespace contagion
