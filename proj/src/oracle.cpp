#include "contagion/oracle.hpp"

#include "contagion/errors.hpp"
#include "contagion/normal.hpp"
#include "contagion/parallel.hpp"
#include "contagion/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace contagion {

double fp_survival(double y, double t, double alpha, double sigma) {
    require(t > 0.0 && sigma > 0.0, "fp_survival needs t > 0 and sigma > 0");
    if (!(y > 0.0)) {
        return 0.0;
    }
    const double s = sigma * std::sqrt(t);
    if (alpha == 0.0) {
        return std::erf(y / (s * std::numbers::sqrt2));
    }
    const double first = norm_cdf((y + alpha * t) / s);
    // exp(-2 alpha y / sigma^2) Phi(x2) in log space: the factor overflows
    // for strongly negative drift while Phi(x2) underflows.
    const double log_second = -2.0 * alpha * y / (sigma * sigma) + log_norm_cdf((-y + alpha * t) / s);
    const double value = first - std::exp(log_second);
    return std::clamp(value, 0.0, 1.0);
}

LossDriver LossDriver::from_cumulative(const TimeGrid& grid, std::vector<double> cumulative,
                                       std::vector<LossJump> jumps) {
    grid.validate();
    require(cumulative.size() == grid.n_steps + 1, "loss series needs one value per grid node");
    for (std::size_t k = 1; k < cumulative.size(); ++k) {
        require(cumulative[k] <= cumulative[k - 1], "loss series must be non-increasing");
    }
    for (const LossJump& j : jumps) {
        require(j.size <= 0.0, "loss jumps must be <= 0");
    }
    std::sort(jumps.begin(), jumps.end(), [](const LossJump& a, const LossJump& b) { return a.time < b.time; });
    LossDriver d;
    d.grid = grid;
    d.cumulative = std::move(cumulative);
    d.jumps = std::move(jumps);
    return d;
}

LossDriver LossDriver::from_rate(const LossRate& lam) {
    return from_cumulative(lam.time, loss_from_rate(lam));
}

LossDriver LossDriver::none(const TimeGrid& grid) {
    return from_cumulative(grid, std::vector<double>(grid.n_steps + 1, 0.0));
}

LimitSdeResult simulate_limit_sde(const ModelParams& params, const InitialDistribution& dist,
                                  const LossDriver& loss, std::size_t n_paths, std::uint64_t seed,
                                  const LimitSdeOptions& options) {
    params.validate();
    require(n_paths >= 1, "n_paths must be >= 1");
    const TimeGrid& grid = loss.grid;
    const std::size_t n_steps = grid.n_steps;
    for (std::size_t k : options.sample_steps) {
        require(k <= n_steps, "sample step beyond the loss grid");
    }
    const double dt = grid.dt;
    const double vol = params.sigma * std::sqrt(dt);
    const double bridge_scale = 2.0 / (params.sigma * params.sigma * dt);

    // Jump total applied at the end of each step.
    std::vector<double> jump_at(n_steps + 1, 0.0);
    for (const LossJump& j : loss.jumps) {
        const auto k = static_cast<std::size_t>(std::clamp(std::ceil(j.time / dt - 1e-9), 0.0,
                                                           static_cast<double>(n_steps)));
        jump_at[k] += j.size;
    }

    const CounterStream stream(seed);
    const std::size_t chunks = chunk_count(n_paths, options.workers);
    std::vector<std::vector<std::size_t>> alive(chunks, std::vector<std::size_t>(n_steps + 1, 0));
    std::vector<std::vector<std::vector<double>>> samples(
        chunks, std::vector<std::vector<double>>(options.sample_steps.size()));

    parallel_chunks(n_paths, options.workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        auto& count = alive[c];
        auto& out = samples[c];
        for (std::size_t i = lo; i < hi; ++i) {
            const double z0 = dist.quantile(stream.uniform(i, 0, StreamTag::limit_sde_initial)) + jump_at[0];
            if (!(z0 > 0.0)) {
                continue;
            }
            for (std::size_t q = 0; q < options.sample_steps.size(); ++q) {
                if (options.sample_steps[q] == 0) {
                    out[q].push_back(z0);
                }
            }
            double z = z0;
            std::size_t last = n_steps;  // last node at which the path is alive
            for (std::size_t k = 0; k < n_steps; ++k) {
                const Draw d = stream.draw(i, k, StreamTag::limit_sde_diffusion);
                const double z_old = z;
                z += params.alpha * dt + (loss.cumulative[k + 1] - loss.cumulative[k]) + vol * d.normal;
                bool dead = !(z > 0.0);
                if (!dead && options.bridge_correction) {
                    const double x = bridge_scale * z_old * z;
                    dead = x < 745.0 && d.uniform < std::exp(-x);
                }
                if (!dead && jump_at[k + 1] != 0.0) {
                    z += jump_at[k + 1];
                    dead = !(z > 0.0);
                }
                if (dead) {
                    last = k;
                    break;
                }
                for (std::size_t q = 0; q < options.sample_steps.size(); ++q) {
                    if (options.sample_steps[q] == k + 1) {
                        out[q].push_back(z);
                    }
                }
            }
            for (std::size_t k = 0; k <= last; ++k) {
                ++count[k];
            }
        }
    });

    LimitSdeResult res;
    res.times.resize(n_steps + 1);
    res.survival.resize(n_steps + 1);
    const double n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k <= n_steps; ++k) {
        std::size_t total = 0;
        for (const auto& cnt : alive) {
            total += cnt[k];
        }
        const double p = static_cast<double>(total) / n;
        res.times[k] = grid.time(k);
        res.survival[k] = {p, std::sqrt(std::max(0.0, p * (1.0 - p)) / n), n_paths};
    }
    res.survivor_samples.resize(options.sample_steps.size());
    for (const auto& chunk : samples) {
        for (std::size_t q = 0; q < chunk.size(); ++q) {
            res.survivor_samples[q].insert(res.survivor_samples[q].end(), chunk[q].begin(), chunk[q].end());
        }
    }
    return res;
}

}  // namespace contagion
