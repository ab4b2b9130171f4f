#include "contagion/particle_system.hpp"

#include "contagion/errors.hpp"
#include "contagion/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace contagion {

namespace {

// Loss C ln(1 - k/S) expressed as the positive threshold the k+1-th value must exceed.
double threshold(double exposure_c, std::size_t k, std::size_t survivors) {
    if (exposure_c == 0.0) {
        return 0.0;
    }
    if (k >= survivors) {
        return std::numeric_limits<double>::infinity();
    }
    return -exposure_c * std::log1p(-static_cast<double>(k) / static_cast<double>(survivors));
}

double cumulative_loss(double exposure_c, std::size_t survivors, std::size_t n) {
    if (exposure_c == 0.0) {
        return 0.0;
    }
    if (survivors == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    return exposure_c * std::log(static_cast<double>(survivors) / static_cast<double>(n));
}

// Advances a_value for live banks (and defaulted ones when requested) and
// re-solves y_value against the current cumulative loss. Returns whether any
// live bank ended at or below the barrier; bridge hits are appended to `forced`.
bool diffuse(SystemState& state, const ModelParams& params, double dt, const CounterStream& stream,
             bool bridge_correction, unsigned workers, bool advance_defaulted,
             std::vector<std::size_t>& forced) {
    const double drift = params.alpha * dt;
    const double vol = params.sigma * std::sqrt(dt);
    const double bridge_scale = 2.0 / (params.sigma * params.sigma * dt);
    const double loss = state.cum_log_loss;
    const std::uint64_t s = state.step_index;
    const std::size_t n = state.banks.size();

    const std::size_t w = chunk_count(n, workers);
    std::vector<std::vector<std::size_t>> hits(w);
    std::vector<char> below(w, 0);

    parallel_chunks(n, workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            BankState& b = state.banks[i];
            if (b.defaulted && !advance_defaulted) {
                continue;
            }
            const Draw d = stream.draw(i, s, StreamTag::diffusion);
            b.a_value += drift + vol * d.normal;
            const double y_old = b.y_value;
            b.y_value = apply_cumulative_loss(b.a_value, loss);
            if (b.defaulted) {
                continue;
            }
            if (b.y_value <= 0.0) {
                below[c] = 1;
            } else if (bridge_correction) {
                const double x = bridge_scale * y_old * b.y_value;
                if (x < 745.0 && d.uniform < std::exp(-x)) {
                    hits[c].push_back(i);
                }
            }
        }
    });
    for (const auto& h : hits) {
        forced.insert(forced.end(), h.begin(), h.end());
    }
    return std::any_of(below.begin(), below.end(), [](char v) { return v != 0; });
}

std::optional<CascadeEvent> step_impl(SystemState& state, const ModelParams& params, double dt,
                                      const CounterStream& stream, bool bridge_correction, unsigned workers,
                                      bool advance_defaulted, std::vector<double>* snapshot) {
    require(dt > 0.0, "dt must be > 0");
    std::vector<std::size_t> forced;
    const bool any_below =
        diffuse(state, params, dt, stream, bridge_correction, workers, advance_defaulted, forced);
    ++state.step_index;
    state.time = static_cast<double>(state.step_index) * dt;
    if (!any_below && forced.empty()) {
        return std::nullopt;
    }
    return resolve_cascades(state, params.exposure_c, forced, snapshot);
}

}  // namespace

std::size_t cascade_size(std::span<const double> sorted_values, std::size_t survivors, double exposure_c) {
    require(!sorted_values.empty() && sorted_values.size() == survivors,
            "cascade_size needs one value per survivor");
    for (std::size_t k = 0; k < survivors; ++k) {
        // 0-based k: the (k+1)-th value against C ln(1 - k/S).
        if (sorted_values[k] > threshold(exposure_c, k, survivors)) {
            return k;
        }
    }
    return survivors;
}

double apply_cumulative_loss(double a, double lambda_cum) {
    require(lambda_cum <= 0.0, "cumulative loss must be <= 0");
    const double shifted = a + lambda_cum;
    if (shifted >= 0.0) {
        return shifted;
    }
    if (std::isinf(lambda_cum)) {
        return a < -1.0 ? a : -1.0;
    }
    const double scaled = shifted / (1.0 - lambda_cum);
    if (std::isnan(scaled)) {
        throw NumericalError("apply_cumulative_loss: no branch applies");
    }
    if (scaled >= -1.0) {
        return scaled;
    }
    // a < -1 up to rounding: the loss factor vanishes.
    return std::min(a, -1.0);
}

SystemState initial_state(std::span<const double> values) {
    require(!values.empty(), "system needs at least one bank");
    SystemState state;
    state.banks.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i] > 0.0, "initial values must be > 0");
        state.banks[i].a_value = values[i];
        state.banks[i].y_value = values[i];
    }
    state.survivors = values.size();
    return state;
}

std::optional<CascadeEvent> resolve_cascades(SystemState& state, double exposure_c,
                                             std::span<const std::size_t> forced,
                                             std::vector<double>* snapshot) {
    for (std::size_t i : forced) {
        require(i < state.banks.size() && !state.banks[i].defaulted, "forced bank must be alive");
        state.banks[i].y_value = 0.0;
    }
    const std::size_t survivors = state.survivors;
    if (survivors == 0) {
        return std::nullopt;
    }

    std::vector<std::pair<double, std::size_t>> cand;
    auto collect = [&](double bound) {
        cand.clear();
        for (std::size_t i = 0; i < state.banks.size(); ++i) {
            const BankState& b = state.banks[i];
            if (!b.defaulted && b.y_value <= bound) {
                cand.emplace_back(b.y_value, i);
            }
        }
        std::sort(cand.begin(), cand.end());
    };

    // Only the lowest values can default, so scan growing prefixes instead of
    // sorting all survivors.
    double bound = 0.0;
    std::size_t n_defaults = 0;
    for (;;) {
        collect(bound);
        std::size_t k = 0;
        while (k < cand.size() && cand[k].first <= threshold(exposure_c, k, survivors)) {
            ++k;
        }
        if (k < cand.size() || cand.size() == survivors) {
            n_defaults = k;
            break;
        }
        const double need = threshold(exposure_c, k, survivors);
        if (bound >= need) {
            n_defaults = k;
            break;
        }
        bound = std::max(2.0 * bound, need);
    }
    if (n_defaults == 0) {
        return std::nullopt;
    }

    if (snapshot != nullptr) {
        snapshot->clear();
        for (const BankState& b : state.banks) {
            if (!b.defaulted) {
                snapshot->push_back(b.y_value);
            }
        }
        std::sort(snapshot->begin(), snapshot->end());
    }

    for (std::size_t k = 0; k < n_defaults; ++k) {
        BankState& b = state.banks[cand[k].second];
        b.defaulted = true;
        b.default_time = state.time;
    }
    state.survivors = survivors - n_defaults;
    state.cum_log_loss = cumulative_loss(exposure_c, state.survivors, state.banks.size());
    if (state.survivors == 0) {
        state.tau0 = state.time;
    } else {
        for (BankState& b : state.banks) {
            if (!b.defaulted) {
                b.y_value = apply_cumulative_loss(b.a_value, state.cum_log_loss);
            }
        }
    }

    CascadeEvent ev;
    ev.time = state.time;
    ev.survivors_before = survivors;
    ev.n_defaults = n_defaults;
    ev.loss_increment =
        exposure_c == 0.0
            ? 0.0
            : (n_defaults == survivors
                   ? -std::numeric_limits<double>::infinity()
                   : exposure_c * std::log1p(-static_cast<double>(n_defaults) / static_cast<double>(survivors)));
    return ev;
}

std::optional<CascadeEvent> step(SystemState& state, const ModelParams& params, double dt,
                                 const CounterStream& stream, bool bridge_correction, unsigned workers) {
    return step_impl(state, params, dt, stream, bridge_correction, workers, false, nullptr);
}

SimulationResult simulate(const ModelParams& params, const InitialDistribution& dist, std::size_t n_banks,
                          const TimeGrid& grid, std::uint64_t seed, const SimulationOptions& options) {
    params.validate();
    grid.validate();
    require(n_banks >= 1, "n_banks must be >= 1");

    SimulationResult res;
    res.params = params;
    res.n_banks = n_banks;
    res.grid = grid;
    res.seed = seed;
    res.options = options;

    const std::vector<double> values = sample_initial(dist, n_banks, seed);
    SystemState state = initial_state(values);
    const CounterStream stream(seed);
    const double n = static_cast<double>(n_banks);

    res.series.reserve(grid.n_steps + 1);
    res.series.push_back({0.0, 1.0, 0.0});
    std::vector<double> anchor;  // post-tau0 offsets: y = anchor + a
    if (options.record_paths) {
        res.paths.assign(n_banks, {});
        for (std::size_t i = 0; i < n_banks; ++i) {
            res.paths[i].reserve(grid.n_steps + 1);
            res.paths[i].push_back(values[i]);
        }
    }

    std::vector<double> snap;
    for (std::size_t k = 1; k <= grid.n_steps; ++k) {
        if (state.survivors == 0) {
            if (options.record_paths) {
                const double vol = params.sigma * std::sqrt(grid.dt);
                for (std::size_t i = 0; i < n_banks; ++i) {
                    const Draw d = stream.draw(i, state.step_index, StreamTag::diffusion);
                    state.banks[i].a_value += params.alpha * grid.dt + vol * d.normal;
                    state.banks[i].y_value = anchor[i] + state.banks[i].a_value;
                    res.paths[i].push_back(state.banks[i].y_value);
                }
            }
            ++state.step_index;
            state.time = grid.time(k);
            res.series.push_back({grid.time(k), 0.0, state.cum_log_loss});
            continue;
        }

        const auto ev = step_impl(state, params, grid.dt, stream, options.bridge_correction, options.workers,
                                  options.record_paths, options.snapshot_cascades ? &snap : nullptr);
        if (ev) {
            if (options.snapshot_cascades) {
                res.snapshots.push_back({res.events.size(), snap});
            }
            res.events.push_back(*ev);
        }

        if (options.record_paths) {
            if (state.survivors == 0) {
                anchor.resize(n_banks);
                for (std::size_t i = 0; i < n_banks; ++i) {
                    BankState& b = state.banks[i];
                    b.y_value = std::min(-1.0, b.y_value);
                    anchor[i] = b.y_value - b.a_value;
                }
            } else {
                for (BankState& b : state.banks) {
                    if (b.defaulted) {
                        b.y_value = apply_cumulative_loss(b.a_value, state.cum_log_loss);
                    }
                }
            }
            for (std::size_t i = 0; i < n_banks; ++i) {
                res.paths[i].push_back(state.banks[i].y_value);
            }
        }
        res.series.push_back({grid.time(k), static_cast<double>(state.survivors) / n, state.cum_log_loss});
    }
    res.tau0 = state.tau0;
    return res;
}

}  // namespace contagion
