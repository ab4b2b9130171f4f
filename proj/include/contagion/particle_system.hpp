#pragma once

#include "contagion/model.hpp"
#include "contagion/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace contagion {

struct BankState {
    double a_value = 0.0;  // default-free part: Y0 + alpha t + sigma B_t
    double y_value = 0.0;  // solved value including the contagion loss
    bool defaulted = false;
    std::optional<double> default_time;
};

struct SystemState {
    std::vector<BankState> banks;
    std::size_t survivors = 0;
    double cum_log_loss = 0.0;  // C ln(survivors / N)
    double time = 0.0;
    std::uint64_t step_index = 0;
    std::optional<double> tau0;

    [[nodiscard]] std::size_t size() const noexcept { return banks.size(); }
};

struct CascadeEvent {
    double time = 0.0;
    std::size_t survivors_before = 0;
    std::size_t n_defaults = 0;
    double loss_increment = 0.0;  // C ln(1 - n_defaults / survivors_before)
};

struct SeriesRow {
    double time = 0.0;
    double survivor_fraction = 1.0;
    double cum_log_loss = 0.0;
};

/// Pre-cascade values of all live banks, ascending (bridge hits enter as 0).
struct CascadeSnapshot {
    std::size_t event_index = 0;
    std::vector<double> values;
};

struct SimulationOptions {
    bool bridge_correction = true;
    bool snapshot_cascades = false;
    bool record_paths = false;
    unsigned workers = 1;
};

struct SimulationResult {
    ModelParams params;
    std::size_t n_banks = 0;
    TimeGrid grid;
    std::uint64_t seed = 0;
    SimulationOptions options;
    std::vector<SeriesRow> series;
    std::vector<CascadeEvent> events;
    std::optional<double> tau0;
    std::vector<CascadeSnapshot> snapshots;
    /// paths[i][k] = solved value of bank i at grid time k (record_paths only).
    std::vector<std::vector<double>> paths;
};

/// D_t for ascending pre-cascade values of the S live banks.
std::size_t cascade_size(std::span<const double> sorted_values, std::size_t survivors, double exposure_c);

/// Solves y = a + min(1, (y+1)^+) * lambda_cum for lambda_cum <= 0.
double apply_cumulative_loss(double a, double lambda_cum);

/// Fresh state from initial values (all must be > 0).
SystemState initial_state(std::span<const double> values);

/// Defaults the D_t lowest live banks (values <= 0 and any in `forced`
/// enter the scan as they are / as 0), then re-solves the rest. Returns
/// nothing if no live bank is at or below 0.
std::optional<CascadeEvent> resolve_cascades(SystemState& state, double exposure_c,
                                             std::span<const std::size_t> forced = {},
                                             std::vector<double>* snapshot = nullptr);

/// One Euler step of all live banks followed by cascade resolution.
std::optional<CascadeEvent> step(SystemState& state, const ModelParams& params, double dt,
                                 const CounterStream& stream, bool bridge_correction, unsigned workers = 1);

SimulationResult simulate(const ModelParams& params, const InitialDistribution& dist, std::size_t n_banks,
                          const TimeGrid& grid, std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace contagion
