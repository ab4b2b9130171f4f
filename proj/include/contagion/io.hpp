#pragma once

#include "contagion/analysis.hpp"
#include "contagion/compare.hpp"
#include "contagion/fixed_point.hpp"
#include "contagion/loss_rate.hpp"
#include "contagion/oracle.hpp"
#include "contagion/particle_system.hpp"
#include "contagion/pde.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace contagion::io {

namespace fs = std::filesystem;

/// Bumped whenever an on-disk layout changes; loaders reject other values.
inline constexpr int kFormatVersion = 1;

std::string code_version();

/// Number formatting shared by every CSV and JSON writer (round-trips doubles).
std::string format_double(double x);
/// JSON number, or "inf" / "-inf" / "nan" strings for non-finite values.
nlohmann::json number(double x);
double to_double(const nlohmann::json& j);

/// Header row + rows, '\n' line endings.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
/// Returns the rows; checks the header matches.
std::vector<std::vector<double>> read_csv(const fs::path& path, const std::vector<std::string>& header);

void write_json(const fs::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const fs::path& path);
/// Throws ValidationError unless doc["format_version"] == kFormatVersion.
void check_version(const nlohmann::json& doc, const std::string& what);

nlohmann::json to_json(const ModelParams& p);
ModelParams model_from_json(const nlohmann::json& j);

// Simulation: simulation.json, series.csv, events.csv, snapshots.csv, paths.csv.
void save_simulation(const SimulationResult& sim, const fs::path& dir);
SimulationResult load_simulation(const fs::path& dir);

// Density: density.json, density.csv (t, y, p), mass.csv (t, mass, boundary_slope).
void save_density(const DensityGrid& grid, const fs::path& dir);
DensityGrid load_density(const fs::path& dir);

// Loss rate: loss_rate.json, loss_rate.csv (t, lambda, l2_running, Lambda).
void save_loss_rate(const LossRate& lam, const fs::path& dir);
LossRate load_loss_rate(const fs::path& dir);

nlohmann::json to_json(const FixedPointReport& rep);
FixedPointReport fixed_point_report_from_json(const nlohmann::json& j);

// Analysis reports: to_json / *_from_json pairs round-trip every field.
nlohmann::json to_json(const SurvivalBoundsReport& rep);
SurvivalBoundsReport survival_bounds_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundaryDensityEstimate& est);
BoundaryDensityEstimate boundary_density_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JumpSolution& sol);
JumpSolution jump_solution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CStar& c);
CStar c_star_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PostEventLoss& l);
PostEventLoss post_event_loss_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JumpCertificate& c);
JumpCertificate jump_certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhysicalJumpReport& rep);
PhysicalJumpReport physical_jump_from_json(const nlohmann::json& j);

// Survival series CSV: t, survival, std_error, n_paths.
void save_survival(const LimitSdeResult& res, const fs::path& path);

nlohmann::json to_json(const CompareReport& rep);
CompareReport compare_report_from_json(const nlohmann::json& j);

/// manifest.json of a run directory: everything needed to re-run it.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const nlohmann::json& grid);
void write_manifest(const fs::path& dir, const nlohmann::json& manifest);
nlohmann::json read_manifest(const fs::path& dir);

// Limit SDE: limit_sde.json, survival.csv, samples.csv (set, value).
void save_limit_sde(const LimitSdeResult& res, const fs::path& dir);
LimitSdeResult load_limit_sde(const fs::path& dir);

}  // namespace contagion::io
