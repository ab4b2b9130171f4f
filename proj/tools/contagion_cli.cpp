#include "contagion/analysis.hpp"
#include "contagion/compare.hpp"
#include "contagion/config.hpp"
#include "contagion/errors.hpp"
#include "contagion/fixed_point.hpp"
#include "contagion/io.hpp"
#include "contagion/oracle.hpp"
#include "contagion/particle_system.hpp"
#include "contagion/pde.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace contagion;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;

struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    unsigned workers = 0;
};

// "a.b.c=value"; the value is parsed as JSON, falling back to a string.
void apply_override(json& doc, const std::string& text) {
    const auto eq = text.find('=');
    require(eq != std::string::npos && eq > 0, "override '" + text + "' must look like key.path=value");
    const std::string path = text.substr(0, eq);
    const std::string raw = text.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        require(!key.empty(), "override '" + text + "' has an empty key");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        if (!node->contains(key)) {
            (*node)[key] = json::object();
        }
        node = &(*node)[key];
        require(node->is_object(), "override '" + text + "' descends into a non-object");
        start = dot + 1;
    }
}

RunConfig load(const Common& c) {
    require(!c.config.empty(), "--config is required");
    json doc = io::read_json(c.config);
    for (const std::string& o : c.overrides) {
        apply_override(doc, o);
    }
    RunConfig cfg = parse_config(doc);
    if (c.workers > 0) {
        cfg.simulation.options.workers = c.workers;
    }
    return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg, const std::string& command) {
    return c.out.empty() ? fs::path(cfg.output_dir) / command : fs::path(c.out);
}

json grid_json(const TimeGrid& g) {
    return {{"dt", g.dt}, {"n_steps", g.n_steps}};
}

void print_ok(const std::string& command, const json& summary) {
    json doc = {{"status", "ok"}, {"command", command}};
    doc.update(summary);
    std::cout << doc.dump(2) << '\n';
}

std::vector<std::vector<double>> residual_rows(const DensityGrid& g, double sigma) {
    const std::vector<double> r = conservation_residual(g, sigma);
    std::vector<std::vector<double>> rows;
    rows.reserve(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        rows.push_back({g.time_at(k), r[k]});
    }
    return rows;
}

double max_abs(const std::vector<std::vector<double>>& rows, std::size_t col) {
    double m = 0.0;
    for (const auto& row : rows) {
        m = std::max(m, std::abs(row[col]));
    }
    return m;
}

// Writes density, conservation residual and survival bounds for a solved grid.
json save_pde_outputs(const DensityGrid& g, const RunConfig& cfg, const LossRate& lam, const fs::path& dir) {
    io::save_density(g, dir);
    io::save_loss_rate(lam, dir);
    const auto rows = residual_rows(g, cfg.model.sigma);
    io::write_csv(dir / "conservation.csv", {"t", "residual"}, rows);
    const SurvivalBoundsReport bounds = check_survival_bounds(g, cfg.model, lam, cfg.initial);
    io::write_json(dir / "survival_bounds.json", io::to_json(bounds));
    return {{"final_mass", g.mass.back()},
            {"max_conservation_residual", max_abs(rows, 1)},
            {"survival_bound_violations", bounds.violations},
            {"cfl_warning", g.cfl_warning},
            {"warnings", g.warnings}};
}

int run_simulate(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg, "simulate");
    const TimeGrid grid = TimeGrid::covering(cfg.model.horizon, cfg.simulation.dt);
    const SimulationResult sim = simulate(cfg.model, cfg.initial, cfg.simulation.n_banks, grid, cfg.simulation.seed,
                                          cfg.simulation.options);
    io::write_manifest(dir, io::make_manifest("simulate", cfg.source, cfg.simulation.seed, grid_json(grid)));
    io::save_simulation(sim, dir);
    print_ok("simulate", {{"output_dir", dir.string()},
                          {"final_survivor_fraction", sim.series.back().survivor_fraction},
                          {"final_cum_log_loss", io::number(sim.series.back().cum_log_loss)},
                          {"n_events", sim.events.size()},
                          {"tau0", sim.tau0 ? io::number(*sim.tau0) : json(nullptr)}});
    return kOk;
}

int run_pde(const Common& c, const std::string& lambda_dir) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg, "pde");
    const TimeGrid grid = TimeGrid::covering(cfg.model.horizon, cfg.pde.dt);
    const LossRate lam = lambda_dir.empty() ? LossRate::zero(grid) : io::load_loss_rate(lambda_dir);
    const DensityGrid g = solve_cdp(cfg.model, cfg.initial, lam, cfg.space(), lam.time);
    io::write_manifest(dir, io::make_manifest("pde", cfg.source, cfg.simulation.seed, grid_json(lam.time)));
    json summary = save_pde_outputs(g, cfg, lam, dir);
    summary["output_dir"] = dir.string();
    print_ok("pde", summary);
    return kOk;
}

int run_fixedpoint(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg, "fixedpoint");
    const FixedPointResult fp = solve_lambda(cfg.model, cfg.initial, cfg.fixed_point_options());
    if (fp.lam.exploded && fp.lam.time.n_steps == 0) {
        throw NumericalError("fixed point failed to contract on the first window");
    }
    io::write_manifest(dir, io::make_manifest("fixedpoint", cfg.source, cfg.simulation.seed, grid_json(fp.lam.time)));
    io::write_json(dir / "fixed_point_report.json", io::to_json(fp.report));
    json summary = {{"output_dir", dir.string()},
                    {"exploded", fp.lam.exploded},
                    {"t_reg_estimate", fp.lam.t_reg_estimate ? json(*fp.lam.t_reg_estimate) : json(nullptr)},
                    {"l2_norm", fp.lam.l2_norm()},
                    {"final_residual", fp.report.final_residual},
                    {"final_loss", loss_from_rate(fp.lam).back()}};
    try {
        const DensityGrid g = solve_cdp(cfg.model, cfg.initial, fp.lam, cfg.space(), fp.lam.time);
        summary.update(save_pde_outputs(g, cfg, fp.lam, dir));
    } catch (const NumericalError& e) {
        // The loss rate is still the result; the density near absorption is not.
        io::save_loss_rate(fp.lam, dir);
        summary["density_error"] = e.what();
    }
    print_ok("fixedpoint", summary);
    return kOk;
}

int run_oracle(const Common& c, const std::string& lambda_dir, std::size_t paths) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg, "oracle");
    const std::size_t n_paths = paths > 0 ? paths : cfg.compare.mc_paths;
    LimitSdeOptions lo;
    lo.bridge_correction = cfg.simulation.options.bridge_correction;
    lo.workers = cfg.simulation.options.workers;
    const bool driven = !lambda_dir.empty();
    const LossDriver driver = driven ? LossDriver::from_rate(io::load_loss_rate(lambda_dir))
                                     : LossDriver::none(TimeGrid::covering(cfg.model.horizon, cfg.simulation.dt));
    lo.sample_steps = {driver.grid.n_steps};
    const LimitSdeResult res = simulate_limit_sde(cfg.model, cfg.initial, driver, n_paths, cfg.simulation.seed, lo);
    io::write_manifest(dir, io::make_manifest("oracle", cfg.source, cfg.simulation.seed, grid_json(driver.grid)));
    io::save_limit_sde(res, dir);

    json summary = {{"output_dir", dir.string()},
                    {"n_paths", n_paths},
                    {"final_survival", res.survival.back().value},
                    {"final_std_error", res.survival.back().std_error}};
    if (!driven) {
        // Without contagion the survival curve is the first-passage mixture over the initial law.
        std::vector<std::vector<double>> rows;
        double max_z = 0.0;
        for (std::size_t k = 0; k < res.times.size(); ++k) {
            const double t = res.times[k];
            const double exact = t > 0.0 ? integrate_against(
                                                cfg.initial,
                                                [&](double y) {
                                                    return fp_survival(y, t, cfg.model.alpha, cfg.model.sigma);
                                                })
                                          : 1.0;
            const double diff = std::abs(res.survival[k].value - exact);
            // With all paths alive the sample SE is 0; one path is the resolution.
            const double se = std::max(res.survival[k].std_error, 1.0 / static_cast<double>(n_paths));
            const double z = diff / se;
            max_z = std::max(max_z, z);
            rows.push_back({t, exact, res.survival[k].value, res.survival[k].std_error, z});
        }
        io::write_csv(dir / "exact.csv", {"t", "exact", "mc", "std_error", "z"}, rows);
        summary["max_z_vs_exact"] = max_z;
    }
    print_ok("oracle", summary);
    return kOk;
}

const char* regime(double r_inf, double r_sup, double c, double cs) {
    if (c <= 0.0) {
        return "no_contagion";
    }
    if (r_sup < 1.0 / c) {
        return "below_1_over_C";
    }
    if (r_inf > cs / c) {
        return "above_cstar_over_C";
    }
    return "between_thresholds";
}

// Null when the series is constant or too short for the dyadic lags.
json holder_json(const std::vector<double>& loss, double dt, const AnalysisConfig& a) {
    try {
        const auto h = holder_exponent(loss, dt, a.holder_t0, a.holder_t1);
        return h ? json(*h) : json(nullptr);
    } catch (const ValidationError&) {
        return nullptr;
    }
}

json analyze_density(const RunConfig& cfg, const DensityGrid& g, const LossRate& lam, const fs::path& dir) {
    const AnalysisConfig& a = cfg.analysis;
    const ModelParams& p = cfg.model;
    const double c = p.exposure_c;
    const double cs = c_star(p.sigma).c_star;

    json times = json::array();
    std::vector<std::vector<double>> rows;
    const std::size_t n_cols = g.snapshot_steps.size();
    const std::size_t picks = std::min<std::size_t>(n_cols, 11);
    for (std::size_t i = 0; i < picks; ++i) {
        const std::size_t idx = picks == 1 ? n_cols - 1 : i * (n_cols - 1) / (picks - 1);
        const std::size_t k = g.snapshot_steps[idx];
        const std::vector<double>& col = g.snapshots[idx];
        const double m = g.mass[k];
        const double t = g.time_at(k);
        json entry = {{"time", t}, {"mass", m}};
        json ladder = json::array();
        double r_inf = std::numeric_limits<double>::infinity();
        double r_sup = 0.0;
        for (double eta : a.eta_ladder) {
            BoundaryDensityEstimate est = estimate_boundary_density_grid(col, g.space.h, m, eta);
            est.time = t;
            ladder.push_back(io::to_json(est));
            rows.push_back({t, eta, est.normalized_inf, est.normalized_sup});
            r_inf = std::min(r_inf, est.normalized_inf);
            r_sup = std::max(r_sup, est.normalized_sup);
        }
        entry["boundary_density"] = ladder;
        entry["regime"] = regime(r_inf, r_sup, c, cs);
        if (m > 0.0) {
            const Profile prof = Profile::from_column(col, g.space.h);
            entry["jump"] = io::to_json(jump_size(prof, c));
            entry["post_event_loss"] = io::to_json(post_event_loss(prof, m, p, a.epsilon));
            if (c > 0.0) {
                const double eta = *std::min_element(a.eta_ladder.begin(), a.eta_ladder.end());
                entry["certificate"] = io::to_json(certify_jump(prof, m, p, a.epsilon, eta));
            }
        }
        times.push_back(entry);
    }
    io::write_csv(dir / "boundary_density.csv", {"t", "eta", "normalized_inf", "normalized_sup"}, rows);

    const std::vector<double> loss = loss_from_rate(lam);
    return {{"source", "density"},
            {"thresholds", {{"one_over_C", c > 0 ? io::number(1.0 / c) : json(nullptr)},
                            {"c_star", cs},
                            {"c_star_over_C", c > 0 ? io::number(cs / c) : json(nullptr)}}},
            {"holder_exponent", holder_json(loss, lam.time.dt, a)},
            {"times", times}};
}

json analyze_simulation(const RunConfig& cfg, const SimulationResult& sim, const fs::path& dir) {
    const AnalysisConfig& a = cfg.analysis;
    std::vector<double> loss;
    loss.reserve(sim.series.size());
    for (const SeriesRow& r : sim.series) {
        loss.push_back(r.cum_log_loss);
    }
    json doc = {{"source", "simulation"}, {"n_events", sim.events.size()}};
    const bool finite = std::all_of(loss.begin(), loss.end(), [](double x) { return std::isfinite(x); });
    doc["holder_exponent"] = finite ? holder_json(loss, sim.grid.dt, a) : json(nullptr);
    if (sim.params.exposure_c > 0.0 && !sim.snapshots.empty()) {
        const PhysicalJumpReport rep = verify_physical_jump_condition(sim, sim.params.exposure_c);
        doc["physical_jump"] = io::to_json(rep);
    }
    if (!sim.paths.empty()) {
        const std::size_t k = sim.grid.n_steps;
        std::vector<double> alive;
        for (const auto& path : sim.paths) {
            if (path[k] > 0.0) {
                alive.push_back(path[k]);
            }
        }
        const double frac = sim.series.back().survivor_fraction;
        json ladder = json::array();
        std::vector<std::vector<double>> rows;
        for (double eta : a.eta_ladder) {
            for (const BoundaryDensityEstimate& est : boundary_density_ladder(alive, frac, eta, sim.n_banks)) {
                ladder.push_back(io::to_json(est));
                rows.push_back({sim.grid.time(k), est.eta, est.normalized_inf, est.normalized_sup});
            }
        }
        doc["final_boundary_density"] = ladder;
        io::write_csv(dir / "boundary_density.csv", {"t", "eta", "normalized_inf", "normalized_sup"}, rows);
    }
    return doc;
}

int run_analyze(const Common& c, const std::string& run_dir) {
    require(!run_dir.empty(), "--run is required");
    const json manifest = io::read_manifest(run_dir);
    json cfg_doc = manifest.at("config");
    for (const std::string& o : c.overrides) {
        apply_override(cfg_doc, o);
    }
    const RunConfig cfg = parse_config(cfg_doc, false);
    const fs::path dir = c.out.empty() ? fs::path(run_dir) / "analysis" : fs::path(c.out);
    fs::create_directories(dir);
    const std::string command = manifest.at("command").get<std::string>();
    json doc;
    if (command == "simulate") {
        doc = analyze_simulation(cfg, io::load_simulation(run_dir), dir);
    } else if (command == "pde" || command == "fixedpoint") {
        require(fs::exists(fs::path(run_dir) / "density.json"), "run directory has no density to analyze");
        doc = analyze_density(cfg, io::load_density(run_dir), io::load_loss_rate(run_dir), dir);
    } else {
        throw ValidationError("cannot analyze a '" + command + "' run");
    }
    doc["format_version"] = io::kFormatVersion;
    doc["run"] = run_dir;
    io::write_json(dir / "analysis.json", doc);
    print_ok("analyze", {{"output_dir", dir.string()}});
    return kOk;
}

int run_cstar(double sigma) {
    require(sigma > 0.0 && std::isfinite(sigma), "--sigma must be > 0");
    json doc = io::to_json(c_star(sigma));
    doc["sigma"] = sigma;
    print_ok("cstar", doc);
    return kOk;
}

int run_compare(const Common& c) {
    const RunConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg, "compare");
    const FixedPointResult fp = solve_lambda(cfg.model, cfg.initial, cfg.fixed_point_options());
    if (fp.lam.exploded) {
        throw NumericalError("compare needs a regular fixed point on [0, T]; it exploded near t = " +
                             std::to_string(fp.lam.t_reg_estimate.value_or(0.0)));
    }
    const DensityGrid g = solve_cdp(cfg.model, cfg.initial, fp.lam, cfg.space(), fp.lam.time);
    CompareOptions o;
    o.n_ladder = cfg.compare.n_ladder;
    o.n_seeds = cfg.compare.n_seeds;
    o.base_seed = cfg.simulation.seed;
    o.sim_dt = cfg.simulation.dt;
    o.mc_paths = cfg.compare.mc_paths;
    o.bridge_correction = cfg.simulation.options.bridge_correction;
    o.workers = cfg.simulation.options.workers;
    const CompareReport rep = compare_methods(cfg.model, cfg.initial, fp.lam, g, o);

    io::write_manifest(dir, io::make_manifest("compare", cfg.source, cfg.simulation.seed, grid_json(fp.lam.time)));
    io::save_loss_rate(fp.lam, dir);
    io::write_json(dir / "compare.json", io::to_json(rep));
    std::vector<std::vector<double>> ladder;
    for (const LadderRow& r : rep.ladder) {
        for (std::size_t s = 0; s < r.gaps.size(); ++s) {
            ladder.push_back({static_cast<double>(r.n_banks), static_cast<double>(r.seeds[s]), r.gaps[s]});
        }
    }
    io::write_csv(dir / "ladder.csv", {"n_banks", "seed", "sup_gap"}, ladder);
    std::vector<std::vector<double>> cps;
    for (const Checkpoint& cp : rep.checkpoints) {
        cps.push_back({cp.time, cp.pde_mass, cp.mc_survival, cp.std_error, cp.z});
    }
    io::write_csv(dir / "checkpoints.csv", {"t", "pde_mass", "mc_survival", "std_error", "z"}, cps);

    json table = json::array();
    for (const LadderRow& r : rep.ladder) {
        table.push_back({{"n_banks", r.n_banks}, {"median_gap", r.median_gap}, {"max_gap", r.max_gap}});
    }
    print_ok("compare", {{"output_dir", dir.string()},
                         {"ladder", table},
                         {"ladder_monotone", rep.ladder_monotone},
                         {"mc_pde_gap", rep.mc_pde_gap},
                         {"max_z", rep.max_z}});
    return kOk;
}

int fail(int code, const char* kind, const std::string& command, const std::string& message) {
    const json err = {{"status", "error"},
                      {"kind", kind},
                      {"command", command},
                      {"message", message},
                      {"exit_code", code}};
    std::cerr << err.dump() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Default-contagion particle system, PDE fixed point and diagnostics"};
    app.set_version_flag("--version", io::code_version());
    app.require_subcommand(1);

    Common common;
    std::string lambda_dir;
    std::string run_dir;
    std::size_t paths = 0;
    double sigma = 1.0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("-c,--config", common.config, "JSON config file");
        if (needs_config) {
            opt->required()->check(CLI::ExistingFile);
        }
        sub->add_option("-o,--out", common.out, "output directory (default: <output_dir>/<command>)");
        sub->add_option("--set", common.overrides, "override a config value, e.g. --set model.exposure_c=0.2");
        sub->add_option("--workers", common.workers, "worker threads (results do not depend on it)");
    };

    auto* simulate_cmd = app.add_subcommand("simulate", "particle system");
    add_common(simulate_cmd, true);
    auto* pde_cmd = app.add_subcommand("pde", "density PDE for a given loss rate (zero by default)");
    add_common(pde_cmd, true);
    pde_cmd->add_option("--lambda", lambda_dir, "directory holding loss_rate.json / loss_rate.csv");
    auto* fp_cmd = app.add_subcommand("fixedpoint", "loss-rate fixed point and its density");
    add_common(fp_cmd, true);
    auto* oracle_cmd = app.add_subcommand("oracle", "limit SDE Monte Carlo");
    add_common(oracle_cmd, true);
    oracle_cmd->add_option("--lambda", lambda_dir, "loss-rate directory driving the SDE (none: no contagion)");
    oracle_cmd->add_option("--paths", paths, "number of paths (default: compare.mc_paths)");
    auto* analyze_cmd = app.add_subcommand("analyze", "boundary density, jump and regularity diagnostics");
    add_common(analyze_cmd, false);
    analyze_cmd->add_option("--run", run_dir, "run directory with a manifest")->required();
    auto* cstar_cmd = app.add_subcommand("cstar", "print c*(sigma)");
    cstar_cmd->add_option("--sigma", sigma, "volatility")->required();
    auto* compare_cmd = app.add_subcommand("compare", "particle vs PDE vs Monte Carlo report");
    add_common(compare_cmd, true);

    std::string command = "contagion";
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kValidation, "usage", command, e.what());
    }

    try {
        if (*simulate_cmd) {
            command = "simulate";
            return run_simulate(common);
        }
        if (*pde_cmd) {
            command = "pde";
            return run_pde(common, lambda_dir);
        }
        if (*fp_cmd) {
            command = "fixedpoint";
            return run_fixedpoint(common);
        }
        if (*oracle_cmd) {
            command = "oracle";
            return run_oracle(common, lambda_dir, paths);
        }
        if (*analyze_cmd) {
            command = "analyze";
            return run_analyze(common, run_dir);
        }
        if (*cstar_cmd) {
            command = "cstar";
            return run_cstar(sigma);
        }
        command = "compare";
        return run_compare(common);
    } catch (const ValidationError& e) {
        return fail(kValidation, "validation", command, e.what());
    } catch (const NumericalError& e) {
        return fail(kNumerical, "numerical", command, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(kValidation, "validation", command, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kValidation, "io", command, e.what());
    } catch (const std::exception& e) {
        return fail(kNumerical, "internal", command, e.what());
    }
}
