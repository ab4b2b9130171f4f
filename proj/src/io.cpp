#include "contagion/io.hpp"

#include "contagion/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace contagion::io {

using nlohmann::json;

std::string code_version() {
    return CONTAGION_VERSION;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json number(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    if (std::isnan(x)) {
        return "nan";
    }
    return x > 0 ? "inf" : "-inf";
}

double to_double(const json& j) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ValidationError("expected a number, got " + j.dump());
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + path.string());
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << (c ? "," : "") << header[c];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << format_double(row[c]);
        }
        out << '\n';
    }
    require(static_cast<bool>(out), "write failed for " + path.string());
}

std::vector<std::vector<double>> read_csv(const fs::path& path, const std::vector<std::string>& header) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path.string() + " is empty");
    std::string expected;
    for (std::size_t c = 0; c < header.size(); ++c) {
        expected += (c ? "," : "") + header[c];
    }
    require(line == expected, path.string() + ": header '" + line + "' does not match '" + expected + "'");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        row.reserve(header.size());
        const char* p = line.c_str();
        for (;;) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            require(end != p, path.string() + ": malformed row '" + line + "'");
            row.push_back(v);
            if (*end == ',') {
                p = end + 1;
            } else {
                require(*end == '\0', path.string() + ": malformed row '" + line + "'");
                break;
            }
        }
        require(row.size() == header.size(), path.string() + ": wrong column count in '" + line + "'");
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + " is not valid JSON: " + e.what());
    }
}

void check_version(const json& doc, const std::string& what) {
    if (!doc.is_object() || !doc.contains("format_version")) {
        throw ValidationError(what + ": manifest has no format_version");
    }
    const json& v = doc.at("format_version");
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
        throw ValidationError(what + ": format_version " + v.dump() + " is not supported (expected " +
                              std::to_string(kFormatVersion) + ")");
    }
}

json to_json(const ModelParams& p) {
    return {{"alpha", p.alpha}, {"sigma", p.sigma}, {"exposure_c", p.exposure_c}, {"horizon", p.horizon}};
}

ModelParams model_from_json(const json& j) {
    ModelParams p;
    p.alpha = j.at("alpha").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.exposure_c = j.at("exposure_c").get<double>();
    p.horizon = j.at("horizon").get<double>();
    return p;
}

namespace {

json grid_json(const TimeGrid& g) {
    return {{"dt", g.dt}, {"n_steps", g.n_steps}};
}

TimeGrid grid_from_json(const json& j) {
    return TimeGrid{j.at("dt").get<double>(), j.at("n_steps").get<std::size_t>()};
}

json optional_number(const std::optional<double>& v) {
    return v ? number(*v) : json(nullptr);
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    return to_double(j);
}

std::size_t as_index(double v) {
    require(v >= 0.0 && v == std::floor(v), "expected a non-negative integer column");
    return static_cast<std::size_t>(v);
}

}  // namespace

void save_simulation(const SimulationResult& sim, const fs::path& dir) {
    fs::create_directories(dir);
    json doc = {{"format_version", kFormatVersion},
                {"code_version", code_version()},
                {"kind", "simulation"},
                {"params", to_json(sim.params)},
                {"n_banks", sim.n_banks},
                {"grid", grid_json(sim.grid)},
                {"seed", sim.seed},
                {"options",
                 {{"bridge_correction", sim.options.bridge_correction},
                  {"snapshot_cascades", sim.options.snapshot_cascades},
                  {"record_paths", sim.options.record_paths},
                  {"workers", sim.options.workers}}},
                {"tau0", optional_number(sim.tau0)},
                {"n_events", sim.events.size()}};
    write_json(dir / "simulation.json", doc);

    std::vector<std::vector<double>> rows;
    rows.reserve(sim.series.size());
    for (const SeriesRow& r : sim.series) {
        rows.push_back({r.time, r.survivor_fraction, r.cum_log_loss});
    }
    write_csv(dir / "series.csv", {"time", "survivor_fraction", "cum_log_loss"}, rows);

    rows.clear();
    for (const CascadeEvent& e : sim.events) {
        rows.push_back({e.time, static_cast<double>(e.survivors_before), static_cast<double>(e.n_defaults),
                        e.loss_increment});
    }
    write_csv(dir / "events.csv", {"time", "survivors_before", "n_defaults", "loss_increment"}, rows);

    if (sim.options.snapshot_cascades) {
        rows.clear();
        for (const CascadeSnapshot& s : sim.snapshots) {
            for (double v : s.values) {
                rows.push_back({static_cast<double>(s.event_index), v});
            }
        }
        write_csv(dir / "snapshots.csv", {"event_index", "value"}, rows);
    }
    if (sim.options.record_paths) {
        rows.clear();
        for (std::size_t i = 0; i < sim.paths.size(); ++i) {
            for (std::size_t k = 0; k < sim.paths[i].size(); ++k) {
                rows.push_back({static_cast<double>(i), static_cast<double>(k), sim.paths[i][k]});
            }
        }
        write_csv(dir / "paths.csv", {"bank", "step", "value"}, rows);
    }
}

SimulationResult load_simulation(const fs::path& dir) {
    const json doc = read_json(dir / "simulation.json");
    check_version(doc, (dir / "simulation.json").string());
    SimulationResult sim;
    sim.params = model_from_json(doc.at("params"));
    sim.n_banks = doc.at("n_banks").get<std::size_t>();
    sim.grid = grid_from_json(doc.at("grid"));
    sim.seed = doc.at("seed").get<std::uint64_t>();
    const json& o = doc.at("options");
    sim.options.bridge_correction = o.at("bridge_correction").get<bool>();
    sim.options.snapshot_cascades = o.at("snapshot_cascades").get<bool>();
    sim.options.record_paths = o.at("record_paths").get<bool>();
    sim.options.workers = o.at("workers").get<unsigned>();
    sim.tau0 = optional_from_json(doc.at("tau0"));

    for (const auto& r : read_csv(dir / "series.csv", {"time", "survivor_fraction", "cum_log_loss"})) {
        sim.series.push_back({r[0], r[1], r[2]});
    }
    for (const auto& r : read_csv(dir / "events.csv", {"time", "survivors_before", "n_defaults", "loss_increment"})) {
        sim.events.push_back({r[0], as_index(r[1]), as_index(r[2]), r[3]});
    }
    require(sim.events.size() == doc.at("n_events").get<std::size_t>(), "events.csv is truncated");
    if (sim.options.snapshot_cascades) {
        for (const auto& r : read_csv(dir / "snapshots.csv", {"event_index", "value"})) {
            const std::size_t e = as_index(r[0]);
            if (sim.snapshots.empty() || sim.snapshots.back().event_index != e) {
                sim.snapshots.push_back({e, {}});
            }
            sim.snapshots.back().values.push_back(r[1]);
        }
    }
    if (sim.options.record_paths) {
        sim.paths.assign(sim.n_banks, {});
        for (const auto& r : read_csv(dir / "paths.csv", {"bank", "step", "value"})) {
            const std::size_t i = as_index(r[0]);
            require(i < sim.n_banks && as_index(r[1]) == sim.paths[i].size(), "paths.csv is out of order");
            sim.paths[i].push_back(r[2]);
        }
    }
    return sim;
}

void save_density(const DensityGrid& grid, const fs::path& dir) {
    fs::create_directories(dir);
    json warnings = grid.warnings;
    json doc = {{"format_version", kFormatVersion},
                {"code_version", code_version()},
                {"kind", "density"},
                {"h", grid.space.h},
                {"y_max", grid.space.y_max},
                {"time", grid_json(grid.time)},
                {"start_time", grid.start_time},
                {"snapshot_steps", grid.snapshot_steps},
                {"cfl_warning", grid.cfl_warning},
                {"warnings", warnings}};
    write_json(dir / "density.json", doc);

    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < grid.snapshots.size(); ++s) {
        const double t = grid.time_at(grid.snapshot_steps[s]);
        for (std::size_t j = 0; j < grid.snapshots[s].size(); ++j) {
            rows.push_back({t, grid.space.node(j), grid.snapshots[s][j]});
        }
    }
    write_csv(dir / "density.csv", {"t", "y", "p"}, rows);

    rows.clear();
    for (std::size_t k = 0; k < grid.mass.size(); ++k) {
        rows.push_back({grid.time_at(k), grid.mass[k], grid.boundary_slope[k]});
    }
    write_csv(dir / "mass.csv", {"t", "mass", "boundary_slope"}, rows);
}

DensityGrid load_density(const fs::path& dir) {
    const json doc = read_json(dir / "density.json");
    check_version(doc, (dir / "density.json").string());
    DensityGrid g;
    g.space = SpaceGrid{doc.at("h").get<double>(), doc.at("y_max").get<double>()};
    g.time = grid_from_json(doc.at("time"));
    g.start_time = doc.at("start_time").get<double>();
    g.snapshot_steps = doc.at("snapshot_steps").get<std::vector<std::size_t>>();
    g.cfl_warning = doc.at("cfl_warning").get<bool>();
    g.warnings = doc.at("warnings").get<std::vector<std::string>>();

    const std::size_t nodes = g.space.intervals() + 1;
    const auto rows = read_csv(dir / "density.csv", {"t", "y", "p"});
    require(rows.size() == nodes * g.snapshot_steps.size(), "density.csv has the wrong number of rows");
    g.snapshots.assign(g.snapshot_steps.size(), std::vector<double>(nodes));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        g.snapshots[r / nodes][r % nodes] = rows[r][2];
    }
    for (const auto& r : read_csv(dir / "mass.csv", {"t", "mass", "boundary_slope"})) {
        g.mass.push_back(r[1]);
        g.boundary_slope.push_back(r[2]);
    }
    require(g.mass.size() == g.time.n_steps + 1, "mass.csv has the wrong number of rows");
    return g;
}

void save_loss_rate(const LossRate& lam, const fs::path& dir) {
    fs::create_directories(dir);
    json doc = {{"format_version", kFormatVersion},
                {"code_version", code_version()},
                {"kind", "loss_rate"},
                {"time", grid_json(lam.time)},
                {"exploded", lam.exploded},
                {"t_reg_estimate", optional_number(lam.t_reg_estimate)}};
    write_json(dir / "loss_rate.json", doc);
    const std::vector<double> cum = loss_from_rate(lam);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < lam.values.size(); ++k) {
        rows.push_back({lam.time.time(k), lam.values[k], lam.l2_running[k], cum[k]});
    }
    write_csv(dir / "loss_rate.csv", {"t", "lambda", "l2_running", "Lambda"}, rows);
}

LossRate load_loss_rate(const fs::path& dir) {
    const json doc = read_json(dir / "loss_rate.json");
    check_version(doc, (dir / "loss_rate.json").string());
    LossRate lam;
    lam.time = grid_from_json(doc.at("time"));
    lam.exploded = doc.at("exploded").get<bool>();
    lam.t_reg_estimate = optional_from_json(doc.at("t_reg_estimate"));
    for (const auto& r : read_csv(dir / "loss_rate.csv", {"t", "lambda", "l2_running", "Lambda"})) {
        lam.values.push_back(r[1]);
        lam.l2_running.push_back(r[2]);
    }
    require(lam.values.size() == lam.time.n_steps + 1, "loss_rate.csv has the wrong number of rows");
    return lam;
}

json to_json(const FixedPointReport& rep) {
    json windows = json::array();
    for (const WindowReport& w : rep.windows) {
        windows.push_back({{"start", w.start},
                           {"end", w.end},
                           {"iterations", w.iterations},
                           {"contraction", number(w.contraction)},
                           {"residual", number(w.residual)},
                           {"M", number(w.M)},
                           {"l2_window", number(w.l2_window)},
                           {"probe_gap", number(w.probe_gap)},
                           {"probe_iterations", w.probe_iterations}});
    }
    return {{"format_version", kFormatVersion},
            {"kind", "fixed_point_report"},
            {"windows", windows},
            {"final_residual", number(rep.final_residual)},
            {"window_halvings", rep.window_halvings},
            {"truncation_doublings", rep.truncation_doublings},
            {"notes", rep.notes}};
}

FixedPointReport fixed_point_report_from_json(const json& j) {
    check_version(j, "fixed point report");
    FixedPointReport rep;
    for (const json& w : j.at("windows")) {
        WindowReport r;
        r.start = w.at("start").get<double>();
        r.end = w.at("end").get<double>();
        r.iterations = w.at("iterations").get<std::size_t>();
        r.contraction = to_double(w.at("contraction"));
        r.residual = to_double(w.at("residual"));
        r.M = to_double(w.at("M"));
        r.l2_window = to_double(w.at("l2_window"));
        r.probe_gap = to_double(w.at("probe_gap"));
        r.probe_iterations = w.at("probe_iterations").get<std::size_t>();
        rep.windows.push_back(r);
    }
    rep.final_residual = to_double(j.at("final_residual"));
    rep.window_halvings = j.at("window_halvings").get<std::size_t>();
    rep.truncation_doublings = j.at("truncation_doublings").get<std::size_t>();
    rep.notes = j.at("notes").get<std::vector<std::string>>();
    return rep;
}

json to_json(const SurvivalBoundsReport& rep) {
    json times = json::array();
    json lower = json::array();
    json mass = json::array();
    json upper = json::array();
    double worst_lower = std::numeric_limits<double>::infinity();
    double worst_upper = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rep.mass.size(); ++k) {
        times.push_back(number(rep.times[k]));
        lower.push_back(number(rep.lower[k]));
        mass.push_back(number(rep.mass[k]));
        upper.push_back(number(rep.upper[k]));
        worst_lower = std::min(worst_lower, rep.mass[k] - rep.lower[k]);
        worst_upper = std::min(worst_upper, rep.upper[k] - rep.mass[k]);
    }
    return {{"format_version", kFormatVersion},
            {"kind", "survival_bounds"},
            {"violations", rep.violations},
            {"slack", rep.slack},
            {"min_mass_minus_lower", number(worst_lower)},
            {"min_upper_minus_mass", number(worst_upper)},
            {"times", times},
            {"lower", lower},
            {"mass", mass},
            {"upper", upper}};
}

namespace {

std::vector<double> doubles(const json& arr) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const json& v : arr) {
        out.push_back(to_double(v));
    }
    return out;
}

json number_array(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) {
        out.push_back(number(x));
    }
    return out;
}

}  // namespace

SurvivalBoundsReport survival_bounds_from_json(const json& j) {
    check_version(j, "survival bounds");
    SurvivalBoundsReport rep;
    rep.violations = j.at("violations").get<std::size_t>();
    rep.slack = to_double(j.at("slack"));
    rep.times = doubles(j.at("times"));
    rep.lower = doubles(j.at("lower"));
    rep.mass = doubles(j.at("mass"));
    rep.upper = doubles(j.at("upper"));
    require(rep.lower.size() == rep.times.size() && rep.mass.size() == rep.times.size() &&
                rep.upper.size() == rep.times.size(),
            "survival bounds: series lengths differ");
    return rep;
}

json to_json(const BoundaryDensityEstimate& est) {
    return {{"time", number(est.time)},
            {"eta", number(est.eta)},
            {"normalized_inf", number(est.normalized_inf)},
            {"normalized_sup", number(est.normalized_sup)},
            {"n_samples", est.n_samples},
            {"from_grid", est.from_grid},
            {"reliable", est.reliable}};
}

BoundaryDensityEstimate boundary_density_from_json(const json& j) {
    BoundaryDensityEstimate est;
    est.time = to_double(j.at("time"));
    est.eta = to_double(j.at("eta"));
    est.normalized_inf = to_double(j.at("normalized_inf"));
    est.normalized_sup = to_double(j.at("normalized_sup"));
    est.n_samples = j.at("n_samples").get<std::size_t>();
    est.from_grid = j.at("from_grid").get<bool>();
    est.reliable = j.at("reliable").get<bool>();
    return est;
}

json to_json(const JumpSolution& sol) {
    return {{"d_bar", number(sol.d_bar)},
            {"f_at_dbar", number(sol.f_at_dbar)},
            {"defaulting_mass_fraction", number(sol.defaulting_mass_fraction)},
            {"collapse", sol.collapse}};
}

JumpSolution jump_solution_from_json(const json& j) {
    JumpSolution sol;
    sol.d_bar = to_double(j.at("d_bar"));
    sol.f_at_dbar = to_double(j.at("f_at_dbar"));
    sol.defaulting_mass_fraction = to_double(j.at("defaulting_mass_fraction"));
    sol.collapse = j.at("collapse").get<bool>();
    return sol;
}

json to_json(const CStar& c) {
    return {{"c_star", number(c.c_star)},
            {"m_star", number(c.m_star)},
            {"margin_terminal", number(c.margin_terminal)},
            {"margin_minimum", number(c.margin_minimum)}};
}

CStar c_star_from_json(const json& j) {
    CStar c;
    c.c_star = to_double(j.at("c_star"));
    c.m_star = to_double(j.at("m_star"));
    c.margin_terminal = to_double(j.at("margin_terminal"));
    c.margin_minimum = to_double(j.at("margin_minimum"));
    return c;
}

json to_json(const PostEventLoss& l) {
    return {{"value", number(l.value)},
            {"iterations", l.iterations},
            {"converged", l.converged},
            {"iterates", number_array(l.iterates)}};
}

PostEventLoss post_event_loss_from_json(const json& j) {
    PostEventLoss l;
    l.value = to_double(j.at("value"));
    l.iterations = j.at("iterations").get<std::size_t>();
    l.converged = j.at("converged").get<bool>();
    l.iterates = doubles(j.at("iterates"));
    return l;
}

json to_json(const JumpCertificate& c) {
    return {{"certified", c.certified}, {"q_sup", number(c.q_sup)}, {"iterations", c.iterations}};
}

JumpCertificate jump_certificate_from_json(const json& j) {
    JumpCertificate c;
    c.certified = j.at("certified").get<bool>();
    c.q_sup = to_double(j.at("q_sup"));
    c.iterations = j.at("iterations").get<std::size_t>();
    return c;
}

json to_json(const PhysicalJumpReport& rep) {
    json checks = json::array();
    for (const JumpCheck& c : rep.checks) {
        checks.push_back({{"event_index", c.event_index},
                          {"time", number(c.time)},
                          {"defaulted_fraction", number(c.defaulted_fraction)},
                          {"d_bar", number(c.d_bar)},
                          {"f_at_dbar", number(c.f_at_dbar)},
                          {"loss", number(c.loss)},
                          {"margin", number(c.margin)},
                          {"passed", c.passed}});
    }
    return {{"slack", number(rep.slack)},
            {"all_passed", rep.all_passed()},
            {"checks", checks},
            {"skipped", rep.skipped}};
}

PhysicalJumpReport physical_jump_from_json(const json& j) {
    PhysicalJumpReport rep;
    rep.slack = to_double(j.at("slack"));
    for (const json& c : j.at("checks")) {
        JumpCheck k;
        k.event_index = c.at("event_index").get<std::size_t>();
        k.time = to_double(c.at("time"));
        k.defaulted_fraction = to_double(c.at("defaulted_fraction"));
        k.d_bar = to_double(c.at("d_bar"));
        k.f_at_dbar = to_double(c.at("f_at_dbar"));
        k.loss = to_double(c.at("loss"));
        k.margin = to_double(c.at("margin"));
        k.passed = c.at("passed").get<bool>();
        rep.checks.push_back(k);
    }
    rep.skipped = j.at("skipped").get<std::vector<std::size_t>>();
    return rep;
}

json to_json(const CompareReport& rep) {
    json ladder = json::array();
    for (const LadderRow& r : rep.ladder) {
        ladder.push_back({{"n_banks", r.n_banks},
                          {"seeds", r.seeds},
                          {"gaps", number_array(r.gaps)},
                          {"median_gap", number(r.median_gap)},
                          {"mean_gap", number(r.mean_gap)},
                          {"max_gap", number(r.max_gap)}});
    }
    json checkpoints = json::array();
    for (const Checkpoint& c : rep.checkpoints) {
        checkpoints.push_back({{"time", number(c.time)},
                               {"pde_mass", number(c.pde_mass)},
                               {"mc_survival", number(c.mc_survival)},
                               {"std_error", number(c.std_error)},
                               {"z", number(c.z)}});
    }
    return {{"format_version", kFormatVersion},
            {"kind", "compare"},
            {"ladder", ladder},
            {"ladder_monotone", rep.ladder_monotone},
            {"checkpoints", checkpoints},
            {"mc_pde_gap", number(rep.mc_pde_gap)},
            {"max_z", number(rep.max_z)}};
}

CompareReport compare_report_from_json(const json& j) {
    check_version(j, "compare report");
    CompareReport rep;
    for (const json& r : j.at("ladder")) {
        LadderRow row;
        row.n_banks = r.at("n_banks").get<std::size_t>();
        row.seeds = r.at("seeds").get<std::vector<std::uint64_t>>();
        row.gaps = doubles(r.at("gaps"));
        row.median_gap = to_double(r.at("median_gap"));
        row.mean_gap = to_double(r.at("mean_gap"));
        row.max_gap = to_double(r.at("max_gap"));
        rep.ladder.push_back(std::move(row));
    }
    rep.ladder_monotone = j.at("ladder_monotone").get<bool>();
    for (const json& c : j.at("checkpoints")) {
        rep.checkpoints.push_back({to_double(c.at("time")), to_double(c.at("pde_mass")),
                                   to_double(c.at("mc_survival")), to_double(c.at("std_error")),
                                   to_double(c.at("z"))});
    }
    rep.mc_pde_gap = to_double(j.at("mc_pde_gap"));
    rep.max_z = to_double(j.at("max_z"));
    return rep;
}

json make_manifest(const std::string& command, const json& config, std::uint64_t seed, const json& grid) {
    return {{"format_version", kFormatVersion},
            {"code_version", code_version()},
            {"command", command},
            {"seed", seed},
            {"grid", grid},
            {"config", config}};
}

void write_manifest(const fs::path& dir, const json& manifest) {
    fs::create_directories(dir);
    write_json(dir / "manifest.json", manifest);
}

json read_manifest(const fs::path& dir) {
    json doc = read_json(dir / "manifest.json");
    check_version(doc, (dir / "manifest.json").string());
    return doc;
}

void save_survival(const LimitSdeResult& res, const fs::path& path) {
    std::vector<std::vector<double>> rows;
    rows.reserve(res.times.size());
    for (std::size_t k = 0; k < res.times.size(); ++k) {
        rows.push_back({res.times[k], res.survival[k].value, res.survival[k].std_error,
                        static_cast<double>(res.survival[k].n_paths)});
    }
    write_csv(path, {"t", "survival", "std_error", "n_paths"}, rows);
}

void save_limit_sde(const LimitSdeResult& res, const fs::path& dir) {
    fs::create_directories(dir);
    save_survival(res, dir / "survival.csv");
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < res.survivor_samples.size(); ++s) {
        for (double v : res.survivor_samples[s]) {
            rows.push_back({static_cast<double>(s), v});
        }
    }
    write_csv(dir / "samples.csv", {"set", "value"}, rows);
    write_json(dir / "limit_sde.json", {{"format_version", kFormatVersion},
                                        {"code_version", code_version()},
                                        {"kind", "limit_sde"},
                                        {"n_times", res.times.size()},
                                        {"n_sample_sets", res.survivor_samples.size()}});
}

LimitSdeResult load_limit_sde(const fs::path& dir) {
    const json doc = read_json(dir / "limit_sde.json");
    check_version(doc, "limit sde");
    LimitSdeResult res;
    for (const auto& row : read_csv(dir / "survival.csv", {"t", "survival", "std_error", "n_paths"})) {
        res.times.push_back(row[0]);
        res.survival.push_back({row[1], row[2], as_index(row[3])});
    }
    require(res.times.size() == doc.at("n_times").get<std::size_t>(), "limit sde: survival.csv is truncated");
    res.survivor_samples.resize(doc.at("n_sample_sets").get<std::size_t>());
    for (const auto& row : read_csv(dir / "samples.csv", {"set", "value"})) {
        const std::size_t s = as_index(row[0]);
        require(s < res.survivor_samples.size(), "limit sde: sample set out of range");
        res.survivor_samples[s].push_back(row[1]);
    }
    return res;
}

}  // namespace contagion::io
