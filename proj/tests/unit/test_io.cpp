#include "contagion/errors.hpp"
#include "contagion/io.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

using namespace contagion;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("contagion_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const ModelParams kParams{0.1, 0.8, 0.3, 0.05};

}  // namespace

TEST_CASE("number formatting round-trips doubles") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
        CHECK(std::stod(io::format_double(x)) == x);
        CHECK(io::to_double(io::number(x)) == x);
    }
    CHECK(std::isinf(io::to_double(io::number(-std::numeric_limits<double>::infinity()))));
    CHECK(std::isnan(io::to_double(io::number(std::nan("")))));
}

TEST_CASE("simulation round-trip is exact") {
    SimulationOptions opt;
    opt.snapshot_cascades = true;
    opt.record_paths = true;
    const auto dist = InitialDistribution::uniform(0.05, 0.5, 0.01);
    const auto sim = simulate(kParams, dist, 200, TimeGrid::covering(kParams.horizon, 1e-3), 9, opt);
    REQUIRE_FALSE(sim.events.empty());
    const fs::path dir = scratch("sim");
    io::save_simulation(sim, dir);
    const auto back = io::load_simulation(dir);

    CHECK(back.n_banks == sim.n_banks);
    CHECK(back.seed == sim.seed);
    CHECK(back.grid.n_steps == sim.grid.n_steps);
    CHECK(back.grid.dt == sim.grid.dt);
    CHECK(back.params.exposure_c == sim.params.exposure_c);
    CHECK(back.tau0 == sim.tau0);
    REQUIRE(back.series.size() == sim.series.size());
    for (std::size_t k = 0; k < sim.series.size(); ++k) {
        CHECK(back.series[k].time == sim.series[k].time);
        CHECK(back.series[k].survivor_fraction == sim.series[k].survivor_fraction);
        CHECK(back.series[k].cum_log_loss == sim.series[k].cum_log_loss);
    }
    REQUIRE(back.events.size() == sim.events.size());
    for (std::size_t e = 0; e < sim.events.size(); ++e) {
        CHECK(back.events[e].n_defaults == sim.events[e].n_defaults);
        CHECK(back.events[e].survivors_before == sim.events[e].survivors_before);
        CHECK(back.events[e].loss_increment == sim.events[e].loss_increment);
    }
    REQUIRE(back.snapshots.size() == sim.snapshots.size());
    for (std::size_t e = 0; e < sim.snapshots.size(); ++e) {
        CHECK(back.snapshots[e].values == sim.snapshots[e].values);
    }
    CHECK(back.paths == sim.paths);
}

TEST_CASE("density and loss rate round-trip") {
    const auto dist = mollified_uniform(0.5, 1.5, 0.02);
    const SpaceGrid space{0.01, 4.0};
    const TimeGrid time = TimeGrid::covering(0.05, 1e-3);
    std::vector<double> v(time.n_steps + 1);
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = -0.3 * std::sin(0.01 * static_cast<double>(k)) - 1.0 / 3.0;
    }
    const LossRate lam = LossRate::from_values(time, v);
    const auto grid = solve_cdp(kParams, dist, lam, space, time, {.snapshot_stride = 10});

    const fs::path dir = scratch("density");
    io::save_density(grid, dir);
    const auto back = io::load_density(dir);
    CHECK(back.space.h == grid.space.h);
    CHECK(back.time.n_steps == grid.time.n_steps);
    CHECK(back.snapshot_steps == grid.snapshot_steps);
    REQUIRE(back.snapshots.size() == grid.snapshots.size());
    for (std::size_t s = 0; s < grid.snapshots.size(); ++s) {
        for (std::size_t j = 0; j < grid.snapshots[s].size(); ++j) {
            CHECK(std::abs(back.snapshots[s][j] - grid.snapshots[s][j]) <= 1e-15);
        }
    }
    CHECK(back.mass == grid.mass);
    CHECK(back.boundary_slope == grid.boundary_slope);

    const fs::path ldir = scratch("loss");
    io::save_loss_rate(lam, ldir);
    const auto lback = io::load_loss_rate(ldir);
    CHECK(lback.values == lam.values);
    CHECK(lback.l2_running == lam.l2_running);
    CHECK(lback.exploded == lam.exploded);
    CHECK(lback.t_reg_estimate == lam.t_reg_estimate);
}

TEST_CASE("report round-trips") {
    SECTION("fixed-point report") {
        FixedPointReport rep;
        rep.windows.push_back({0.0, 0.05, 7, 0.21, 3e-8, 44.7, 0.013, 2e-8, 6});
        rep.final_residual = 3e-8;
        rep.window_halvings = 1;
        rep.truncation_doublings = 2;
        rep.notes = {"window [0, 0.05] halved"};
        const auto back = io::fixed_point_report_from_json(nlohmann::json::parse(io::to_json(rep).dump()));
        REQUIRE(back.windows.size() == 1);
        CHECK(back.windows[0].iterations == 7);
        CHECK(back.windows[0].contraction == 0.21);
        CHECK(back.windows[0].probe_gap == 2e-8);
        CHECK(back.windows[0].probe_iterations == 6);
        CHECK(back.final_residual == rep.final_residual);
        CHECK(back.window_halvings == 1);
        CHECK(back.truncation_doublings == 2);
        CHECK(back.notes == rep.notes);
    }
    SECTION("analysis results") {
        const CStar c{47.95, 0.0261, 1e-5, 2e-5};
        const auto cb = io::c_star_from_json(io::to_json(c));
        CHECK(cb.c_star == c.c_star);
        CHECK(cb.m_star == c.m_star);
        CHECK(cb.margin_minimum == c.margin_minimum);

        const JumpSolution j{std::numeric_limits<double>::infinity(), 0.3, 1.0, true};
        const auto jb = io::jump_solution_from_json(nlohmann::json::parse(io::to_json(j).dump()));
        CHECK(std::isinf(jb.d_bar));
        CHECK(jb.collapse);
        CHECK(jb.defaulting_mass_fraction == 1.0);

        const PostEventLoss l{-0.01, 4, true, {0.0, -0.008, -0.0099, -0.01}};
        const auto lb = io::post_event_loss_from_json(io::to_json(l));
        CHECK(lb.value == l.value);
        CHECK(lb.iterations == 4);
        CHECK(lb.iterates == l.iterates);

        const JumpCertificate q{true, 0.4, 12};
        const auto qb = io::jump_certificate_from_json(io::to_json(q));
        CHECK(qb.certified);
        CHECK(qb.q_sup == 0.4);
        CHECK(qb.iterations == 12);

        BoundaryDensityEstimate e;
        e.time = 0.5;
        e.eta = 0.05;
        e.normalized_inf = 0.2;
        e.normalized_sup = 0.4;
        e.n_samples = 300;
        e.reliable = true;
        const auto eb = io::boundary_density_from_json(io::to_json(e));
        CHECK(eb.time == e.time);
        CHECK(eb.normalized_sup == e.normalized_sup);
        CHECK(eb.n_samples == 300);

        PhysicalJumpReport r;
        r.slack = 0.05;
        r.skipped = {2};
        r.checks.push_back({1, 0.01, 0.5, 0.34, 0.35, 0.34, 0.01, true});
        const auto rb = io::physical_jump_from_json(io::to_json(r));
        REQUIRE(rb.checks.size() == 1);
        CHECK(rb.checks[0].event_index == 1);
        CHECK(rb.checks[0].margin == 0.01);
        CHECK(rb.skipped == r.skipped);
        CHECK(rb.slack == r.slack);
    }
    SECTION("survival bounds") {
        SurvivalBoundsReport s;
        s.times = {0.0, 0.5};
        s.lower = {1.0, 0.6};
        s.mass = {1.0, 0.7};
        s.upper = {1.0, 0.8};
        s.violations = 0;
        s.slack = 1e-3;
        const auto sb = io::survival_bounds_from_json(io::to_json(s));
        CHECK(sb.times == s.times);
        CHECK(sb.lower == s.lower);
        CHECK(sb.mass == s.mass);
        CHECK(sb.upper == s.upper);
        CHECK(sb.slack == s.slack);
    }
    SECTION("compare report") {
        CompareReport rep;
        rep.ladder.push_back({1000, {1, 2}, {0.03, 0.02}, 0.025, 0.025, 0.03});
        rep.checkpoints.push_back({0.1, 0.99, 0.9899, 3e-4, 0.33});
        rep.mc_pde_gap = 1e-4;
        rep.max_z = 0.33;
        rep.ladder_monotone = true;
        const auto b = io::compare_report_from_json(nlohmann::json::parse(io::to_json(rep).dump()));
        REQUIRE(b.ladder.size() == 1);
        CHECK(b.ladder[0].seeds == rep.ladder[0].seeds);
        CHECK(b.ladder[0].gaps == rep.ladder[0].gaps);
        REQUIRE(b.checkpoints.size() == 1);
        CHECK(b.checkpoints[0].z == 0.33);
        CHECK(b.max_z == rep.max_z);
        CHECK(b.ladder_monotone);
    }
}

TEST_CASE("limit SDE round-trip") {
    LimitSdeOptions opt;
    opt.sample_steps = {0, 10};
    const auto res = simulate_limit_sde(kParams, InitialDistribution::uniform(0.1, 0.6, 0.05),
                                        LossDriver::none(TimeGrid::covering(0.05, 1e-3)), 500, 4, opt);
    const fs::path dir = scratch("sde");
    io::save_limit_sde(res, dir);
    const auto back = io::load_limit_sde(dir);
    CHECK(back.times == res.times);
    REQUIRE(back.survival.size() == res.survival.size());
    for (std::size_t k = 0; k < res.survival.size(); ++k) {
        CHECK(back.survival[k].value == res.survival[k].value);
        CHECK(back.survival[k].std_error == res.survival[k].std_error);
        CHECK(back.survival[k].n_paths == res.survival[k].n_paths);
    }
    CHECK(back.survivor_samples == res.survivor_samples);
}

TEST_CASE("format version is enforced") {
    const fs::path dir = scratch("version");
    io::write_manifest(dir, io::make_manifest("simulate", {{"x", 1}}, 5, {{"dt", 0.1}}));
    const auto m = io::read_manifest(dir);
    CHECK(m.at("seed") == 5);
    CHECK(m.at("command") == "simulate");

    auto bad = m;
    bad["format_version"] = io::kFormatVersion + 1;
    io::write_json(dir / "manifest.json", bad);
    CHECK_THROWS_AS(io::read_manifest(dir), ValidationError);
    bad.erase("format_version");
    io::write_json(dir / "manifest.json", bad);
    CHECK_THROWS_AS(io::read_manifest(dir), ValidationError);

    const fs::path sdir = scratch("sim_version");
    const auto sim = simulate(kParams, InitialDistribution::uniform(0.5, 1.0, 0.1), 10,
                              TimeGrid::covering(0.01, 1e-3), 1);
    io::save_simulation(sim, sdir);
    auto doc = io::read_json(sdir / "simulation.json");
    doc["format_version"] = 0;
    io::write_json(sdir / "simulation.json", doc);
    CHECK_THROWS_AS(io::load_simulation(sdir), ValidationError);
}

TEST_CASE("csv header mismatch is rejected") {
    const fs::path dir = scratch("csv");
    io::write_csv(dir / "a.csv", {"t", "x"}, {{0.0, 1.0}, {0.5, 2.0}});
    CHECK(io::read_csv(dir / "a.csv", {"t", "x"}).size() == 2);
    CHECK_THROWS_AS(io::read_csv(dir / "a.csv", {"t", "y"}), ValidationError);
}
