#include "contagion/compare.hpp"
#include "contagion/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace contagion;
using Catch::Approx;

TEST_CASE("interpolate and median") {
    const TimeGrid g{0.5, 2};
    const std::vector<double> v{0.0, -1.0, -3.0};
    CHECK(interpolate(g, v, 0.25) == Approx(-0.5));
    CHECK(interpolate(g, v, 0.75) == Approx(-2.0));
    CHECK(interpolate(g, v, 1.0) == -3.0);
    CHECK(interpolate(g, v, 5.0) == -3.0);
    CHECK(interpolate(g, v, -1.0) == 0.0);
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("loss_gap") {
    SimulationResult sim;
    sim.grid = TimeGrid{0.25, 4};
    for (std::size_t k = 0; k <= 4; ++k) {
        sim.series.push_back({0.25 * static_cast<double>(k), 1.0, -0.1 * static_cast<double>(k)});
    }
    const TimeGrid fine{0.125, 8};
    std::vector<double> exact(9);
    for (std::size_t k = 0; k <= 8; ++k) {
        exact[k] = -0.05 * static_cast<double>(k);
    }
    CHECK(loss_gap(sim, fine, exact) == Approx(0.0).margin(1e-15));
    exact[8] -= 0.2;
    CHECK(loss_gap(sim, fine, exact) == Approx(0.2).margin(1e-15));
}

TEST_CASE("small comparison run") {
    const ModelParams p{0.0, 1.0, 0.1, 0.1};
    const auto dist = mollified_uniform(0.5, 1.5, 0.02);
    FixedPointOptions fo;
    fo.space = SpaceGrid{0.01, 8.0};
    fo.dt = 1e-3;
    fo.window_length = 0.05;
    fo.tol = 1e-6;
    const auto fp = solve_lambda(p, dist, fo);
    REQUIRE_FALSE(fp.lam.exploded);
    const auto density = solve_cdp(p, dist, fp.lam, fo.space, fp.lam.time);

    CompareOptions co;
    co.n_ladder = {200, 2000};
    co.n_seeds = 3;
    co.mc_paths = 5000;
    co.n_checkpoints = 5;
    const auto rep = compare_methods(p, dist, fp.lam, density, co);
    REQUIRE(rep.ladder.size() == 2);
    for (const auto& row : rep.ladder) {
        CHECK(row.gaps.size() == 3);
        CHECK(row.seeds.size() == 3);
        for (double g : row.gaps) {
            CHECK(g >= 0.0);
        }
        CHECK(row.median_gap <= row.max_gap);
    }
    REQUIRE(rep.checkpoints.size() == 5);
    for (const auto& c : rep.checkpoints) {
        CHECK(c.pde_mass <= 1.0 + 1e-12);
        CHECK(c.z >= 0.0);
    }
    CHECK(rep.max_z >= 0.0);
    CHECK(rep.max_z < 5.0);
}
