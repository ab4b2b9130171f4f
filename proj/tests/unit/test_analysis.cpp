#include "contagion/analysis.hpp"
#include "contagion/errors.hpp"
#include "contagion/normal.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace contagion;
using Catch::Approx;

namespace {

Profile two_block() {
    // Density 2 on (0, 0.25] and 0.5 on [1, 2].
    return Profile::from_nodes({0.0, 0.25, 0.25, 1.0, 1.0, 2.0, 2.0}, {2.0, 2.0, 0.0, 0.0, 0.5, 0.5, 0.0});
}

Profile far_profile() {
    return Profile::from_nodes({1.0, 1.5, 2.0}, {0.0, 2.0, 0.0});
}

// c*(sigma) by a dense scan over M in (0, 5].
double c_star_scan(double sigma) {
    const double band = oracle::Phi(3.0 / sigma) - oracle::Phi(2.0 / sigma);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 500000; ++i) {
        const double m = 5.0 * i / 500000.0;
        best = std::min(best, std::max((m + 1.0) / band, 1.0 / (2.0 * oracle::Phi(m / sigma) - 1.0)));
    }
    return best;
}

}  // namespace

TEST_CASE("profile basics") {
    const Profile p = two_block();
    CHECK(p.total_mass() == Approx(1.0).margin(1e-15));
    CHECK(p.mass_below(0.25) == Approx(0.5).margin(1e-15));
    CHECK(p.mass_below(1.5) == Approx(0.75).margin(1e-15));
    CHECK(p.value_right(0.25) == 0.0);
    CHECK(p.value_right(0.1) == 2.0);
    CHECK_THROWS_AS(Profile::from_nodes({1.0, 0.5}, {1.0, 1.0}), ValidationError);
}

TEST_CASE("jump_size") {
    SECTION("two-block profile") {
        const JumpSolution s = jump_size(two_block(), 0.5);
        CHECK(s.d_bar == Approx(-0.5 * std::log(0.5)).margin(1e-8));
        CHECK(s.defaulting_mass_fraction == Approx(0.5).margin(1e-12));
        CHECK(s.f_at_dbar >= s.d_bar - 1e-9);
        CHECK_FALSE(s.collapse);
        // Root bracketing.
        auto G = [](double y) { return y + 0.5 * std::log(1.0 - two_block().mass_below(y)); };
        CHECK(G(s.d_bar - 1e-8) <= 0.0);
        CHECK(G(s.d_bar + 1e-8) > 0.0);
    }
    SECTION("small boundary density gives no jump") {
        const Profile p = Profile::from_nodes({0.0, 1.0, 2.0}, {0.5, 0.5, 0.5});
        CHECK(jump_size(Profile::from_nodes({0.0, 2.0}, {0.5, 0.5}), 0.5).d_bar == 0.0);
        CHECK(jump_size(p, 0.0).d_bar == 0.0);
    }
    SECTION("no interaction") {
        CHECK(jump_size(two_block(), 0.0).d_bar == 0.0);
    }
    SECTION("total collapse") {
        const Profile p = Profile::from_nodes({0.0, 0.1}, {10.0, 10.0});
        const JumpSolution s = jump_size(p, 0.9);
        CHECK(s.collapse);
        CHECK(std::isinf(s.d_bar));
        CHECK(s.defaulting_mass_fraction == 1.0);
    }
}

TEST_CASE("random profiles: jump_size brackets its root") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> y{0.0};
        std::vector<double> p{5.0 * u(gen)};
        for (int i = 0; i < 6; ++i) {
            y.push_back(y.back() + 0.05 + 0.3 * u(gen));
            p.push_back(5.0 * u(gen));
        }
        y.push_back(y.back() + 0.1);
        p.push_back(0.0);
        const Profile prof = Profile::from_nodes(y, p);
        const double c = 0.9 * u(gen);
        const JumpSolution s = jump_size(prof, c);
        if (s.d_bar > 0.0 && std::isfinite(s.d_bar)) {
            const double m = prof.total_mass();
            auto G = [&](double x) { return x + c * std::log(1.0 - prof.mass_below(x) / m); };
            CHECK(G(s.d_bar - 1e-8) <= 0.0);
            CHECK(G(s.d_bar + 1e-8) > 0.0);
        }
    }
}

TEST_CASE("c_star") {
    const CStar one = c_star(1.0);
    // The scan over a grid in M can only overshoot the minimum.
    CHECK(one.c_star == Approx(c_star_scan(1.0)).epsilon(2e-5));
    CHECK(one.c_star <= c_star_scan(1.0) * (1.0 + 1e-9));
    CHECK(one.c_star == Approx(48.0).epsilon(0.01));
    for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const CStar c = c_star(s);
        CHECK(c.margin_terminal > 0.0);
        CHECK(c.margin_minimum > 0.0);
        const double band = norm_cdf(3.0 / s) - norm_cdf(2.0 / s);
        CHECK(c.c_star * (1 + 1e-6) > (c.m_star + 1.0) / band);
        CHECK(c.c_star * (1 + 1e-6) > 1.0 / (2.0 * norm_cdf(c.m_star / s) - 1.0));
    }
    // Growth for large sigma. c*(1) > c*(2): the minimum over M is not monotone for small sigma.
    double prev = 0.0;
    for (double s : {2.0, 4.0, 8.0, 16.0}) {
        const double c = c_star(s).c_star;
        CHECK(c > prev);
        prev = c;
    }
    CHECK(c_star(64.0).c_star > c_star(8.0).c_star);
}

TEST_CASE("post_event_loss") {
    const ModelParams p{0.0, 1.0, 0.5, 1.0};
    SECTION("mass far from the boundary") {
        const auto l = post_event_loss(far_profile(), 1.0, p, 1e-4);
        CHECK(l.converged);
        CHECK(std::abs(l.value) < 1e-8);
    }
    SECTION("no interaction") {
        const auto l = post_event_loss(two_block(), 1.0, ModelParams{0.0, 1.0, 0.0, 1.0}, 1e-2);
        CHECK(l.value == 0.0);
        CHECK(l.iterations == 1);
    }
    SECTION("iterates are non-increasing") {
        const Profile prof = Profile::from_nodes({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0});
        const auto l = post_event_loss(prof, 1.0, p, 1e-2);
        CHECK(l.converged);
        for (std::size_t i = 1; i < l.iterates.size(); ++i) {
            CHECK(l.iterates[i] <= l.iterates[i - 1] + 1e-15);
        }
        CHECK(l.value < 0.0);
        CHECK(l.value >= p.exposure_c * std::log(1e-300));
    }
    SECTION("Hoelder scaling in epsilon") {
        for (double gamma : {0.0, 1.0}) {
            std::vector<double> y;
            std::vector<double> v;
            for (int i = 0; i <= 400; ++i) {
                y.push_back(i * 0.0025);
                v.push_back(std::pow(y.back(), gamma));
            }
            y.push_back(1.0);
            v.push_back(0.0);
            const Profile prof = Profile::from_nodes(y, v);
            const double m = prof.total_mass();
            std::vector<double> xs;
            std::vector<double> ys;
            for (double eps : {1e-2, 1e-3, 1e-4}) {
                const auto l = post_event_loss(prof, m, ModelParams{0.0, 1.0, 0.2, 1.0}, eps);
                xs.push_back(std::log(eps));
                ys.push_back(std::log(std::abs(l.value)));
            }
            const double slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
            INFO("gamma " << gamma << " slope " << slope);
            CHECK(slope >= (1.0 + gamma) / 2.0 - 0.1);
        }
    }
}

TEST_CASE("certify_jump") {
    const ModelParams p{0.0, 1.0, 0.5, 1.0};
    SECTION("far profile") {
        const auto c = certify_jump(far_profile(), 1.0, p, 1e-4, 0.01);
        CHECK_FALSE(c.certified);
        CHECK(c.q_sup < 1e-6);
    }
    SECTION("no interaction") {
        const auto c = certify_jump(two_block(), 1.0, ModelParams{0.0, 1.0, 0.0, 1.0}, 1e-4, 0.01);
        CHECK_FALSE(c.certified);
    }
    SECTION("dense boundary layer above c*/C") {
        const double eta = 0.01;
        const double dens = 1.01 * c_star(1.0).c_star / p.exposure_c;  // normalized, total mass 1
        const double inner = dens * eta;
        const Profile prof = Profile::from_nodes({0.0, eta, eta, 1.0, 1.0, 2.0, 2.0},
                                                 {dens, dens, 0.0, 0.0, 1.0 - inner, 1.0 - inner, 0.0});
        const auto c = certify_jump(prof, 1.0, p, 1e-6, eta);
        CHECK(c.certified);
        CHECK(c.q_sup > 2.0 * eta / 3.0);
    }
}

TEST_CASE("certified implies a positive jump on random profiles") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ModelParams p{0.0, 1.0, 0.5, 1.0};
    for (int trial = 0; trial < 100; ++trial) {
        const double eta = 0.01;
        const double dens = 400.0 * u(gen) * u(gen);
        const double inner = std::min(0.9, dens * eta);
        const double d = inner / eta;
        const Profile prof = Profile::from_nodes({0.0, eta, eta, 1.0, 1.0, 2.0, 2.0},
                                                 {d, d, 0.0, 0.0, 1.0 - inner, 1.0 - inner, 0.0});
        const auto c = certify_jump(prof, prof.total_mass(), p, 1e-6, eta);
        if (c.certified) {
            CHECK(jump_size(prof, p.exposure_c).d_bar > 0.0);
        }
    }
}

TEST_CASE("boundary density estimates") {
    SECTION("no samples") {
        const std::vector<double> v{0.5, 0.7};
        const auto e = estimate_boundary_density(v, 1.0, 0.1);
        CHECK(e.normalized_inf == 0.0);
        CHECK(e.normalized_sup == 0.0);
        CHECK_FALSE(e.reliable);
    }
    SECTION("uniform sample") {
        std::mt19937_64 gen(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> v(100000);
        for (double& x : v) {
            x = u(gen);
        }
        const auto e = estimate_boundary_density(v, 1.0, 0.1);
        CHECK(e.normalized_inf == Approx(1.0).margin(0.1));
        CHECK(e.normalized_sup == Approx(1.0).margin(0.1));
        CHECK(e.normalized_inf <= e.normalized_sup);
        CHECK(e.reliable);

        auto shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        const auto e2 = estimate_boundary_density(shuffled, 1.0, 0.1);
        CHECK(e2.normalized_inf == e.normalized_inf);
        CHECK(e2.normalized_sup == e.normalized_sup);

        // Scale by 4 (a power of two keeps the bin edges exact).
        auto scaled = v;
        for (double& x : scaled) {
            x *= 4.0;
        }
        const auto e3 = estimate_boundary_density(scaled, 1.0, 0.4);
        CHECK(e3.normalized_inf == Approx(e.normalized_inf / 4.0).epsilon(1e-12));
        CHECK(e3.normalized_sup == Approx(e.normalized_sup / 4.0).epsilon(1e-12));

        const auto ladder = boundary_density_ladder(v, 1.0, 0.1);
        REQUIRE(ladder.size() == 3);
        CHECK(ladder[2].eta == Approx(0.025));
    }
    SECTION("linear grid column") {
        const double h = 1e-3;
        std::vector<double> col(1001);
        for (std::size_t j = 0; j < col.size(); ++j) {
            col[j] = 2.0 * j * h;
        }
        col.back() = 0.0;
        const double mass = 0.8;
        const auto e = estimate_boundary_density_grid(col, h, mass, 0.01);
        CHECK(e.from_grid);
        CHECK(e.normalized_sup == Approx(0.02 / mass).margin(0.003));
        const auto e_small = estimate_boundary_density_grid(col, h, mass, 0.003);
        CHECK(e_small.normalized_inf < e.normalized_sup);
        CHECK(e_small.normalized_inf <= 2.0 * h / mass + 1e-12);
    }
}

TEST_CASE("holder_exponent") {
    SECTION("Lipschitz line") {
        std::vector<double> l(10001);
        for (std::size_t k = 0; k < l.size(); ++k) {
            l[k] = -static_cast<double>(k) * 1e-4;
        }
        const auto h = holder_exponent(l, 1e-4);
        REQUIRE(h);
        CHECK(*h == Approx(1.0).margin(0.02));
    }
    SECTION("constant series") {
        CHECK_FALSE(holder_exponent(std::vector<double>(100, -0.3), 1e-3));
        CHECK_THROWS_AS(holder_exponent(std::vector<double>(10, 0.0), 1e-3), ValidationError);
    }
    SECTION("Brownian paths") {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> z(0.0, 1.0);
        double total = 0.0;
        for (int seed = 0; seed < 50; ++seed) {
            std::vector<double> b(10001, 0.0);
            for (std::size_t k = 1; k < b.size(); ++k) {
                b[k] = b[k - 1] + 1e-2 * z(gen);
            }
            const auto h = holder_exponent(b, 1e-4);
            REQUIRE(h);
            total += *h;
        }
        CHECK(total / 50.0 == Approx(0.5).margin(0.08));
    }
}

TEST_CASE("empirical jump condition") {
    SECTION("agrees with the cascade scan on random snapshots") {
        std::mt19937_64 gen(8);
        std::uniform_real_distribution<double> u(-0.2, 1.0);
        std::uniform_real_distribution<double> cu(0.0, 0.9);
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> v(50);
            for (double& x : v) {
                x = u(gen);
            }
            std::sort(v.begin(), v.end());
            const double c = cu(gen);
            const std::size_t d = cascade_size(v, v.size(), c);
            if (d == 0 || d == v.size()) {
                continue;
            }
            const JumpCheck chk = empirical_jump(v, c);
            const double loss = -c * std::log(1.0 - static_cast<double>(d) / 50.0);
            // The scan stops exactly at the empirical root: tight up to rounding.
            CHECK(std::abs(chk.f_at_dbar - loss) < 2.0 / 50.0);
            CHECK(chk.f_at_dbar - loss >= -1e-12);
        }
    }
    SECTION("single default") {
        const std::vector<double> v{-0.01, 0.5, 0.8, 1.0};
        const JumpCheck chk = empirical_jump(v, 0.3);
        CHECK(chk.f_at_dbar >= -0.3 * std::log(0.75) - 1e-15);
    }
    SECTION("report skips events without snapshots") {
        SimulationResult sim;
        sim.events.push_back({0.1, 100, 10, 0.5 * std::log(0.9)});
        sim.events.push_back({0.2, 200, 1, 0.5 * std::log(199.0 / 200.0)});
        const auto rep = verify_physical_jump_condition(sim, 0.5);
        CHECK(rep.checks.empty());
        REQUIRE(rep.skipped.size() == 1);
        CHECK(rep.skipped[0] == 0);
    }
}
