#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fig8/choreography.hpp"
#include "fig8/integrator.hpp"
#include "test_support.hpp"

using namespace fig8;
using namespace fig8::testing;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Massless particle on the unit circular orbit around a unit central mass.
SystemConfig kepler_config() { return SystemConfig::paired(0, 2, {1.0, 0.0}); }

State kepler_circular() {
    State s;
    s.t = 0.0;
    s.pos = {{0, 0}, {1, 0}};
    s.vel = {{0, 0}, {0, 1}};
    return s;
}

}  // namespace

TEST_CASE("circular Kepler orbit closes after one analytic period") {
    const State s0 = kepler_circular();
    const State s1 = flow(kepler_config(), s0, kTwoPi);
    CHECK((s1.pos[1] - s0.pos[1]).norm() < 1e-9);
    CHECK((s1.vel[1] - s0.vel[1]).norm() < 1e-9);
}

TEST_CASE("eight-figure closure over the printed period") {
    const State u0 = eight_initial_state();
    const State uT = flow(three_body_config(), u0, printed_eight().period);
    CHECK(max_norm(uT, u0) < 1e-6);
}

TEST_CASE("forward then backward returns to the start") {
    const State u0 = eight_initial_state();
    auto cfg = three_body_config();
    const State fwd = flow(cfg, u0, 3.0);
    const State back = flow(cfg, fwd, -3.0);
    CHECK(max_norm(back, u0) < 1e-10);
}

TEST_CASE("flow basics") {
    const State u0 = eight_initial_state();
    auto cfg = three_body_config();
    CHECK(max_norm(flow(cfg, u0, 0.0), u0) == 0.0);

    // semigroup property
    const State ab = flow(cfg, flow(cfg, u0, 1.3), 0.9);
    const State once = flow(cfg, u0, 2.2);
    CHECK(max_norm(ab, once) < 1e-9);
}

TEST_CASE("configuration at 2 tbar is a mirrored relabeling of the start") {
    const State u0 = eight_initial_state();
    const State s = flow(three_body_config(), u0, 2.0 * printed_eight().t_bar());
    // Measured relation: u(2 tbar) equals the reflection across the y-axis
    // of u(0) with bodies relabeled by a 3-cycle; the axis role moves from
    // body 3 to body 2 (which lands on the opposite end of the eight).
    double best = 1e9;
    int axis_src = 2;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Vec2 rp{-u0.pos[static_cast<size_t>(p[i])].x, u0.pos[static_cast<size_t>(p[i])].y};
            const Vec2 vp{-u0.vel[static_cast<size_t>(p[i])].x, u0.vel[static_cast<size_t>(p[i])].y};
            worst = std::max(worst, (s.pos[static_cast<size_t>(i)] - rp).norm());
            worst = std::max(worst, (s.vel[static_cast<size_t>(i)] - vp).norm());
        }
        if (worst < best) {
            best = worst;
            axis_src = p[1];  // which original body became the axis body (slot 2)
        }
    }
    CHECK(best < 1e-6);
    CHECK(axis_src == 2);  // body 3's axis role passes to slot 2
    CHECK(std::abs(s.pos[1].y) < 1e-6);
    CHECK(s.pos[1].x == doctest::Approx(-1.081017086500).epsilon(1e-6));
}

TEST_CASE("dense output is consistent with the accepted grid") {
    const State u0 = eight_initial_state();
    Trajectory traj = integrate(three_body_config(), u0, 2.0);
    REQUIRE(traj.ok());
    REQUIRE(traj.steps() > 5);

    // exact at the stored endpoints
    const auto& ts = traj.times();
    const State mid_exact = traj.at(ts[ts.size() / 2]);
    const State start = traj.at(ts.front());
    CHECK(max_norm(start, u0) <= 1e-13);

    // continuity and energy consistency between nodes
    auto cfg = three_body_config();
    const double e0 = total_energy(cfg, u0);
    for (int g = 0; g <= 50; ++g) {
        const double t = 2.0 * g / 50.0;
        const State s = traj.at(t);
        CHECK(std::abs(total_energy(cfg, s) - e0) < 1e-10 * std::abs(e0));
    }
    (void)mid_exact;
}

TEST_CASE("energy drift over ten periods stays tiny") {
    const State u0 = eight_initial_state();
    auto cfg = three_body_config();
    const double e0 = total_energy(cfg, u0);
    const State s = flow(cfg, u0, 10.0 * printed_eight().period);
    CHECK(std::abs(total_energy(cfg, s) - e0) / std::abs(e0) < 1e-8);
}

TEST_CASE("collision aborts with a partial trajectory and flag") {
    // Head-on free fall of two unit masses (contact at pi/4). Depending on
    // where the error control lands, either the hard proximity guard or the
    // step-size underflow fires first; both abort loudly with the partial
    // trajectory.
    auto cfg = SystemConfig::paired(1, 0, {1.0, 1.0});
    State s;
    s.pos = {{-0.5, 0}, {0.5, 0}};
    s.vel = {{0, 0}, {0, 0}};
    Trajectory traj = integrate(cfg, s, 10.0);
    CHECK(traj.status() != IntegrationStatus::ok);
    CHECK((traj.status() == IntegrationStatus::collision ||
           traj.status() == IntegrationStatus::step_underflow));
    CHECK(traj.t_end() < 1.0);
    CHECK(traj.t_end() > 0.5);
    CHECK(traj.min_pair_distance() < 1e-4);  // it truly reached the encounter
    CHECK_THROWS_AS(flow(cfg, s, 10.0), Error);

    SUBCASE("an immediate guard violation raises CollisionProximity") {
        State close = s;
        close.pos = {{0, 0}, {5e-9, 0}};
        CHECK_THROWS_AS(flow(cfg, close, 1.0), CollisionProximity);
    }
}

TEST_CASE("event location on the dense output") {
    const State s0 = kepler_circular();
    Trajectory traj = integrate(kepler_config(), s0, 7.0);
    REQUIRE(traj.ok());

    SUBCASE("y2 vanishes at pi (the analytic crossing)") {
        const double t = find_event(traj, [](const State& s) { return s.pos[1].y; }, 3.0);
        CHECK(t == doctest::Approx(std::numbers::pi).epsilon(1e-10));
        CHECK(std::abs(traj.at(t).pos[1].y) < 1e-11);
    }
    SUBCASE("nearest crossing to the guess wins") {
        const double t = find_event(traj, [](const State& s) { return s.pos[1].y; }, 6.0);
        CHECK(t == doctest::Approx(kTwoPi).epsilon(1e-9));
    }
    SUBCASE("constant-sign events raise NoSignChange") {
        CHECK_THROWS_AS(
            find_event(traj, [](const State& s) { return 1.0 + s.pos[1].norm(); }, 3.0),
            NoSignChange);
    }
    SUBCASE("events on a backward trajectory") {
        Trajectory back = integrate(kepler_config(), kepler_circular(), -7.0);
        REQUIRE(back.ok());
        const double t = find_event(back, [](const State& s) { return s.pos[1].y; }, -3.0);
        CHECK(t == doctest::Approx(-std::numbers::pi).epsilon(1e-10));
    }
}

TEST_CASE("dense output matches the stored endpoints") {
    Trajectory traj = integrate(three_body_config(), eight_initial_state(), 2.0);
    REQUIRE(traj.ok());
    CHECK(max_norm(traj.at(traj.t_end()), traj.final_state()) <= 1e-13);
    CHECK(max_norm(traj.at(traj.t_begin()), traj.initial_state()) <= 1e-13);
}

TEST_CASE("settings validation and spans") {
    const State u0 = eight_initial_state();
    auto cfg = three_body_config();
    IntegratorSettings bad;
    bad.rel_tol = -1.0;
    CHECK_THROWS_AS(integrate(cfg, u0, 1.0, bad), DomainError);
    CHECK_THROWS_AS(integrate(cfg, u0, 0.0), DomainError);  // t_end == t0

    Trajectory traj = integrate(cfg, u0, 1.0);
    CHECK_THROWS_AS(traj.at(2.0), DomainError);
    CHECK_THROWS_AS(traj.at(-1.0), DomainError);
}

TEST_CASE("tolerance sweep drives the error down") {
    const State s0 = kepler_circular();
    double last = 1e9;
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        IntegratorSettings set;
        set.rel_tol = set.abs_tol = tol;
        const State s1 = flow(kepler_config(), s0, kTwoPi, set);
        const double err = (s1.pos[1] - s0.pos[1]).norm();
        CHECK(err < last * 2.0);  // monotone up to noise
        last = err;
    }
    CHECK(last < 1e-11);
}
