#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fig8/choreography.hpp"
#include "fig8/dynamics.hpp"
#include "fig8/symmetry.hpp"
#include "test_support.hpp"

using namespace fig8;
using namespace fig8::testing;

TEST_CASE("two bodies at unit distance") {
    auto cfg = SystemConfig::paired(1, 0, {1.0, 1.0});
    State s;
    s.pos = {{0, 0}, {1, 0}};
    s.vel = {{0, 0}, {0, 0}};
    const auto acc = accelerations(cfg, s);
    CHECK(acc[0].x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(acc[0].y == doctest::Approx(0.0));
    CHECK(acc[1].x == doctest::Approx(-1.0).epsilon(1e-15));

    CHECK(total_energy(cfg, s) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("eight-figure configuration against the direct-summation oracle") {
    const State s = eight_initial_state();
    const std::vector<double> masses = {1.0, 1.0, 1.0};
    const auto oracle = oracle_accelerations(masses, s.pos);
    const auto acc = accelerations(three_body_config(), s);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(acc[i].x == doctest::Approx(oracle[i].x).epsilon(1e-14));
        CHECK(acc[i].y == doctest::Approx(oracle[i].y).epsilon(1e-14));
    }
    // isosceles symmetry puts body 3's acceleration on the axis
    CHECK(acc[2].y == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(acc[2].x < 0.0);
    // frozen oracle value (direct summation over the printed configuration)
    CHECK(acc[2].x == doctest::Approx(-0.7117014441232073).epsilon(1e-12));
}

TEST_CASE("vector field layout") {
    StateGen gen(11);
    const State s = gen.state(3);
    auto cfg = three_body_config();
    const State f = vector_field(cfg, s);
    CHECK(f.t == 1.0);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(f.pos[i].x == s.vel[i].x);  // exact
        CHECK(f.pos[i].y == s.vel[i].y);
    }
    const auto oracle = oracle_accelerations(cfg.masses, s.pos);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(f.vel[i].x == doctest::Approx(oracle[i].x).epsilon(1e-14));
        CHECK(f.vel[i].y == doctest::Approx(oracle[i].y).epsilon(1e-14));
    }

    SUBCASE("zero velocities give a zero position block") {
        State rest = s;
        for (auto& v : rest.vel) v = {0, 0};
        const State fr = vector_field(cfg, rest);
        for (size_t i = 0; i < 3; ++i) {
            CHECK(fr.pos[i].x == 0.0);
            CHECK(fr.pos[i].y == 0.0);
        }
    }
}

TEST_CASE("energy of the eight against the oracle") {
    const State s = eight_initial_state();
    auto cfg = three_body_config();
    const double e = total_energy(cfg, s);
    CHECK(e == doctest::Approx(oracle_energy(cfg.masses, s.pos, s.vel)).epsilon(1e-14));
    CHECK(e == doctest::Approx(-1.2871419960311465).epsilon(1e-12));

    SUBCASE("zero velocities leave the potential term") {
        State rest = s;
        for (auto& v : rest.vel) v = {0, 0};
        CHECK(total_energy(cfg, rest) == doctest::Approx(-2.6545330723562657).epsilon(1e-12));
    }
}

TEST_CASE("min pairwise distance") {
    State s;
    s.pos = {{0, 0}, {3, 4}};
    s.vel = {{0, 0}, {0, 0}};
    CHECK(min_pairwise_distance(s) == doctest::Approx(5.0).epsilon(1e-15));

    const State eight = eight_initial_state();
    CHECK(min_pairwise_distance(eight) == doctest::Approx(2 * 0.3452633140).epsilon(1e-12));

    State tri;
    const double h = std::sqrt(3.0) / 2.0;
    tri.pos = {{0, 0}, {1, 0}, {0.5, h}};
    tri.vel = {{0, 0}, {0, 0}, {0, 0}};
    CHECK(min_pairwise_distance(tri) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Newton's third law and equivariances on random configurations") {
    StateGen gen(23);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + rep % 4;
        std::vector<double> masses;
        for (int i = 0; i < n; ++i) masses.push_back(gen.uniform(0.3, 2.5));
        auto cfg = SystemConfig::paired(0, n, masses);
        const State s = gen.state(n);
        const auto acc = accelerations(cfg, s);

        // sum of m_i a_i vanishes
        Vec2 total{};
        double scale = 0.0;
        for (int i = 0; i < n; ++i) {
            total += masses[i] * acc[i];
            scale = std::max(scale, masses[i] * acc[i].norm());
        }
        CHECK(total.norm() <= 1e-13 * std::max(1.0, scale));

        // translation equivariance
        State shifted = s;
        const Vec2 c{gen.uniform(-5, 5), gen.uniform(-5, 5)};
        for (auto& p : shifted.pos) p += c;
        const auto acc_shifted = accelerations(cfg, shifted);
        for (int i = 0; i < n; ++i)
            CHECK((acc_shifted[i] - acc[i]).norm() <= 1e-11 * std::max(1.0, acc[i].norm()));

        // rotation equivariance
        const double th = gen.uniform(0, 6.28);
        State rotated = s;
        for (auto& p : rotated.pos) p = rotate(p, th);
        const auto acc_rotated = accelerations(cfg, rotated);
        for (int i = 0; i < n; ++i)
            CHECK((acc_rotated[i] - rotate(acc[i], th)).norm() <=
                  1e-13 * std::max(1.0, acc[i].norm()));
    }
}

TEST_CASE("massless fourth body leaves the primaries' field bitwise unchanged") {
    const State s3 = eight_initial_state();
    const auto acc3 = accelerations(three_body_config(), s3);

    const State s4 = restricted_initial_state(2.5, 1.0);
    const auto acc4 = accelerations(restricted_config(), s4);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(acc4[i].x == acc3[i].x);  // identical evaluation path
        CHECK(acc4[i].y == acc3[i].y);
    }
    // and the massless body feels the primaries
    CHECK(acc4[3].norm() > 0.1);
}

TEST_CASE("collision guard") {
    auto cfg = SystemConfig::paired(1, 0, {1.0, 1.0});
    State s;
    s.pos = {{0, 0}, {5e-9, 0}};
    s.vel = {{0, 0}, {0, 0}};
    CHECK_THROWS_AS(accelerations(cfg, s), CollisionProximity);
    CHECK_THROWS_AS(total_energy(cfg, s), CollisionProximity);

    // a massless pair may coincide (no force between them)
    auto cfg2 = SystemConfig::paired(0, 3, {1.0, 0.0, 0.0});
    State s2;
    s2.pos = {{0, 0}, {1, 0}, {1, 0}};
    s2.vel = {{0, 0}, {0, 0}, {0, 0}};
    CHECK_NOTHROW(accelerations(cfg2, s2));
    CHECK(min_pairwise_distance(cfg2, s2) == doctest::Approx(1.0));
    CHECK(min_pairwise_distance(s2) == doctest::Approx(0.0));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(SystemConfig::paired(1, 0, {1.0}), DomainError);
    CHECK_THROWS_AS(SystemConfig::paired(0, 2, {1.0, -1.0}), DomainError);
    CHECK_THROWS_AS(SystemConfig::paired(0, 3, {1.0, 0.0, 1.0}), DomainError);  // non-trailing
    CHECK_NOTHROW(SystemConfig::paired(1, 2, {1.0, 1.0, 1.0, 0.0}));
}

TEST_CASE("flat round trip") {
    StateGen gen(37);
    const State s = gen.state(4);
    std::vector<double> flat(16);
    s.to_flat(flat);
    const State back = State::from_flat(s.t, flat);
    CHECK(max_norm(s, back) == 0.0);
}
