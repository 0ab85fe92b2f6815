#include <doctest.h>

#include <random>

#include "holo/techniques.hpp"
#include "oracles.hpp"

using namespace holo::tech;
using holo::geom::Side;
using holo::geom::Vec3;

namespace {

Pose ball_at(std::int64_t t, Vec3 p) {
    Pose x;
    x.device_id = "ball";
    x.role = holo::tracking::Role::ball;
    x.timestamp_us = t;
    x.position = p;
    return x;
}

Pose hand_at(Vec3 p) {
    Pose x;
    x.device_id = "hand";
    x.role = holo::tracking::Role::right_hand;
    x.position = p;
    return x;
}

double energy(const VirtualBall& b, const PhysicsConfig& c) {
    return 0.5 * holo::geom::dot(b.velocity, b.velocity) - holo::geom::dot(c.gravity, b.position);
}

} // namespace

TEST_CASE("physics validation") {
    PhysicsConfig c;
    CHECK_NOTHROW(validate(c));
    c.dt = 0.0;
    CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("InvalidPhysics"), holo::Error);
    c = {};
    c.restitution = 1.5;
    CHECK_THROWS_AS(validate(c), holo::Error);
}

TEST_CASE("free fall from rest matches the parabola") {
    PhysicsConfig c;
    c.dt = 1.0 / 1000.0;
    VirtualBall b{{0, 3, 0}, {0, 0, 0}};
    for (int i = 0; i < 1000; ++i) b = step_ballistic(b, c);
    const auto o = oracle::parabola({0, 3, 0}, {0, 0, 0}, 9.81, 1.0);
    CHECK(std::abs(b.position.y - o.y) <= 5e-3);
    CHECK(b.state == BallState::in_play);
}

TEST_CASE("integrator error shrinks linearly with dt") {
    auto err = [](double dt) {
        PhysicsConfig c;
        c.dt = dt;
        VirtualBall b{{0, 0, 0}, {0, 2, -2}};
        const int n = static_cast<int>(std::lround(0.5 / dt));
        for (int i = 0; i < n; ++i) b = step_ballistic(b, c);
        const auto o = oracle::parabola({0, 0, 0}, {0, 2, -2}, 9.81, 0.5);
        return std::abs(b.position.y - o.y);
    };
    const double e1 = err(1.0 / 250.0);
    const double e2 = err(1.0 / 500.0);
    CHECK(e2 == doctest::Approx(e1 / 2.0).epsilon(0.01));
    // Semi-implicit Euler overshoots by g t dt / 2.
    CHECK(e1 == doctest::Approx(9.81 * 0.5 / 250.0 / 2.0).epsilon(1e-6));
}

TEST_CASE("a ball leaving the play volume stops") {
    PhysicsConfig c;
    VirtualBall b{{0, -1.99, 0}, {0, -5, 0}};
    for (int i = 0; i < 10; ++i) b = step_ballistic(b, c);
    CHECK(b.state == BallState::out_of_bounds);
    const VirtualBall frozen = step_ballistic(b, c);
    CHECK(frozen == b);
}

TEST_CASE("contact detection") {
    PhysicsConfig c;
    std::vector<Pose> h;
    std::optional<Contact> contact;
    for (int k = 0; k < 60 && !contact; ++k) {
        h.push_back(ball_at(k * 10'000, {0.3, 0.2, 1.0 - 0.03 * k}));
        contact = detect_screen_contact(h, c, std::nullopt);
    }
    REQUIRE(contact.has_value());
    CHECK(std::abs(h.back().position.z) <= c.contact_threshold);
    CHECK(contact->thrower_side == Side::front);
    CHECK(contact->velocity.z == doctest::Approx(-3.0));
    CHECK(contact->point.u == doctest::Approx(0.3));
    // Cooldown suppresses a second report.
    CHECK_FALSE(detect_screen_contact(h, c, contact->t_us).has_value());
    // Moving away from the board is not a contact.
    std::vector<Pose> away;
    for (int k = 0; k < 5; ++k) away.push_back(ball_at(k * 10'000, {0, 0, 0.01 * k}));
    CHECK_FALSE(detect_screen_contact(away, c, std::nullopt).has_value());
}

TEST_CASE("contact detector remembers the last contact") {
    PhysicsConfig c;
    ContactDetector det;
    std::vector<Pose> h;
    int hits = 0;
    for (int k = 0; k < 80; ++k) {
        h.push_back(ball_at(k * 10'000, {0, 0, 0.5 - 0.02 * k}));
        if (det.update(h, c)) ++hits;
    }
    CHECK(hits == 1);
    CHECK(det.last_contact_us().has_value());
}

TEST_CASE("handoff spawns at the contact point on the board") {
    PhysicsConfig c;
    Contact k{holo::geom::make_screen_point(0.4, 0.1, {}), {0, 1, -2}, 5, Side::front};
    const VirtualBall b = handoff_physical_to_virtual(k, c);
    CHECK(b.position == Vec3{0.4, 0.1, 0.0});
    CHECK(b.velocity == Vec3{0, 1, -2});
    CHECK(b.owner_side == Owner::none);
    CHECK(b.state == BallState::in_play);
}

TEST_CASE("paddle reflects and never adds energy") {
    PhysicsConfig c;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1, 1);
    int hits = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 p{d(rng), d(rng) + 1, d(rng) - 1.5};
        const Vec3 v{3 * d(rng), 3 * d(rng), 3 * d(rng)};
        VirtualBall b{p, v};
        Paddle paddle{hand_at(p + Vec3{0.1 * d(rng), 0.1 * d(rng), 0.1 * d(rng)}), 0.15, {}};
        if (auto hit = paddle_hit(b, paddle, c)) {
            ++hits;
            CHECK(energy(*hit, c) <= energy(b, c) + 1e-12);
            CHECK(holo::geom::norm(hit->velocity) == doctest::Approx(holo::geom::norm(v)));
        }
    }
    CHECK(hits > 100);
    // Far away: no hit.
    CHECK_FALSE(paddle_hit(VirtualBall{{0, 0, 0}, {1, 0, 0}}, Paddle{hand_at({1, 1, 1}), 0.15, {}}, c).has_value());
}

TEST_CASE("head-on paddle hit reverses the ball") {
    PhysicsConfig c;
    c.restitution = 0.5;
    const VirtualBall b{{0, 1, -1.0}, {0, 0, -2}};
    const auto hit = paddle_hit(b, Paddle{hand_at({0, 1, -1.1}), 0.15, {}}, c);
    REQUIRE(hit.has_value());
    CHECK(hit->velocity.z == doctest::Approx(1.0));
    CHECK(hit->owner_side == Owner::back);
}

TEST_CASE("extrusion depth map") {
    ExtrusionField f;
    CHECK_THROWS_WITH_AS(extrude(f, hand_at({0, 0, -0.1})), doctest::Contains("NotInModelingMode"), holo::Error);
    f.set_modeling(true);
    const auto cell = f.cell_at(0.0, 0.0);
    REQUIRE(cell.has_value());
    f = extrude(f, hand_at({0, 0, -0.1}));
    CHECK(f.engaged());
    CHECK(f.depth(cell->first, cell->second) == doctest::Approx(0.1));
    f = extrude(f, hand_at({0, 0, -0.05}));  // shallower push keeps the max
    CHECK(f.depth(cell->first, cell->second) == doctest::Approx(0.1));
    f = extrude(f, hand_at({0, 0, -2.0}));
    CHECK(f.depth(cell->first, cell->second) == doctest::Approx(0.5));
    f = extrude(f, hand_at({0, 0, 0.005}));  // inside the hysteresis band
    CHECK(f.engaged());
    f = extrude(f, hand_at({0, 0, 0.02}));
    CHECK_FALSE(f.engaged());
    CHECK_FALSE(f.cell_at(2.5, 0).has_value());
    f.reset();
    CHECK(f.depth(cell->first, cell->second) == 0.0);

    ExtrusionConfig bad;
    bad.cols = 0;
    CHECK_THROWS_WITH_AS(ExtrusionField{bad}, doctest::Contains("InvalidModeling"), holo::Error);
}
