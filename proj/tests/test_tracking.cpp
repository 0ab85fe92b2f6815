#include <doctest.h>

#include <random>

#include "holo/tracking.hpp"
#include "oracles.hpp"

using namespace holo::tracking;
using holo::geom::Vec3;

namespace {

Pose pose(const std::string& dev, Role role, std::int64_t t, Vec3 p) {
    Pose x;
    x.device_id = dev;
    x.role = role;
    x.timestamp_us = t;
    x.position = p;
    return x;
}

PoseMap standing(std::int64_t t = 0) {
    PoseMap m;
    m[Role::head] = pose("h", Role::head, t, {0, 1.7, -1});
    m[Role::waist] = pose("w", Role::waist, t, {0, 1.0, -1});
    // Facing the audience (+z), so the presenter's left is +x.
    m[Role::left_foot] = pose("lf", Role::left_foot, t, {0.12, 0.15, -1});
    m[Role::right_foot] = pose("rf", Role::right_foot, t, {-0.12, 0.15, -1});
    m[Role::left_hand] = pose("lh", Role::left_hand, t, {0.4, 1.1, -1});
    m[Role::right_hand] = pose("rh", Role::right_hand, t, {-0.4, 1.1, -1});
    return m;
}

} // namespace

TEST_CASE("quaternion rotation and validation") {
    const double s = std::sqrt(0.5);
    const Quat q{s, 0, 0, s};  // 90 degrees about z
    const Vec3 r = q.rotate({1, 0, 0});
    CHECK(r.x == doctest::Approx(0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(1));
    Pose p = pose("d", Role::head, 0, {0, 0, 0});
    p.orientation = Quat{2, 0, 0, 0};
    CHECK_THROWS_WITH_AS(validate(p), doctest::Contains("InvalidPose"), holo::Error);
    p.orientation = Quat{};
    p.position.x = NAN;
    CHECK_THROWS_AS(validate(p), holo::Error);
}

TEST_CASE("roles round-trip through names") {
    for (Role r : {Role::head, Role::waist, Role::left_foot, Role::right_foot, Role::left_hand, Role::right_hand,
                   Role::ball}) {
        CHECK(role_from_string(to_string(r)) == r);
    }
    CHECK_THROWS_AS(role_from_string("tail"), holo::Error);
}

TEST_CASE("smoothing") {
    std::vector<Pose> h = {pose("d", Role::head, 0, {0, 0, 0}), pose("d", Role::head, 10, {1, 0, 0})};
    CHECK(smooth_pose(h, 1.0).position.x == doctest::Approx(1.0));
    CHECK(smooth_pose(h, 0.25).position.x == doctest::Approx(0.25));
    CHECK_THROWS_AS(smooth_pose({}, 0.5), holo::Error);
    CHECK_THROWS_AS(smooth_pose(h, 0.0), holo::Error);
    h[1].device_id = "other";
    CHECK_THROWS_AS(smooth_pose(h, 0.5), holo::Error);
}

TEST_CASE("velocity is the least-squares slope over the window") {
    std::vector<Pose> h;
    for (int k = 0; k < 20; ++k) h.push_back(pose("b", Role::ball, k * 10'000, {0.5 * k * 0.01, 2.0, -3.0 * k * 0.01}));
    const auto v = estimate_velocity(h, 100'000);
    CHECK(v.linear.x == doctest::Approx(0.5));
    CHECK(v.linear.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(v.linear.z == doctest::Approx(-3.0));
    CHECK_THROWS_WITH_AS(estimate_velocity(std::vector<Pose>{h[0]}, 100'000), doctest::Contains("InsufficientSamples"),
                         holo::Error);
}

TEST_CASE("two-bone IK: reachable targets keep bone lengths") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 root{d(rng), d(rng), d(rng)};
        Vec3 dir{d(rng), d(rng), d(rng)};
        if (holo::geom::norm(dir) < 1e-3) continue;
        dir = *holo::geom::normalized(dir);
        const double reach = 0.05 + 0.5 * (d(rng) + 1.0);  // within (0.03, 1.07)
        const Vec3 target = root + dir * std::min(reach, 0.56);
        const auto s = solve_two_bone(root, target, 0.30, 0.27, {0, 0, -1});
        CHECK_FALSE(s.clamped);
        CHECK(holo::geom::distance(root, s.middle) == doctest::Approx(0.30).epsilon(1e-9));
        CHECK(holo::geom::distance(s.middle, s.effector) == doctest::Approx(0.27).epsilon(1e-9));
        const double angle = std::acos(holo::geom::dot(*holo::geom::normalized(root - s.middle),
                                                       *holo::geom::normalized(s.effector - s.middle)));
        CHECK(angle == doctest::Approx(oracle::law_of_cosines(0.30, 0.27, holo::geom::distance(root, target)))
                           .epsilon(1e-7));
    }
}

TEST_CASE("two-bone IK: out-of-reach target clamps to full extension") {
    const auto s = solve_two_bone({0, 0, 0}, {2, 0, 0}, 0.3, 0.27, {0, 0, -1});
    CHECK(s.clamped);
    CHECK(s.effector.x == doctest::Approx(0.57));
    CHECK(s.middle.x == doctest::Approx(0.3));
}

TEST_CASE("two-bone IK bends toward the pole") {
    const auto s = solve_two_bone({0, 1, 0}, {0, 0.5, 0}, 0.3, 0.3, {0, 0, 1});
    CHECK(s.middle.z > 0.0);
}

TEST_CASE("skeleton pins end effectors and rejects missing or stale trackers") {
    const SkeletonConfig cfg;
    const AvatarPose a = solve_skeleton(standing(0), cfg, 100'000);
    CHECK(a[Joint::head] == Vec3{0, 1.7, -1});
    CHECK(a[Joint::pelvis] == Vec3{0, 1.0, -1});
    CHECK(holo::geom::distance(a[Joint::left_shoulder], a[Joint::left_elbow]) == doctest::Approx(cfg.upper_arm));
    // Elbows bend backward, knees forward (the presenter faces +z).
    CHECK(a[Joint::left_elbow].z < -1.0);
    CHECK(a[Joint::right_elbow].z < -1.0);
    CHECK(a[Joint::left_knee].z > -1.0);
    CHECK(a[Joint::left_shoulder].x > a[Joint::right_shoulder].x);

    PoseMap m = standing(0);
    m.erase(Role::head);
    CHECK_THROWS_WITH_AS(solve_skeleton(m, cfg, 0), doctest::Contains("MissingDevice"), holo::Error);
    CHECK_THROWS_WITH_AS(solve_skeleton(standing(0), cfg, 200'001), doctest::Contains("StalePose"), holo::Error);
    CHECK_NOTHROW(solve_skeleton(standing(0), cfg, 200'000));
}

TEST_CASE("pose triggers use strict comparisons") {
    AvatarPose a;
    a[Joint::head] = {0, 1.5, 0};
    a[Joint::left_wrist] = {0.2, 1.0, 0};
    a[Joint::right_wrist] = {-0.2, 1.0, 0};
    a[Joint::left_ankle] = {0.1, 0.0, 0};
    a[Joint::right_ankle] = {-0.1, 0.0, 0};
    const std::vector<TriggerRule> rules = {{"up", TriggerKind::both_wrists_above_head, 0.25},
                                            {"left", TriggerKind::left_wrist_above_head, 0.25},
                                            {"apart", TriggerKind::wrists_apart, 0.5},
                                            {"crouch", TriggerKind::crouch, 1.0}};
    CHECK(detect_pose_triggers(a, rules).empty());
    a[Joint::left_wrist].y = 1.75;  // exactly on the margin
    a[Joint::right_wrist].y = 1.75;
    CHECK(detect_pose_triggers(a, rules).empty());
    a[Joint::left_wrist].y = 1.875;
    CHECK(detect_pose_triggers(a, rules) == std::set<std::string>{"left"});
    a[Joint::right_wrist].y = 1.875;
    a[Joint::right_wrist].x = -0.5;
    CHECK(detect_pose_triggers(a, rules) == std::set<std::string>{"up", "left", "apart"});
    a[Joint::head].y = 0.75;
    CHECK(detect_pose_triggers(a, rules).count("crouch") == 1);
}

TEST_CASE("solved skeleton fires a hands-up trigger") {
    PoseMap m = standing(0);
    m[Role::left_hand].position = {0.2, 1.95, -1};
    m[Role::right_hand].position = {-0.2, 1.95, -1};
    const std::vector<TriggerRule> rules = {{"up", TriggerKind::both_wrists_above_head, 0.1}};
    CHECK(detect_pose_triggers(solve_skeleton(m, SkeletonConfig{}, 0), rules) == std::set<std::string>{"up"});
    CHECK(detect_pose_triggers(solve_skeleton(standing(0), SkeletonConfig{}, 0), rules).empty());
}

TEST_CASE("calibration derives limb lengths") {
    PoseMap m = standing(0);
    m[Role::left_hand].position = {0.19 + 0.6, 1.56, -1};
    m[Role::right_hand].position = {-0.19 - 0.6, 1.56, -1};
    const SkeletonConfig c = calibrate_skeleton(m, SkeletonConfig{});
    CHECK(c.upper_arm + c.forearm == doctest::Approx(0.6));
    CHECK(c.upper_arm / c.forearm == doctest::Approx(0.30 / 0.27));
    CHECK(c.thigh + c.shin > 0.5);
    CHECK_NOTHROW(validate(c));
}
