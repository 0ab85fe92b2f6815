#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "holo/geometry.hpp"

namespace holo::tracking {

using geom::Vec3;

struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    Vec3 rotate(const Vec3& v) const;
    bool operator==(const Quat&) const = default;
};

inline constexpr double kQuatNormTolerance = 1e-6;

enum class Role { head, waist, left_foot, right_foot, left_hand, right_hand, ball };

std::string_view to_string(Role role);
// Throws Error("InvalidRole").
Role role_from_string(std::string_view name);

// The six body-worn or handheld roles that drive the avatar.
inline constexpr Role kBodyRoles[] = {Role::head,      Role::waist,     Role::left_foot,
                                      Role::right_foot, Role::left_hand, Role::right_hand};

struct Pose {
    std::string device_id;
    Role role = Role::head;
    std::int64_t timestamp_us = 0;
    Vec3 position;
    Quat orientation;

    bool operator==(const Pose&) const = default;
};

// Throws Error("InvalidPose") for non-finite values or a non-unit quaternion.
void validate(const Pose& pose);

// Exponential moving average of positions seeded with the oldest sample;
// orientation and metadata come from the newest sample.
// Throws Error("EmptyHistory"), Error("InvalidArgument") for alpha outside
// (0, 1] or a history mixing devices or going back in time.
Pose smooth_pose(std::span<const Pose> history, double alpha);

struct VelocityEstimate {
    Vec3 linear;
    std::int64_t window_us = 0;
};

// Least-squares slope of position against time over the samples whose
// timestamp is within `window_us` of the newest one.
// Throws Error("InsufficientSamples") when fewer than two samples (or two
// distinct timestamps) fall inside the window.
VelocityEstimate estimate_velocity(std::span<const Pose> history, std::int64_t window_us);

// ---------------------------------------------------------------------------
// Avatar skeleton

enum class Joint {
    pelvis,
    spine,
    head,
    left_shoulder,
    right_shoulder,
    left_elbow,
    right_elbow,
    left_wrist,
    right_wrist,
    left_hip,
    right_hip,
    left_knee,
    right_knee,
    left_ankle,
    right_ankle,
};
inline constexpr std::size_t kJointCount = 15;

std::string_view to_string(Joint joint);

struct SkeletonConfig {
    double spine_length = 0.25;        // pelvis -> spine joint along the torso axis
    double shoulder_height = 0.50;     // pelvis -> shoulder line along the torso axis
    double shoulder_half_width = 0.19;
    double hip_half_width = 0.10;
    double upper_arm = 0.30;
    double forearm = 0.27;
    double thigh = 0.45;
    double shin = 0.43;
    std::int64_t stale_us = 200'000;
};

// Throws Error("InvalidSkeleton") for non-positive lengths.
void validate(const SkeletonConfig& skeleton);

struct AvatarPose {
    std::array<Vec3, kJointCount> joints{};
    std::set<std::string> trigger_state;

    const Vec3& operator[](Joint j) const { return joints[static_cast<std::size_t>(j)]; }
    Vec3& operator[](Joint j) { return joints[static_cast<std::size_t>(j)]; }
    bool operator==(const AvatarPose&) const = default;
};

// Bones drawn for the avatar, as (parent, child) joint pairs.
std::span<const std::pair<Joint, Joint>> avatar_bones();

struct TwoBoneSolution {
    Vec3 middle;    // elbow or knee
    Vec3 effector;  // wrist or ankle, clamped into the reachable shell
    bool clamped = false;
};

// Analytic two-bone IK. The middle joint bends toward `pole`. Targets beyond
// full extension (or inside the minimum reach |upper - lower|) are clamped
// along root -> target.
TwoBoneSolution solve_two_bone(const Vec3& root, const Vec3& target, double upper, double lower,
                               const Vec3& pole);

using PoseMap = std::map<Role, Pose>;

// Pins pelvis, head, wrists and ankles to the trackers and places elbows and
// knees with two-bone IK (elbows bend backward, knees forward).
// Throws Error("MissingDevice") / Error("StalePose") naming the role.
AvatarPose solve_skeleton(const PoseMap& poses, const SkeletonConfig& skeleton, std::int64_t now_us);

// Derives limb and torso lengths from a calibration frame in which the
// presenter stands upright in a T-pose. Widths are kept from `base`.
SkeletonConfig calibrate_skeleton(const PoseMap& poses, const SkeletonConfig& base);

enum class TriggerKind {
    both_wrists_above_head,
    left_wrist_above_head,
    right_wrist_above_head,
    wrists_apart,
    crouch,
};

std::string_view to_string(TriggerKind kind);
TriggerKind trigger_kind_from_string(std::string_view name);

struct TriggerRule {
    std::string name;
    TriggerKind kind = TriggerKind::both_wrists_above_head;
    double margin = 0.1;
};

// Names of every rule whose predicate holds. All comparisons are strict, so
// a pose sitting exactly on the margin does not fire.
std::set<std::string> detect_pose_triggers(const AvatarPose& avatar, std::span<const TriggerRule> rules);

} // namespace holo::tracking
