#include "holo/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace holo::tracking {

double Quat::norm() const {
    return std::sqrt(w * w + x * x + y * y + z * z);
}

Vec3 Quat::rotate(const Vec3& v) const {
    // v' = v + 2w(q x v) + 2 q x (q x v), q = (x, y, z)
    const Vec3 q{x, y, z};
    const Vec3 t = 2.0 * cross(q, v);
    return v + w * t + cross(q, t);
}

namespace {

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::head, "head"},           {Role::waist, "waist"},           {Role::left_foot, "left_foot"},
    {Role::right_foot, "right_foot"}, {Role::left_hand, "left_hand"}, {Role::right_hand, "right_hand"},
    {Role::ball, "ball"},
};

constexpr std::string_view kJointNames[kJointCount] = {
    "pelvis",     "spine",       "head",      "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow", "left_wrist", "right_wrist",  "left_hip",
    "right_hip",  "left_knee",   "right_knee", "left_ankle",   "right_ankle",
};

constexpr std::pair<Joint, Joint> kBones[] = {
    {Joint::pelvis, Joint::spine},
    {Joint::spine, Joint::head},
    {Joint::left_shoulder, Joint::right_shoulder},
    {Joint::left_shoulder, Joint::left_elbow},
    {Joint::left_elbow, Joint::left_wrist},
    {Joint::right_shoulder, Joint::right_elbow},
    {Joint::right_elbow, Joint::right_wrist},
    {Joint::left_hip, Joint::right_hip},
    {Joint::left_hip, Joint::left_knee},
    {Joint::left_knee, Joint::left_ankle},
    {Joint::right_hip, Joint::right_knee},
    {Joint::right_knee, Joint::right_ankle},
};

constexpr std::pair<TriggerKind, std::string_view> kTriggerNames[] = {
    {TriggerKind::both_wrists_above_head, "both_wrists_above_head"},
    {TriggerKind::left_wrist_above_head, "left_wrist_above_head"},
    {TriggerKind::right_wrist_above_head, "right_wrist_above_head"},
    {TriggerKind::wrists_apart, "wrists_apart"},
    {TriggerKind::crouch, "crouch"},
};

void check_history(std::span<const Pose> history) {
    if (history.empty()) {
        throw Error("EmptyHistory", "pose history is empty");
    }
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i].device_id != history[0].device_id) {
            throw Error("InvalidArgument", "pose history mixes devices");
        }
        if (history[i].timestamp_us < history[i - 1].timestamp_us) {
            throw Error("InvalidArgument", "pose history is not time-ordered");
        }
    }
}

// Any unit vector perpendicular to `dir`.
Vec3 any_perpendicular(const Vec3& dir) {
    const Vec3 axis = std::abs(dir.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return *geom::normalized(cross(dir, axis));
}

const Pose& require(const PoseMap& poses, Role role) {
    const auto it = poses.find(role);
    if (it == poses.end()) {
        throw Error("MissingDevice", std::string(to_string(role)));
    }
    return it->second;
}

struct BodyFrame {
    Vec3 up;
    Vec3 right;
    Vec3 forward;
};

// Torso axis from waist to head; facing from the waist tracker's +z axis.
// Identity orientation faces +z, so a presenter behind the board facing the
// audience has right = -x.
BodyFrame body_frame(const Vec3& pelvis, const Vec3& head, const Quat& waist_orientation) {
    BodyFrame frame;
    frame.up = geom::normalized(head - pelvis).value_or(Vec3{0, 1, 0});
    Vec3 facing = waist_orientation.rotate({0, 0, 1});
    facing -= frame.up * dot(facing, frame.up);
    frame.forward = geom::normalized(facing).value_or(any_perpendicular(frame.up));
    frame.right = cross(frame.forward, frame.up);
    return frame;
}

} // namespace

std::string_view to_string(Role role) {
    for (const auto& [r, name] : kRoleNames) {
        if (r == role) return name;
    }
    return "unknown";
}

Role role_from_string(std::string_view name) {
    for (const auto& [r, n] : kRoleNames) {
        if (n == name) return r;
    }
    throw Error("InvalidRole", "unknown tracker role \"" + std::string(name) + "\"");
}

std::string_view to_string(Joint joint) {
    return kJointNames[static_cast<std::size_t>(joint)];
}

std::span<const std::pair<Joint, Joint>> avatar_bones() {
    return kBones;
}

std::string_view to_string(TriggerKind kind) {
    for (const auto& [k, name] : kTriggerNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

TriggerKind trigger_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kTriggerNames) {
        if (n == name) return k;
    }
    throw Error("InvalidTrigger", "unknown trigger kind \"" + std::string(name) + "\"");
}

void validate(const Pose& pose) {
    if (!geom::is_finite(pose.position)) {
        throw Error("InvalidPose", "position is not finite");
    }
    const double n = pose.orientation.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > kQuatNormTolerance) {
        throw Error("InvalidPose", "orientation is not a unit quaternion");
    }
}

Pose smooth_pose(std::span<const Pose> history, double alpha) {
    check_history(history);
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error("InvalidArgument", "alpha must be in (0, 1]");
    }
    Vec3 s = history.front().position;
    for (std::size_t i = 1; i < history.size(); ++i) {
        s = alpha * history[i].position + (1.0 - alpha) * s;
    }
    Pose out = history.back();
    out.position = s;
    return out;
}

VelocityEstimate estimate_velocity(std::span<const Pose> history, std::int64_t window_us) {
    if (window_us <= 0) {
        throw Error("InvalidArgument", "velocity window must be positive");
    }
    if (history.size() < 2) {
        throw Error("InsufficientSamples", "need at least two samples");
    }
    const std::int64_t newest = history.back().timestamp_us;
    std::size_t first = history.size();
    while (first > 0 && newest - history[first - 1].timestamp_us <= window_us) {
        --first;
    }
    const auto window = history.subspan(first);
    if (window.size() < 2) {
        throw Error("InsufficientSamples", "fewer than two samples inside the window");
    }

    // Centre time and position to keep the normal equations well conditioned.
    double t_mean = 0.0;
    Vec3 p_mean;
    for (const Pose& p : window) {
        t_mean += static_cast<double>(p.timestamp_us - newest) * 1e-6;
        p_mean += p.position;
    }
    const double n = static_cast<double>(window.size());
    t_mean /= n;
    p_mean = p_mean / n;

    double stt = 0.0;
    Vec3 stp;
    for (const Pose& p : window) {
        const double dt = static_cast<double>(p.timestamp_us - newest) * 1e-6 - t_mean;
        stt += dt * dt;
        stp += dt * (p.position - p_mean);
    }
    if (!(stt > 0.0)) {
        throw Error("InsufficientSamples", "samples share one timestamp");
    }
    return {stp / stt, window_us};
}

void validate(const SkeletonConfig& s) {
    const double lengths[] = {s.spine_length, s.shoulder_height, s.shoulder_half_width, s.hip_half_width,
                              s.upper_arm,    s.forearm,         s.thigh,               s.shin};
    for (double l : lengths) {
        if (!(std::isfinite(l) && l > 0.0)) {
            throw Error("InvalidSkeleton", "bone lengths must be positive");
        }
    }
    if (s.stale_us <= 0) {
        throw Error("InvalidSkeleton", "staleness threshold must be positive");
    }
}

TwoBoneSolution solve_two_bone(const Vec3& root, const Vec3& target, double upper, double lower,
                               const Vec3& pole) {
    const Vec3 to_target = target - root;
    const double d = norm(to_target);
    auto dir_or = geom::normalized(to_target);
    if (!dir_or) dir_or = geom::normalized(pole);
    const Vec3 dir = dir_or.value_or(Vec3{0, -1, 0});

    const double reach_max = upper + lower;
    const double reach_min = std::abs(upper - lower);
    const double dc = std::clamp(d, reach_min, reach_max);

    Vec3 bend = pole - dir * dot(pole, dir);
    bend = geom::normalized(bend).value_or(any_perpendicular(dir));

    double along = 0.0;
    double off = upper;
    if (dc > 0.0) {
        along = (upper * upper - lower * lower + dc * dc) / (2.0 * dc);
        off = std::sqrt(std::max(0.0, upper * upper - along * along));
    }

    TwoBoneSolution out;
    out.effector = root + dir * dc;
    out.middle = root + dir * along + bend * off;
    out.clamped = dc != d;
    return out;
}

AvatarPose solve_skeleton(const PoseMap& poses, const SkeletonConfig& skeleton, std::int64_t now_us) {
    for (Role role : kBodyRoles) {
        const Pose& p = require(poses, role);
        if (now_us - p.timestamp_us > skeleton.stale_us) {
            throw Error("StalePose", std::string(to_string(role)));
        }
    }
    const Pose& head = poses.at(Role::head);
    const Pose& waist = poses.at(Role::waist);

    AvatarPose avatar;
    avatar[Joint::pelvis] = waist.position;
    avatar[Joint::head] = head.position;

    const BodyFrame f = body_frame(waist.position, head.position, waist.orientation);
    avatar[Joint::spine] = waist.position + f.up * skeleton.spine_length;
    const Vec3 neck = waist.position + f.up * skeleton.shoulder_height;
    avatar[Joint::left_shoulder] = neck - f.right * skeleton.shoulder_half_width;
    avatar[Joint::right_shoulder] = neck + f.right * skeleton.shoulder_half_width;
    avatar[Joint::left_hip] = waist.position - f.right * skeleton.hip_half_width;
    avatar[Joint::right_hip] = waist.position + f.right * skeleton.hip_half_width;

    const Vec3 elbow_pole = -f.forward;
    const Vec3 knee_pole = f.forward;

    const auto arm_l = solve_two_bone(avatar[Joint::left_shoulder], poses.at(Role::left_hand).position,
                                      skeleton.upper_arm, skeleton.forearm, elbow_pole);
    const auto arm_r = solve_two_bone(avatar[Joint::right_shoulder], poses.at(Role::right_hand).position,
                                      skeleton.upper_arm, skeleton.forearm, elbow_pole);
    const auto leg_l = solve_two_bone(avatar[Joint::left_hip], poses.at(Role::left_foot).position,
                                      skeleton.thigh, skeleton.shin, knee_pole);
    const auto leg_r = solve_two_bone(avatar[Joint::right_hip], poses.at(Role::right_foot).position,
                                      skeleton.thigh, skeleton.shin, knee_pole);

    avatar[Joint::left_elbow] = arm_l.middle;
    avatar[Joint::left_wrist] = arm_l.effector;
    avatar[Joint::right_elbow] = arm_r.middle;
    avatar[Joint::right_wrist] = arm_r.effector;
    avatar[Joint::left_knee] = leg_l.middle;
    avatar[Joint::left_ankle] = leg_l.effector;
    avatar[Joint::right_knee] = leg_r.middle;
    avatar[Joint::right_ankle] = leg_r.effector;
    return avatar;
}

SkeletonConfig calibrate_skeleton(const PoseMap& poses, const SkeletonConfig& base) {
    for (Role role : kBodyRoles) {
        require(poses, role);
    }
    const Vec3 pelvis = poses.at(Role::waist).position;
    const Vec3 head = poses.at(Role::head).position;
    const double torso = distance(head, pelvis);
    if (!(torso > 0.0)) {
        throw Error("InvalidSkeleton", "calibration frame has head at waist");
    }

    SkeletonConfig out = base;
    out.spine_length = 0.4 * torso;
    out.shoulder_height = 0.8 * torso;

    const BodyFrame f = body_frame(pelvis, head, poses.at(Role::waist).orientation);
    const Vec3 neck = pelvis + f.up * out.shoulder_height;
    const double arm_l = distance(neck - f.right * out.shoulder_half_width, poses.at(Role::left_hand).position);
    const double arm_r = distance(neck + f.right * out.shoulder_half_width, poses.at(Role::right_hand).position);
    const double leg_l = distance(pelvis - f.right * out.hip_half_width, poses.at(Role::left_foot).position);
    const double leg_r = distance(pelvis + f.right * out.hip_half_width, poses.at(Role::right_foot).position);

    const double arm = 0.5 * (arm_l + arm_r);
    const double leg = 0.5 * (leg_l + leg_r);
    const double arm_split = base.upper_arm / (base.upper_arm + base.forearm);
    const double leg_split = base.thigh / (base.thigh + base.shin);
    out.upper_arm = arm * arm_split;
    out.forearm = arm - out.upper_arm;
    out.thigh = leg * leg_split;
    out.shin = leg - out.thigh;
    validate(out);
    return out;
}

std::set<std::string> detect_pose_triggers(const AvatarPose& avatar, std::span<const TriggerRule> rules) {
    const double head_y = avatar[Joint::head].y;
    const double lw = avatar[Joint::left_wrist].y - head_y;
    const double rw = avatar[Joint::right_wrist].y - head_y;
    const double lowest_ankle = std::min(avatar[Joint::left_ankle].y, avatar[Joint::right_ankle].y);

    std::set<std::string> fired;
    for (const TriggerRule& rule : rules) {
        bool hit = false;
        switch (rule.kind) {
        case TriggerKind::both_wrists_above_head:
            hit = lw > rule.margin && rw > rule.margin;
            break;
        case TriggerKind::left_wrist_above_head:
            hit = lw > rule.margin;
            break;
        case TriggerKind::right_wrist_above_head:
            hit = rw > rule.margin;
            break;
        case TriggerKind::wrists_apart:
            hit = distance(avatar[Joint::left_wrist], avatar[Joint::right_wrist]) > rule.margin;
            break;
        case TriggerKind::crouch:
            hit = head_y - lowest_ankle < rule.margin;
            break;
        }
        if (hit) {
            fired.insert(rule.name);
        }
    }
    return fired;
}

} // namespace holo::tracking
