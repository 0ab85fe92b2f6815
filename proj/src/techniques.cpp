#include "holo/techniques.hpp"

#include <algorithm>
#include <cmath>

namespace holo::tech {

void validate(const PhysicsConfig& cfg) {
    if (!geom::is_finite(cfg.gravity)) throw Error("InvalidPhysics", "gravity must be finite");
    if (!(std::isfinite(cfg.dt) && cfg.dt > 0.0)) throw Error("InvalidPhysics", "dt must be positive");
    if (!(std::isfinite(cfg.contact_threshold) && cfg.contact_threshold > 0.0)) {
        throw Error("InvalidPhysics", "contact threshold must be positive");
    }
    if (!(cfg.restitution >= 0.0 && cfg.restitution <= 1.0)) {
        throw Error("InvalidPhysics", "restitution must be in [0, 1]");
    }
    const Bounds& b = cfg.play_volume;
    if (!(geom::is_finite(b.min) && geom::is_finite(b.max) && b.min.x < b.max.x && b.min.y < b.max.y &&
          b.min.z < b.max.z)) {
        throw Error("InvalidPhysics", "play volume must be a non-empty finite box");
    }
    if (cfg.contact_cooldown_us < 0 || cfg.velocity_window_us <= 0) {
        throw Error("InvalidPhysics", "cooldown must be >= 0 and velocity window > 0");
    }
}

std::string_view to_string(BallState state) {
    switch (state) {
    case BallState::in_play: return "in_play";
    case BallState::out_of_bounds: return "out_of_bounds";
    case BallState::absorbed: return "absorbed";
    }
    return "unknown";
}

std::string_view to_string(Owner owner) {
    switch (owner) {
    case Owner::front: return "front";
    case Owner::back: return "back";
    case Owner::none: return "none";
    }
    return "unknown";
}

VirtualBall step_ballistic(const VirtualBall& ball, const PhysicsConfig& cfg) {
    if (ball.state != BallState::in_play) {
        return ball;
    }
    VirtualBall out = ball;
    out.velocity = ball.velocity + cfg.gravity * cfg.dt;
    out.position = ball.position + out.velocity * cfg.dt;
    if (!cfg.play_volume.contains(out.position)) {
        out.state = BallState::out_of_bounds;
    }
    return out;
}

std::optional<Contact> detect_screen_contact(std::span<const Pose> ball_history, const PhysicsConfig& cfg,
                                             std::optional<std::int64_t> last_contact_us) {
    if (ball_history.empty()) return std::nullopt;
    const Pose& newest = ball_history.back();
    if (std::abs(newest.position.z) > cfg.contact_threshold) return std::nullopt;
    if (last_contact_us && newest.timestamp_us - *last_contact_us < cfg.contact_cooldown_us) {
        return std::nullopt;
    }

    // The throw came from the side of the latest sample still clear of the board.
    std::optional<Side> thrower;
    for (auto it = ball_history.rbegin() + 1; it != ball_history.rend(); ++it) {
        if (std::abs(it->position.z) > cfg.contact_threshold) {
            thrower = geom::side_of(it->position.z);
            break;
        }
    }
    if (!thrower) return std::nullopt;

    tracking::VelocityEstimate v;
    try {
        v = tracking::estimate_velocity(ball_history, cfg.velocity_window_us);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (!(v.linear.z * geom::side_sign(*thrower) < 0.0)) return std::nullopt;

    Contact c;
    c.point = ScreenPoint{newest.position.x, newest.position.y, true};
    c.velocity = v.linear;
    c.t_us = newest.timestamp_us;
    c.thrower_side = *thrower;
    return c;
}

std::optional<Contact> ContactDetector::update(std::span<const Pose> ball_history, const PhysicsConfig& cfg) {
    auto contact = detect_screen_contact(ball_history, cfg, last_contact_us_);
    if (contact) last_contact_us_ = contact->t_us;
    return contact;
}

VirtualBall handoff_physical_to_virtual(const Contact& contact, const PhysicsConfig&) {
    VirtualBall ball;
    ball.position = {contact.point.u, contact.point.v, 0.0};
    ball.velocity = contact.velocity;
    ball.state = BallState::in_play;
    ball.owner_side = Owner::none;
    return ball;
}

std::optional<VirtualBall> paddle_hit(const VirtualBall& ball, const Paddle& paddle, const PhysicsConfig& cfg) {
    if (ball.state != BallState::in_play) return std::nullopt;
    const Vec3 offset = ball.position - paddle.pose.position;
    if (norm(offset) > paddle.radius) return std::nullopt;
    const auto n = geom::normalized(offset);
    if (!n) return std::nullopt;
    if (!(dot(ball.velocity - paddle.velocity, *n) < 0.0)) return std::nullopt;

    VirtualBall out = ball;
    out.velocity = (ball.velocity - 2.0 * dot(ball.velocity, *n) * *n) * cfg.restitution;
    out.owner_side = geom::side_of(paddle.pose.position.z) == Side::front ? Owner::front : Owner::back;
    return out;
}

// ---------------------------------------------------------------------------

ExtrusionField::ExtrusionField(Config cfg) : cfg_(cfg) {
    if (cfg_.cols <= 0 || cfg_.rows <= 0) throw Error("InvalidModeling", "grid must have cells");
    if (!(cfg_.width > 0.0 && cfg_.height > 0.0)) throw Error("InvalidModeling", "board size must be positive");
    if (!(cfg_.max_extrusion > 0.0 && std::isfinite(cfg_.max_extrusion))) {
        throw Error("InvalidModeling", "max extrusion must be positive");
    }
    if (!(cfg_.hysteresis >= 0.0 && std::isfinite(cfg_.hysteresis))) {
        throw Error("InvalidModeling", "hysteresis must be >= 0");
    }
    depth_.assign(static_cast<std::size_t>(cfg_.cols) * static_cast<std::size_t>(cfg_.rows), 0.0);
}

void ExtrusionField::set_modeling(bool active) {
    modeling_ = active;
    if (!active) engaged_ = false;
}

double ExtrusionField::depth(int col, int row) const {
    if (col < 0 || row < 0 || col >= cfg_.cols || row >= cfg_.rows) {
        throw Error("InvalidArgument", "cell out of range");
    }
    return depth_[static_cast<std::size_t>(row) * static_cast<std::size_t>(cfg_.cols) +
                  static_cast<std::size_t>(col)];
}

std::optional<std::pair<int, int>> ExtrusionField::cell_at(double x, double y) const {
    const double fx = (x + cfg_.width / 2.0) / cfg_.width * cfg_.cols;
    const double fy = (y + cfg_.height / 2.0) / cfg_.height * cfg_.rows;
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= cfg_.cols && fy <= cfg_.rows)) return std::nullopt;
    const int col = std::min(static_cast<int>(fx), cfg_.cols - 1);
    const int row = std::min(static_cast<int>(fy), cfg_.rows - 1);
    return std::pair{col, row};
}

Vec3 ExtrusionField::cell_center(int col, int row) const {
    const double cw = cfg_.width / cfg_.cols;
    const double ch = cfg_.height / cfg_.rows;
    return {-cfg_.width / 2.0 + (col + 0.5) * cw, -cfg_.height / 2.0 + (row + 0.5) * ch, 0.0};
}

void ExtrusionField::reset() {
    std::fill(depth_.begin(), depth_.end(), 0.0);
    engaged_ = false;
}

ExtrusionField extrude(const ExtrusionField& field, const Pose& controller) {
    if (!field.modeling_) {
        throw Error("NotInModelingMode", controller.device_id);
    }
    ExtrusionField out = field;
    const auto& cfg = field.cfg_;
    const double z_side = geom::side_sign(cfg.side) * controller.position.z;
    const double penetration = std::max(0.0, -z_side);

    if (penetration > 0.0) {
        out.engaged_ = true;
        if (const auto cell = field.cell_at(controller.position.x, controller.position.y)) {
            const auto idx = static_cast<std::size_t>(cell->second) * static_cast<std::size_t>(cfg.cols) +
                             static_cast<std::size_t>(cell->first);
            out.depth_[idx] = std::clamp(std::max(out.depth_[idx], penetration), 0.0, cfg.max_extrusion);
        }
    } else if (out.engaged_ && z_side > cfg.hysteresis) {
        out.engaged_ = false;
    }
    return out;
}

} // namespace holo::tech
