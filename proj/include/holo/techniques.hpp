#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "holo/geometry.hpp"
#include "holo/tracking.hpp"

namespace holo::tech {

using geom::ScreenPoint;
using geom::Side;
using geom::Vec3;
using tracking::Pose;

struct Bounds {
    Vec3 min{-5.0, -2.0, -5.0};
    Vec3 max{5.0, 5.0, 8.0};

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
    }
};

struct PhysicsConfig {
    Vec3 gravity{0.0, -9.81, 0.0};
    double dt = 1.0 / 240.0;
    Bounds play_volume;
    double contact_threshold = 0.05;
    double restitution = 1.0;
    std::int64_t contact_cooldown_us = 500'000;
    std::int64_t velocity_window_us = 100'000;
};

// Throws Error("InvalidPhysics").
void validate(const PhysicsConfig& cfg);

enum class BallState { in_play, out_of_bounds, absorbed };
enum class Owner { front, back, none };

std::string_view to_string(BallState state);
std::string_view to_string(Owner owner);

struct VirtualBall {
    Vec3 position;
    Vec3 velocity;
    BallState state = BallState::in_play;
    Owner owner_side = Owner::none;

    bool operator==(const VirtualBall&) const = default;
};

// One semi-implicit Euler substep: v' = v + g dt, p' = p + v' dt. A ball
// leaving the play volume becomes out_of_bounds; balls not in play are
// returned unchanged.
VirtualBall step_ballistic(const VirtualBall& ball, const PhysicsConfig& cfg);

struct Contact {
    ScreenPoint point;
    Vec3 velocity;
    std::int64_t t_us = 0;
    Side thrower_side = Side::front;
};

// Looks at the newest sample of a tracked ball: a contact is reported when it
// is within contact_threshold of the board, it is moving toward the board
// from the side it was thrown from, and no contact happened within the
// cooldown. Velocity comes from estimate_velocity over the trailing window.
std::optional<Contact> detect_screen_contact(std::span<const Pose> ball_history, const PhysicsConfig& cfg,
                                             std::optional<std::int64_t> last_contact_us);

// Stateful wrapper that remembers the last contact for the cooldown rule.
class ContactDetector {
public:
    std::optional<Contact> update(std::span<const Pose> ball_history, const PhysicsConfig& cfg);
    std::optional<std::int64_t> last_contact_us() const { return last_contact_us_; }

private:
    std::optional<std::int64_t> last_contact_us_;
};

VirtualBall handoff_physical_to_virtual(const Contact& contact, const PhysicsConfig& cfg);

struct Paddle {
    Pose pose;
    double radius = 0.15;
    Vec3 velocity;  // used only for the approach test
};

// Reflects the ball velocity about the paddle-to-ball normal and scales it by
// the restitution when the ball is inside the paddle radius and approaching.
// Returns nullopt when there is no hit.
std::optional<VirtualBall> paddle_hit(const VirtualBall& ball, const Paddle& paddle, const PhysicsConfig& cfg);

struct ExtrusionConfig {
    int cols = 64;
    int rows = 48;
    double width = 4.0;
    double height = 3.0;
    double max_extrusion = 0.5;
    double hysteresis = 0.01;
    Side side = Side::front;

    bool operator==(const ExtrusionConfig&) const = default;
};

// Depth map over the board, in metres pushed into the scene from `side`.
class ExtrusionField {
public:
    using Config = ExtrusionConfig;

    explicit ExtrusionField(Config cfg = Config{});

    const Config& config() const { return cfg_; }
    bool modeling() const { return modeling_; }
    void set_modeling(bool active);
    bool engaged() const { return engaged_; }

    double depth(int col, int row) const;
    std::span<const double> depths() const { return depth_; }
    // Cell under a board position; nullopt off the board.
    std::optional<std::pair<int, int>> cell_at(double x, double y) const;
    Vec3 cell_center(int col, int row) const;
    void reset();

    bool operator==(const ExtrusionField&) const = default;

private:
    friend ExtrusionField extrude(const ExtrusionField&, const Pose&);

    Config cfg_;
    std::vector<double> depth_;
    bool modeling_ = false;
    bool engaged_ = false;
};

// Writes max(existing, penetration) into the cell under the controller,
// clamped to max_extrusion. A push engages the field; it disengages once the
// controller is pulled back out by more than the hysteresis.
// Throws Error("NotInModelingMode").
ExtrusionField extrude(const ExtrusionField& field, const Pose& controller);

} // namespace holo::tech
