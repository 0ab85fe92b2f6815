#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "holo/geometry.hpp"
#include "holo/json_fields.hpp"
#include "holo/scene.hpp"
#include "holo/techniques.hpp"
#include "holo/tracking.hpp"

namespace holo {

// What a pose trigger does when it starts firing, besides being reported.
enum class TriggerAction { none, freeze_afterimage, next_slide, prev_slide };

struct TriggerSpec {
    tracking::TriggerRule rule;
    TriggerAction action = TriggerAction::none;
};

struct EngineConfig {
    geom::ScreenGeometry screen;
    geom::ViewerSpots viewers;
    tech::PhysicsConfig physics;
    double paddle_radius = 0.15;
    tracking::SkeletonConfig skeleton;
    std::vector<TriggerSpec> triggers;
    scene::BoardStyle board;
    tech::ExtrusionConfig modeling;
    scene::SlideDeck deck;
    int tick_rate_hz = 60;
    int port = 7340;
    std::uint64_t seed = 0;
    std::size_t outbox_capacity = 64;

    std::int64_t tick_period_us() const { return (1'000'000 + tick_rate_hz / 2) / tick_rate_hz; }
};

// Every section and field is optional; missing values take the defaults
// above. Relative deck paths resolve against `base_dir`.
// Throws LocatedError("ConfigInvalid") whose where() is the field path, e.g.
// "screen.width".
EngineConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
EngineConfig load_config(const std::filesystem::path& path);

} // namespace holo
