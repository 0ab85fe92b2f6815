#include "holo/config.hpp"

#include <cmath>
#include <fstream>

namespace holo {

namespace {

constexpr const char* kKind = "ConfigInvalid";

double positive(const FieldReader& r, std::string_view key, double fallback) {
    const double v = r.number_or(key, fallback);
    if (!(v > 0.0)) r.fail_at(key, "must be positive");
    return v;
}

double non_negative(const FieldReader& r, std::string_view key, double fallback) {
    const double v = r.number_or(key, fallback);
    if (v < 0.0) r.fail_at(key, "must be non-negative");
    return v;
}

std::int64_t positive_int(const FieldReader& r, std::string_view key, std::int64_t fallback) {
    const std::int64_t v = r.integer_or(key, fallback);
    if (v <= 0) r.fail_at(key, "must be positive");
    return v;
}

geom::Side side_or(const FieldReader& r, std::string_view key, geom::Side fallback) {
    if (!r.has(key)) return fallback;
    const std::string s = r.string(key);
    if (s == "front") return geom::Side::front;
    if (s == "back") return geom::Side::back;
    r.fail_at(key, "expected \"front\" or \"back\"");
}

scene::Rgba color_or(const FieldReader& r, std::string_view key, scene::Rgba fallback) {
    if (!r.has(key)) return fallback;
    const FieldReader c = r.child(key);
    const std::size_t n = c.array_size();
    if (n != 3 && n != 4) c.fail("expected [r, g, b] or [r, g, b, a]");
    std::uint8_t out[4] = {0, 0, 0, 255};
    for (std::size_t i = 0; i < n; ++i) {
        const FieldReader e = c.element(i);
        if (!e.node().is_number_integer() || e.node().get<std::int64_t>() < 0 || e.node().get<std::int64_t>() > 255) {
            e.fail("expected an integer in [0, 255]");
        }
        out[i] = static_cast<std::uint8_t>(e.node().get<std::int64_t>());
    }
    return {out[0], out[1], out[2], out[3]};
}

void parse_screen(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    cfg.screen.width = positive(r, "width", cfg.screen.width);
    cfg.screen.height = positive(r, "height", cfg.screen.height);
}

void parse_viewers(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    cfg.viewers.front_eye = r.vec3_or("front", cfg.viewers.front_eye);
    cfg.viewers.back_eye = r.vec3_or("back", cfg.viewers.back_eye);
    if (!(cfg.viewers.front_eye.z > 0.0)) r.fail_at("front", "front eye needs z > 0");
    if (!(cfg.viewers.back_eye.z < 0.0)) r.fail_at("back", "back eye needs z < 0");
}

void parse_physics(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    auto& p = cfg.physics;
    p.gravity = r.vec3_or("gravity", p.gravity);
    p.dt = positive(r, "dt", p.dt);
    p.contact_threshold = positive(r, "contact_threshold", p.contact_threshold);
    p.restitution = non_negative(r, "restitution", p.restitution);
    if (p.restitution > 1.0) r.fail_at("restitution", "must be at most 1");
    p.contact_cooldown_us = r.integer_or("contact_cooldown_us", p.contact_cooldown_us);
    if (p.contact_cooldown_us < 0) r.fail_at("contact_cooldown_us", "must be non-negative");
    p.velocity_window_us = positive_int(r, "velocity_window_us", p.velocity_window_us);
    cfg.paddle_radius = positive(r, "paddle_radius", cfg.paddle_radius);
    if (r.has("play_volume")) {
        const FieldReader v = r.child("play_volume");
        v.expect_object();
        p.play_volume.min = v.vec3_or("min", p.play_volume.min);
        p.play_volume.max = v.vec3_or("max", p.play_volume.max);
        const auto& lo = p.play_volume.min;
        const auto& hi = p.play_volume.max;
        if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z)) v.fail("min must be below max on every axis");
    }
}

void parse_skeleton(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    auto& s = cfg.skeleton;
    s.spine_length = positive(r, "spine_length", s.spine_length);
    s.shoulder_height = positive(r, "shoulder_height", s.shoulder_height);
    s.shoulder_half_width = positive(r, "shoulder_half_width", s.shoulder_half_width);
    s.hip_half_width = positive(r, "hip_half_width", s.hip_half_width);
    s.upper_arm = positive(r, "upper_arm", s.upper_arm);
    s.forearm = positive(r, "forearm", s.forearm);
    s.thigh = positive(r, "thigh", s.thigh);
    s.shin = positive(r, "shin", s.shin);
    s.stale_us = positive_int(r, "stale_us", s.stale_us);
}

void parse_triggers(const FieldReader& r, EngineConfig& cfg) {
    cfg.triggers.clear();
    for (std::size_t i = 0; i < r.array_size(); ++i) {
        const FieldReader t = r.element(i);
        t.expect_object();
        TriggerSpec spec;
        spec.rule.name = t.string("name");
        if (spec.rule.name.empty()) t.fail_at("name", "must not be empty");
        const std::string kind = t.string("kind");
        try {
            spec.rule.kind = tracking::trigger_kind_from_string(kind);
        } catch (const Error&) {
            t.fail_at("kind", "unknown trigger kind \"" + kind + "\"");
        }
        spec.rule.margin = t.number_or("margin", spec.rule.margin);
        const std::string action = t.string_or("action", "none");
        if (action == "none") {
            spec.action = TriggerAction::none;
        } else if (action == "freeze_afterimage") {
            spec.action = TriggerAction::freeze_afterimage;
        } else if (action == "next_slide") {
            spec.action = TriggerAction::next_slide;
        } else if (action == "prev_slide") {
            spec.action = TriggerAction::prev_slide;
        } else {
            t.fail_at("action", "unknown action \"" + action + "\"");
        }
        cfg.triggers.push_back(std::move(spec));
    }
}

void parse_board(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    auto& b = cfg.board;
    b.ink_faint = color_or(r, "ink_faint", b.ink_faint);
    b.ink_bright = color_or(r, "ink_bright", b.ink_bright);
    b.slide_text = color_or(r, "slide_text", b.slide_text);
    b.avatar = color_or(r, "avatar", b.avatar);
    b.stroke_width = positive(r, "stroke_width", b.stroke_width);
    b.avatar_line_width = positive(r, "avatar_line_width", b.avatar_line_width);
    b.afterimage_decay = positive(r, "afterimage_decay", b.afterimage_decay);
    if (b.afterimage_decay >= 1.0) r.fail_at("afterimage_decay", "must be below 1");
    b.afterimage_floor = positive(r, "afterimage_floor", b.afterimage_floor);
    if (b.afterimage_floor > 1.0) r.fail_at("afterimage_floor", "must be at most 1");
    b.tag_offset = r.number_or("tag_offset", b.tag_offset);
    b.tag_width = positive(r, "tag_width", b.tag_width);
    b.tag_height = positive(r, "tag_height", b.tag_height);
    b.clip_margin = non_negative(r, "clip_margin", b.clip_margin);
}

void parse_modeling(const FieldReader& r, EngineConfig& cfg) {
    r.expect_object();
    auto& m = cfg.modeling;
    m.cols = static_cast<int>(positive_int(r, "cols", m.cols));
    m.rows = static_cast<int>(positive_int(r, "rows", m.rows));
    if (m.cols > 4096 || m.rows > 4096) r.fail("grid is limited to 4096 cells per axis");
    m.max_extrusion = positive(r, "max_extrusion", m.max_extrusion);
    m.hysteresis = non_negative(r, "hysteresis", m.hysteresis);
    m.side = side_or(r, "side", m.side);
}

void parse_deck_field(const FieldReader& r, EngineConfig& cfg, const std::filesystem::path& base_dir) {
    try {
        if (r.node().is_string()) {
            std::filesystem::path p = r.node().get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            cfg.deck = scene::load_deck(p);
        } else {
            cfg.deck = scene::parse_deck(r.node());
        }
    } catch (const LocatedError& e) {
        const std::string where = e.where() == "<root>" ? "" : "." + e.where();
        throw LocatedError(kKind, r.path() + where, nested_detail(e, kKind, false));
    }
}

} // namespace

EngineConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
    const FieldReader root(doc, "", kKind);
    root.expect_object();
    EngineConfig cfg;
    if (root.has("screen")) parse_screen(root.child("screen"), cfg);
    if (root.has("viewers")) parse_viewers(root.child("viewers"), cfg);
    if (root.has("physics")) parse_physics(root.child("physics"), cfg);
    if (root.has("skeleton")) parse_skeleton(root.child("skeleton"), cfg);
    if (root.has("triggers")) parse_triggers(root.child("triggers"), cfg);
    if (root.has("board")) parse_board(root.child("board"), cfg);
    if (root.has("modeling")) parse_modeling(root.child("modeling"), cfg);
    if (root.has("deck")) parse_deck_field(root.child("deck"), cfg, base_dir);
    cfg.modeling.width = cfg.screen.width;
    cfg.modeling.height = cfg.screen.height;

    const std::int64_t rate = positive_int(root, "tick_rate_hz", cfg.tick_rate_hz);
    if (rate > 1000) root.fail_at("tick_rate_hz", "must be at most 1000");
    cfg.tick_rate_hz = static_cast<int>(rate);
    const std::int64_t port = root.integer_or("port", cfg.port);
    if (port < 0 || port > 65535) root.fail_at("port", "must be in [0, 65535]");
    cfg.port = static_cast<int>(port);
    const std::int64_t seed = root.integer_or("seed", 0);
    if (seed < 0) root.fail_at("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.outbox_capacity = static_cast<std::size_t>(positive_int(root, "outbox_capacity", 64));
    return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LocatedError(kKind, path.string(), "cannot open config file");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::exception& e) {
        throw LocatedError(kKind, path.string(), e.what());
    }
    return parse_config(doc, path.parent_path());
}

} // namespace holo
