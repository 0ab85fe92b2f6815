#include <doctest.h>

#include "holo/session.hpp"

using namespace holo;
using proto::MessageType;

namespace {

struct Client {
    std::int64_t seq = 0;
    proto::Message command(const std::string& name, Json args = Json::object()) {
        return proto::make_message(MessageType::command, ++seq, {{"name", name}, {"args", std::move(args)}});
    }
    proto::Message pose(const std::string& dev, const std::string& role, std::int64_t t, geom::Vec3 p) {
        return proto::make_message(MessageType::pose_update, ++seq,
                                   {{"device_id", dev},
                                    {"role", role},
                                    {"timestamp_us", t},
                                    {"position", {{"x", p.x}, {"y", p.y}, {"z", p.z}}},
                                    {"orientation", {{"w", 1.0}, {"x", 0.0}, {"y", 0.0}, {"z", 0.0}}}});
    }
};

std::vector<Json> kinds(const TickOutput& out, MessageType type) {
    std::vector<Json> k;
    for (const auto& m : out.events) {
        if (m.type == type) k.push_back(m.payload);
    }
    return k;
}

bool has_event(const TickOutput& out, const std::string& kind) {
    for (const auto& p : kinds(out, MessageType::event)) {
        if (p["kind"] == kind) return true;
    }
    return false;
}

std::string first_error(const TickOutput& out) {
    const auto e = kinds(out, MessageType::error);
    return e.empty() ? "" : e.front()["kind"].get<std::string>();
}

EngineConfig three_slide_config() {
    EngineConfig cfg;
    cfg.deck = scene::SlideDeck({scene::Slide{"a", {}}, scene::Slide{"b", {}}, scene::Slide{"c", {}}});
    return cfg;
}

void send_body(Session& s, Client& c, std::int64_t t, double hands_y = 1.1) {
    s.submit("c", c.pose("h", "head", t, {0, 1.7, -1}));
    s.submit("c", c.pose("w", "waist", t, {0, 1.0, -1}));
    s.submit("c", c.pose("lf", "left_foot", t, {0.12, 0.15, -1}));
    s.submit("c", c.pose("rf", "right_foot", t, {-0.12, 0.15, -1}));
    s.submit("c", c.pose("lh", "left_hand", t, {0.3, hands_y, -1}));
    s.submit("c", c.pose("rh", "right_hand", t, {-0.3, hands_y, -1}));
}

} // namespace

TEST_CASE("ticks run on a fixed schedule with full snapshots") {
    Session s(EngineConfig{});
    const TickOutput t0 = s.tick();
    const TickOutput t1 = s.tick();
    CHECK(t0.now_us == 0);
    CHECK(t1.now_us == 16'667);
    CHECK(s.next_tick_us() == 33'334);
    CHECK(t1.snapshot.type == MessageType::state_snapshot);
    CHECK(t1.snapshot.seq > t0.snapshot.seq);
    const Json& p = t1.snapshot.payload;
    for (const char* key : {"frame_id", "t_us", "tool", "slide", "viewers", "layers", "avatar", "afterimages", "tags",
                            "ball", "model", "display", "digests"}) {
        CHECK_MESSAGE(p.contains(key), key);
    }
    CHECK(p["digests"]["front"].get<std::string>().size() == 64);
    CHECK(proto::encode(t1.snapshot).back() == '\n');
}

TEST_CASE("slide commands change the slide on the next tick") {
    Session s(three_slide_config());
    Client c;
    s.submit("c", c.command("next_slide"));
    CHECK(s.board().deck().current_index() == 0);
    const TickOutput out = s.tick();
    CHECK(s.board().deck().current_index() == 1);
    CHECK(has_event(out, "slide_changed"));
    CHECK(out.snapshot.payload["slide"]["index"] == 1);
    s.submit("c", c.command("prev_slide"));
    s.submit("c", c.command("prev_slide"));
    CHECK(has_event(s.tick(), "slide_boundary"));
}

TEST_CASE("sequence numbers: gaps are reported, repeats are rejected") {
    Session s(three_slide_config());
    auto m = [](std::int64_t seq) {
        return proto::make_message(MessageType::command, seq, {{"name", "next_slide"}});
    };
    s.submit("c", m(1));
    s.submit("c", m(5));
    s.submit("c", m(5));
    const TickOutput out = s.tick();
    CHECK(has_event(out, "seq_gap"));
    CHECK(first_error(out) == "SeqNotIncreasing");
    CHECK(kinds(out, MessageType::error).front()["connection"] == "c");
    CHECK(s.board().deck().current_index() == 2);
    // Sequence state is per connection and forgotten on disconnect.
    s.disconnect("c");
    s.submit("c", m(1));
    CHECK(first_error(s.tick()).empty());
}

TEST_CASE("hello: version check and clock offset") {
    Session s(EngineConfig{});
    s.submit("a", proto::make_message(MessageType::hello, 1, {{"version", 99}}));
    CHECK(first_error(s.tick()) == "VersionMismatch");

    std::vector<std::pair<std::int64_t, proto::Message>> recorded;
    s.set_recorder([&](std::int64_t at, const proto::Message& m) { recorded.emplace_back(at, m); });
    s.submit("b", proto::make_message(MessageType::hello, 1, {{"version", 1}, {"clock_us", 1'000'000}}));
    CHECK(has_event(s.tick(), "client_hello"));
    Client c;
    c.seq = 1;
    s.submit("b", c.pose("h", "head", 1'000'010, {0, 1, -1}));
    s.tick();
    REQUIRE(recorded.size() == 1);
    // The hello landed on the second tick, so client 1'000'000 maps to session 16'667.
    CHECK(recorded[0].second.payload["timestamp_us"] == 16'667 + 10);
}

TEST_CASE("server-only message types are refused") {
    Session s(EngineConfig{});
    s.submit("c", proto::make_message(MessageType::event, 1, {{"kind", "x"}}));
    CHECK(first_error(s.tick()) == "UnexpectedMessage");
    s.report_input_error("c", Error("MalformedFrame", "junk"));
    CHECK(first_error(s.tick()) == "MalformedFrame");
}

TEST_CASE("pen strokes need the write tool") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("pen", {{"device_id", "pen"}, {"down", true}}));
    CHECK(first_error(s.tick()) == "ToolInactive");
    s.submit("c", c.command("set_tool", {{"tool", "write"}}));
    s.submit("c", c.command("pen", {{"device_id", "pen"}, {"down", true}, {"side", "back"}}));
    for (int k = 0; k < 5; ++k) s.submit("c", c.pose("pen", "right_hand", 10 + k, {0.1 * k, 0.2, -0.01}));
    s.submit("c", c.command("pen", {{"device_id", "pen"}, {"down", false}}));
    const TickOutput out = s.tick();
    CHECK(first_error(out).empty());
    bool stroke = false;
    for (const auto& l : out.snapshot.payload["layers"]) stroke |= l["kind"] == "stroke";
    CHECK(stroke);
}

TEST_CASE("poses going back in time are rejected") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.pose("h", "head", 100, {0, 1, -1}));
    s.submit("c", c.pose("h", "head", 50, {0, 1, -1}));
    CHECK(first_error(s.tick()) == "OutOfOrderPose");
}

TEST_CASE("role-play: avatar, afterimages and triggers") {
    EngineConfig cfg;
    cfg.triggers.push_back({{"hands_up", tracking::TriggerKind::both_wrists_above_head, 0.1},
                            TriggerAction::freeze_afterimage});
    Session s(cfg);
    Client c;
    s.submit("c", c.command("freeze_afterimage"));
    CHECK(first_error(s.tick()) == "RolePlayInactive");
    s.submit("c", c.command("set_tool", {{"tool", "role_play"}}));
    s.submit("c", c.command("freeze_afterimage"));
    CHECK(first_error(s.tick()) == "NoAvatar");

    send_body(s, c, s.next_tick_us());
    TickOutput out = s.tick();
    CHECK(out.snapshot.payload["avatar"]["present"] == true);
    s.submit("c", c.command("freeze_afterimage"));
    out = s.tick();
    CHECK(has_event(out, "afterimage_frozen"));
    CHECK(s.board().afterimage_opacities().size() == 1);

    // Raising both hands fires the trigger once, which freezes another image.
    send_body(s, c, s.next_tick_us(), 1.95);
    out = s.tick();
    CHECK(has_event(out, "trigger"));
    CHECK(s.board().afterimage_opacities().size() == 2);
    send_body(s, c, s.next_tick_us(), 1.95);
    CHECK_FALSE(has_event(s.tick(), "trigger"));

    // Trackers going quiet makes the avatar stale.
    for (int i = 0; i < 15; ++i) out = s.tick();
    CHECK(out.snapshot.payload["avatar"]["present"] == false);
}

TEST_CASE("dashboard tags and praise") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("set_students", {{"students", {{{"id", "s1"}, {"name", "Ann"}, {"head", {0.0, 1.0, 3.0}}}}}}));
    TickOutput out = s.tick();
    REQUIRE(out.snapshot.payload["tags"].size() == 1);
    const Json center = out.snapshot.payload["tags"][0]["center"];
    s.submit("c", c.command("praise", {{"u", center["u"]}, {"v", center["v"]}}));
    out = s.tick();
    CHECK(has_event(out, "praise"));
    CHECK(out.snapshot.payload["tags"][0]["praise_count"] == 1);
    s.submit("c", c.command("praise", {{"u", -1.9}, {"v", -1.4}, {"radius", 0.01}}));
    CHECK(has_event(s.tick(), "praise_missed"));
}

TEST_CASE("thrown ball flies and leaves the volume") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("throw_ball", {{"origin", {0.0, 0.0, 1.0}}, {"direction", {0.0, 1.0, -1.0}}, {"speed", 3.0}}));
    TickOutput out = s.tick();
    CHECK(has_event(out, "ball_thrown"));
    REQUIRE(s.ball().has_value());
    bool gone = false;
    for (int i = 0; i < 120 && !gone; ++i) gone = has_event(s.tick(), "ball_out");
    CHECK(gone);
    s.submit("c", c.command("throw_ball", {{"origin", {0.0, 0.0, 100.0}}, {"direction", {0.0, 1.0, 0.0}}, {"speed", 1.0}}));
    CHECK(first_error(s.tick()) == "InvalidArgument");
}

TEST_CASE("physical ball crossing the board is handed off") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("set_tool", {{"tool", "ball"}}));
    s.tick();
    bool handoff = false;
    for (int k = 0; k < 60 && !handoff; ++k) {
        const std::int64_t t = s.next_tick_us();
        s.submit("c", c.pose("ball", "ball", t, {0.2, 0.5, 1.0 - 3.0 * t * 1e-6 + 3.0 * 16'667e-6}));
        handoff = has_event(s.tick(), "ball_handoff");
    }
    CHECK(handoff);
    REQUIRE(s.ball().has_value());
    CHECK(s.ball()->velocity.z < 0.0);
}

TEST_CASE("modeling tool extrudes under a hand") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("set_tool", {{"tool", "model"}}));
    s.submit("c", c.pose("hand", "right_hand", 0, {0.0, 0.0, -0.2}));
    TickOutput out = s.tick();
    CHECK(has_event(out, "model_press"));
    CHECK(out.snapshot.payload["model"]["cells_raised"] == 1);
    s.submit("c", c.pose("hand", "right_hand", 10, {0.0, 0.0, 0.3}));
    CHECK(has_event(s.tick(), "model_release"));
    s.submit("c", c.command("reset_model"));
    CHECK(s.tick().snapshot.payload["model"]["cells_raised"] == 0);
}

TEST_CASE("viewers can be moved but not through the board") {
    Session s(EngineConfig{});
    Client c;
    s.submit("c", c.command("move_viewer", {{"side", "front"}, {"eye", {1.0, 1.0, 4.0}}}));
    TickOutput out = s.tick();
    CHECK(out.snapshot.payload["viewers"]["front"] == Json::array({1.0, 1.0, 4.0}));
    s.submit("c", c.command("move_viewer", {{"side", "front"}, {"eye", {1.0, 1.0, -4.0}}}));
    CHECK(first_error(s.tick()) == "InvalidViewer");
}

TEST_CASE("identical inputs give identical outputs") {
    auto run = [] {
        Session s(three_slide_config());
        Client c;
        std::vector<std::string> out;
        s.submit("c", c.command("next_slide"));
        s.submit("c", c.command("set_tool", {{"tool", "role_play"}}));
        for (int i = 0; i < 10; ++i) {
            send_body(s, c, s.next_tick_us(), 1.0 + 0.1 * i);
            const TickOutput t = s.tick();
            out.push_back(proto::encode(t.snapshot));
            for (const auto& e : t.events) out.push_back(proto::encode(e));
        }
        return out;
    };
    CHECK(run() == run());
}
