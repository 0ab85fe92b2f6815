#include "holo/protocol.hpp"

#include <cmath>

namespace holo::proto {

namespace {

constexpr const char* kSchema = "SchemaViolation";

struct TypeName {
    MessageType type;
    std::string_view name;
};

constexpr TypeName kTypeNames[] = {
    {MessageType::pose_update, "pose_update"},       {MessageType::command, "command"},
    {MessageType::state_snapshot, "state_snapshot"}, {MessageType::event, "event"},
    {MessageType::hello, "hello"},                   {MessageType::error, "error"},
};

constexpr std::pair<Tool, std::string_view> kToolNames[] = {
    {Tool::present, "present"},     {Tool::write, "write"}, {Tool::role_play, "role_play"},
    {Tool::dashboard, "dashboard"}, {Tool::ball, "ball"},   {Tool::model, "model"},
};

void check_encodable(const Json& node, std::string& path) {
    if (node.is_number_float()) {
        if (!std::isfinite(node.get<double>())) {
            throw Error("UnencodableValue", "non-finite number at " + (path.empty() ? "<root>" : path));
        }
    } else if (node.is_object()) {
        for (const auto& [key, value] : node.items()) {
            const auto len = path.size();
            path += path.empty() ? key : "." + key;
            check_encodable(value, path);
            path.resize(len);
        }
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) {
            const auto len = path.size();
            path += "[" + std::to_string(i) + "]";
            check_encodable(node[i], path);
            path.resize(len);
        }
    }
}

// Rejects documents nested deeper than kMaxNesting before handing them to the
// recursive parser.
bool nesting_ok(std::string_view text) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (char c : text) {
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            if (++depth > kMaxNesting) return false;
        } else if (c == '}' || c == ']') {
            --depth;
        }
    }
    return true;
}

geom::Side side_field(const FieldReader& r, std::string_view key, geom::Side fallback) {
    if (!r.has(key)) return fallback;
    const std::string s = r.string(key);
    if (s == "front") return geom::Side::front;
    if (s == "back") return geom::Side::back;
    r.fail_at(key, "expected \"front\" or \"back\"");
}

geom::Side required_side(const FieldReader& r, std::string_view key) {
    r.child(key);  // reports a missing field
    return side_field(r, key, geom::Side::front);
}

void validate_payload(MessageType type, const Json& payload) {
    const FieldReader r(payload, "payload", kSchema);
    r.expect_object();
    switch (type) {
    case MessageType::pose_update: parse_pose(payload); break;
    case MessageType::command: parse_command(payload); break;
    case MessageType::hello: parse_hello(payload); break;
    case MessageType::state_snapshot: r.integer("frame_id"); break;
    case MessageType::event:
    case MessageType::error: r.string("kind"); break;
    }
}

} // namespace

std::string_view to_string(MessageType type) {
    for (const auto& t : kTypeNames) {
        if (t.type == type) return t.name;
    }
    return "unknown";
}

std::optional<MessageType> message_type_from_string(std::string_view name) {
    for (const auto& t : kTypeNames) {
        if (t.name == name) return t.type;
    }
    return std::nullopt;
}

std::string_view to_string(Tool tool) {
    for (const auto& [t, name] : kToolNames) {
        if (t == tool) return name;
    }
    return "unknown";
}

std::optional<Tool> tool_from_string(std::string_view name) {
    for (const auto& [t, n] : kToolNames) {
        if (n == name) return t;
    }
    return std::nullopt;
}

std::string canonical_dump(const Json& doc) {
    std::string path;
    check_encodable(doc, path);
    try {
        return doc.dump(-1, ' ', false, Json::error_handler_t::strict);
    } catch (const Json::exception& e) {
        throw Error("UnencodableValue", e.what());
    }
}

std::string encode(const Message& msg) {
    Json doc = msg.extensions.is_object() ? msg.extensions : Json::object();
    doc["type"] = std::string(to_string(msg.type));
    doc["seq"] = msg.seq;
    doc["payload"] = msg.payload;
    std::string out = canonical_dump(doc);
    out.push_back('\n');
    return out;
}

Message decode(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw Error("MalformedFrame", "empty line");
    if (line.size() > kMaxLineBytes) throw Error("MalformedFrame", "line exceeds size limit");
    if (line.find('\n') != std::string_view::npos) throw Error("MalformedFrame", "interior newline");
    if (!nesting_ok(line)) throw Error("MalformedFrame", "nesting too deep");

    Json doc;
    try {
        doc = Json::parse(line.begin(), line.end());
    } catch (const Json::exception& e) {
        throw Error("MalformedFrame", e.what());
    }
    if (!doc.is_object()) throw Error("MalformedFrame", "frame is not a JSON object");

    const FieldReader r(doc, "", kSchema);
    const std::string type_name = r.string("type");
    const auto type = message_type_from_string(type_name);
    if (!type) throw Error("UnknownType", type_name);

    Message msg;
    msg.type = *type;
    msg.seq = r.integer("seq");
    if (msg.seq < 0) r.fail_at("seq", "must be non-negative");
    msg.payload = r.child("payload").node();
    validate_payload(msg.type, msg.payload);

    for (auto& [key, value] : doc.items()) {
        if (key != "type" && key != "seq" && key != "payload") msg.extensions[key] = value;
    }
    return msg;
}

// ---------------------------------------------------------------------------

Hello parse_hello(const Json& payload) {
    const FieldReader r(payload, "payload", kSchema);
    r.expect_object();
    Hello h;
    const auto version = r.integer("version");
    if (version < 0 || version > 1'000'000) r.fail_at("version", "out of range");
    h.version = static_cast<int>(version);
    h.client = r.string_or("client", "");
    if (r.has("clock_us")) h.clock_us = r.integer("clock_us");
    return h;
}

Json to_payload(const Hello& hello) {
    Json j{{"version", hello.version}, {"client", hello.client}};
    if (hello.clock_us) j["clock_us"] = *hello.clock_us;
    return j;
}

tracking::Pose parse_pose(const Json& payload) {
    const FieldReader r(payload, "payload", kSchema);
    r.expect_object();
    tracking::Pose p;
    p.device_id = r.string("device_id");
    if (p.device_id.empty()) r.fail_at("device_id", "must not be empty");
    const std::string role = r.string("role");
    try {
        p.role = tracking::role_from_string(role);
    } catch (const Error&) {
        r.fail_at("role", "unknown role \"" + role + "\"");
    }
    p.timestamp_us = r.integer("timestamp_us");
    p.position = r.xyz("position");
    const FieldReader o = r.child("orientation");
    o.expect_object();
    p.orientation = {o.number("w"), o.number("x"), o.number("y"), o.number("z")};
    if (std::abs(p.orientation.norm() - 1.0) > tracking::kQuatNormTolerance) {
        o.fail("quaternion must have unit norm");
    }
    return p;
}

Json to_payload(const tracking::Pose& pose) {
    return Json{{"device_id", pose.device_id},
                {"role", std::string(tracking::to_string(pose.role))},
                {"timestamp_us", pose.timestamp_us},
                {"position", vec3_object(pose.position)},
                {"orientation",
                 {{"w", pose.orientation.w}, {"x", pose.orientation.x}, {"y", pose.orientation.y},
                  {"z", pose.orientation.z}}}};
}

// ---------------------------------------------------------------------------

namespace {

Json empty_args() { return Json::object(); }

struct ArgsEncoder {
    Json operator()(const cmd::NextSlide&) const { return empty_args(); }
    Json operator()(const cmd::PrevSlide&) const { return empty_args(); }
    Json operator()(const cmd::SetTool& c) const { return {{"tool", std::string(to_string(c.tool))}}; }
    Json operator()(const cmd::Pen& c) const {
        return {{"device_id", c.device_id}, {"down", c.down}, {"side", std::string(geom::to_string(c.side))}};
    }
    Json operator()(const cmd::Annotate& c) const {
        return {{"side", std::string(geom::to_string(c.side))},
                {"text", c.text},
                {"u", c.u},
                {"v", c.v},
                {"height", c.height}};
    }
    Json operator()(const cmd::ClearInk&) const { return empty_args(); }
    Json operator()(const cmd::FreezeAfterimage&) const { return empty_args(); }
    Json operator()(const cmd::ClearAfterimages&) const { return empty_args(); }
    Json operator()(const cmd::Praise& c) const { return {{"u", c.u}, {"v", c.v}, {"radius", c.radius}}; }
    Json operator()(const cmd::ThrowBall& c) const {
        Json j{{"direction", vec3_array(c.direction)}, {"speed", c.speed}};
        if (c.origin) j["origin"] = vec3_array(*c.origin);
        return j;
    }
    Json operator()(const cmd::MoveViewer& c) const {
        return {{"side", std::string(geom::to_string(c.side))}, {"eye", vec3_array(c.eye)}};
    }
    Json operator()(const cmd::SetStudents& c) const {
        Json list = Json::array();
        for (const auto& s : c.students) {
            list.push_back({{"id", s.id}, {"name", s.name}, {"head", vec3_array(s.head)}, {"metrics", s.metrics}});
        }
        return {{"students", list}};
    }
    Json operator()(const cmd::ResetModel&) const { return empty_args(); }
    Json operator()(const cmd::Calibrate&) const { return empty_args(); }
};

struct NameOf {
    std::string_view operator()(const cmd::NextSlide&) const { return "next_slide"; }
    std::string_view operator()(const cmd::PrevSlide&) const { return "prev_slide"; }
    std::string_view operator()(const cmd::SetTool&) const { return "set_tool"; }
    std::string_view operator()(const cmd::Pen&) const { return "pen"; }
    std::string_view operator()(const cmd::Annotate&) const { return "annotate"; }
    std::string_view operator()(const cmd::ClearInk&) const { return "clear_ink"; }
    std::string_view operator()(const cmd::FreezeAfterimage&) const { return "freeze_afterimage"; }
    std::string_view operator()(const cmd::ClearAfterimages&) const { return "clear_afterimages"; }
    std::string_view operator()(const cmd::Praise&) const { return "praise"; }
    std::string_view operator()(const cmd::ThrowBall&) const { return "throw_ball"; }
    std::string_view operator()(const cmd::MoveViewer&) const { return "move_viewer"; }
    std::string_view operator()(const cmd::SetStudents&) const { return "set_students"; }
    std::string_view operator()(const cmd::ResetModel&) const { return "reset_model"; }
    std::string_view operator()(const cmd::Calibrate&) const { return "calibrate"; }
};

double positive(const FieldReader& r, std::string_view key, double fallback) {
    const double v = r.number_or(key, fallback);
    if (!(v > 0.0)) r.fail_at(key, "must be positive");
    return v;
}

} // namespace

std::string_view command_name(const Command& command) { return std::visit(NameOf{}, command); }

Json to_payload(const Command& command) {
    return Json{{"name", std::string(command_name(command))}, {"args", std::visit(ArgsEncoder{}, command)}};
}

Command parse_command(const Json& payload) {
    const FieldReader r(payload, "payload", kSchema);
    r.expect_object();
    const std::string name = r.string("name");
    const Json empty = Json::object();
    const FieldReader a = r.has("args") ? r.child("args") : FieldReader(empty, "payload.args", kSchema);
    a.expect_object();

    if (name == "next_slide") return cmd::NextSlide{};
    if (name == "prev_slide") return cmd::PrevSlide{};
    if (name == "clear_ink") return cmd::ClearInk{};
    if (name == "freeze_afterimage") return cmd::FreezeAfterimage{};
    if (name == "clear_afterimages") return cmd::ClearAfterimages{};
    if (name == "reset_model") return cmd::ResetModel{};
    if (name == "calibrate") return cmd::Calibrate{};
    if (name == "set_tool") {
        const std::string tool = a.string("tool");
        const auto t = tool_from_string(tool);
        if (!t) a.fail_at("tool", "unknown tool \"" + tool + "\"");
        return cmd::SetTool{*t};
    }
    if (name == "pen") {
        cmd::Pen c;
        c.device_id = a.string("device_id");
        if (c.device_id.empty()) a.fail_at("device_id", "must not be empty");
        a.child("down");
        if (!a.child("down").node().is_boolean()) a.fail_at("down", "expected a boolean");
        c.down = a.boolean_or("down", false);
        c.side = side_field(a, "side", geom::Side::back);
        return c;
    }
    if (name == "annotate") {
        cmd::Annotate c;
        c.side = side_field(a, "side", geom::Side::back);
        c.text = a.string("text");
        c.u = a.number("u");
        c.v = a.number("v");
        c.height = positive(a, "height", 0.15);
        return c;
    }
    if (name == "praise") {
        cmd::Praise c;
        c.u = a.number("u");
        c.v = a.number("v");
        c.radius = positive(a, "radius", 0.3);
        return c;
    }
    if (name == "throw_ball") {
        cmd::ThrowBall c;
        if (a.has("origin")) c.origin = a.vec3("origin");
        c.direction = a.vec3("direction");
        if (!geom::normalized(c.direction)) a.fail_at("direction", "must be non-zero");
        c.speed = a.number("speed");
        if (c.speed < 0.0) a.fail_at("speed", "must be non-negative");
        return c;
    }
    if (name == "move_viewer") {
        cmd::MoveViewer c;
        c.side = required_side(a, "side");
        c.eye = a.vec3("eye");
        return c;
    }
    if (name == "set_students") {
        cmd::SetStudents c;
        const FieldReader list = a.child("students");
        const std::size_t n = list.array_size();
        for (std::size_t i = 0; i < n; ++i) {
            const FieldReader s = list.element(i);
            s.expect_object();
            cmd::Student st;
            st.id = s.string("id");
            if (st.id.empty()) s.fail_at("id", "must not be empty");
            st.name = s.string_or("name", st.id);
            st.head = s.vec3("head");
            if (s.has("metrics")) {
                const FieldReader m = s.child("metrics");
                m.expect_object();
                for (const auto& [key, value] : m.node().items()) {
                    st.metrics[key] = m.number(key);
                }
            }
            c.students.push_back(std::move(st));
        }
        return c;
    }
    r.fail_at("name", "unknown command \"" + name + "\"");
}

Message make_message(MessageType type, std::int64_t seq, Json payload) {
    Message m;
    m.type = type;
    m.seq = seq;
    m.payload = std::move(payload);
    return m;
}

namespace {

// Error details may quote raw input bytes; replace anything that is not UTF-8.
std::string sanitize_utf8(std::string_view text) {
    const std::string dumped = Json(std::string(text)).dump(-1, ' ', false, Json::error_handler_t::replace);
    return Json::parse(dumped).get<std::string>();
}

} // namespace

Message make_error(std::int64_t seq, std::string_view kind, std::string_view detail, std::string_view where) {
    Json p{{"kind", sanitize_utf8(kind)}, {"detail", sanitize_utf8(detail)}};
    if (!where.empty()) p["where"] = sanitize_utf8(where);
    return make_message(MessageType::error, seq, std::move(p));
}

} // namespace holo::proto
