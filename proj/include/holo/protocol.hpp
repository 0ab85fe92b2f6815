#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "holo/geometry.hpp"
#include "holo/json_fields.hpp"
#include "holo/tracking.hpp"

// Wire format: one JSON object per line,
//   {"payload":{...},"seq":N,"type":"..."}\n
// with keys sorted at every level so the encoding of a message is unique.
namespace holo::proto {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxLineBytes = 1 << 20;
inline constexpr int kMaxNesting = 64;

enum class MessageType { pose_update, command, state_snapshot, event, hello, error };

std::string_view to_string(MessageType type);
std::optional<MessageType> message_type_from_string(std::string_view name);

struct Message {
    MessageType type = MessageType::event;
    std::int64_t seq = 0;
    Json payload = Json::object();
    // Unknown envelope keys, kept so re-encoding is lossless.
    Json extensions = Json::object();

    bool operator==(const Message&) const = default;
};

// Canonical bytes, newline terminated.
// Throws Error("UnencodableValue") for non-finite numbers or invalid UTF-8.
std::string encode(const Message& msg);
// Canonical encoding of an arbitrary document (no trailing newline).
// Throws Error("UnencodableValue").
std::string canonical_dump(const Json& doc);

// Accepts one line with or without its trailing newline.
// Throws Error("MalformedFrame"), Error("UnknownType") or
// LocatedError("SchemaViolation") whose where() is the field path.
Message decode(std::string_view line);

// ---------------------------------------------------------------------------
// Typed payloads

struct Hello {
    int version = kProtocolVersion;
    std::string client;
    std::optional<std::int64_t> clock_us;
};

Hello parse_hello(const Json& payload);
Json to_payload(const Hello& hello);

tracking::Pose parse_pose(const Json& payload);
Json to_payload(const tracking::Pose& pose);

enum class Tool { present, write, role_play, dashboard, ball, model };

std::string_view to_string(Tool tool);
std::optional<Tool> tool_from_string(std::string_view name);

namespace cmd {
struct NextSlide {};
struct PrevSlide {};
struct SetTool {
    Tool tool = Tool::present;
};
struct Pen {
    std::string device_id;
    bool down = false;
    geom::Side side = geom::Side::back;
};
struct Annotate {
    geom::Side side = geom::Side::back;
    std::string text;
    double u = 0.0;
    double v = 0.0;
    double height = 0.15;
};
struct ClearInk {};
struct FreezeAfterimage {};
struct ClearAfterimages {};
struct Praise {
    double u = 0.0;
    double v = 0.0;
    double radius = 0.3;
};
struct ThrowBall {
    std::optional<geom::Vec3> origin;
    geom::Vec3 direction;
    double speed = 0.0;
};
struct MoveViewer {
    geom::Side side = geom::Side::front;
    geom::Vec3 eye;
};
struct Student {
    std::string id;
    std::string name;
    geom::Vec3 head;
    std::map<std::string, double> metrics;
};
struct SetStudents {
    std::vector<Student> students;
};
struct ResetModel {};
struct Calibrate {};
} // namespace cmd

using Command = std::variant<cmd::NextSlide, cmd::PrevSlide, cmd::SetTool, cmd::Pen, cmd::Annotate, cmd::ClearInk,
                             cmd::FreezeAfterimage, cmd::ClearAfterimages, cmd::Praise, cmd::ThrowBall,
                             cmd::MoveViewer, cmd::SetStudents, cmd::ResetModel, cmd::Calibrate>;

// Command payload: {"name": "...", "args": {...}}; args may be omitted for
// commands without parameters.
Command parse_command(const Json& payload);
Json to_payload(const Command& command);
std::string_view command_name(const Command& command);

// Convenience constructors for outgoing messages.
Message make_message(MessageType type, std::int64_t seq, Json payload);
Message make_error(std::int64_t seq, std::string_view kind, std::string_view detail, std::string_view where = {});

} // namespace holo::proto
