#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "holo/config.hpp"
#include "holo/protocol.hpp"
#include "holo/scene.hpp"
#include "holo/techniques.hpp"
#include "holo/tracking.hpp"

namespace holo {

struct TickOutput {
    std::int64_t now_us = 0;
    std::vector<proto::Message> events;  // events and errors, in the order they happened
    proto::Message snapshot;
    scene::DisplayPair display;
};

// Everything one board session knows. Inputs are queued with submit() and
// take effect, in arrival order, on the next tick(). Tick k runs at
// now_us = k * tick period, so a run is a pure function of the inputs and
// the tick at which each was applied.
class Session {
public:
    explicit Session(EngineConfig cfg);

    // Called for every input as it is applied, with pose timestamps already
    // mapped onto the session clock. Hellos are not reported.
    using Recorder = std::function<void(std::int64_t at_us, const proto::Message&)>;
    void set_recorder(Recorder recorder) { recorder_ = std::move(recorder); }

    void submit(const std::string& connection, proto::Message msg);
    // A line from `connection` that could not be decoded; reported as an
    // error message on the next tick.
    void report_input_error(const std::string& connection, const Error& error);
    // Forget per-connection state (sequence numbers, clock offset).
    void disconnect(const std::string& connection);

    // Time of the next tick.
    std::int64_t next_tick_us() const { return tick_index_ * period_us_; }
    std::int64_t tick_index() const { return tick_index_; }

    TickOutput tick();

    const EngineConfig& config() const { return cfg_; }
    const scene::Board& board() const { return board_; }
    proto::Tool tool() const { return tool_; }
    const std::optional<tech::VirtualBall>& ball() const { return ball_; }
    const tech::ExtrusionField& model() const { return model_; }

    // Greeting sent to every new client.
    proto::Message hello_message();

private:
    struct Input {
        std::string connection;
        proto::Message msg;
    };
    struct Connection {
        std::optional<std::int64_t> last_seq;
        std::int64_t clock_offset_us = 0;
    };

    void apply(const Input& input);
    void apply_pose(const Input& input, tracking::Pose pose);
    void apply_command(const proto::Command& command);
    void set_tool(proto::Tool tool);
    void step_physics();
    void update_avatar();
    void refresh_ball_layer();
    void refresh_model_layer();
    void freeze_afterimage();

    void emit_event(Json payload);
    void emit_error(std::string_view kind, std::string_view detail, std::string_view where = {});
    Json snapshot_payload(const scene::DisplayPair& display) const;

    EngineConfig cfg_;
    std::int64_t period_us_;
    std::int64_t tick_index_ = 0;
    std::int64_t now_us_ = 0;
    std::int64_t out_seq_ = 0;

    std::vector<Input> pending_;
    std::string applying_;  // connection whose input is being applied
    std::vector<proto::Message> pending_errors_;
    std::vector<proto::Message> outbox_;
    std::map<std::string, Connection> connections_;
    Recorder recorder_;

    scene::Board board_;
    scene::ViewerPair viewers_;
    proto::Tool tool_ = proto::Tool::present;
    tracking::SkeletonConfig skeleton_;

    std::map<std::string, std::deque<tracking::Pose>> history_;  // per device
    tracking::PoseMap body_;
    std::optional<tracking::AvatarPose> avatar_;
    std::string avatar_problem_;
    std::set<std::string> active_triggers_;

    std::map<std::string, tech::ContactDetector> contacts_;
    std::optional<tech::VirtualBall> ball_;
    std::int64_t physics_steps_ = 0;

    tech::ExtrusionField model_;
    bool model_dirty_ = false;

    std::vector<scene::StudentInfo> students_;
};

} // namespace holo
