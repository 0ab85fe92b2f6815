#include "holo/session.hpp"

#include <algorithm>
#include <cmath>

namespace holo {

namespace {

constexpr std::int64_t kHistorySpanUs = 1'000'000;
constexpr std::size_t kHistoryCap = 512;
constexpr int kZBall = 25;
constexpr int kZModel = 24;
constexpr double kBallSize = 0.12;

Json screen_point_json(const geom::ScreenPoint& p) { return Json{{"u", p.u}, {"v", p.v}, {"on_screen", p.on_screen}}; }

bool is_hand(tracking::Role role) {
    return role == tracking::Role::left_hand || role == tracking::Role::right_hand;
}

} // namespace

Session::Session(EngineConfig cfg)
    : cfg_(std::move(cfg)),
      period_us_(cfg_.tick_period_us()),
      board_(cfg_.screen, cfg_.board, cfg_.deck),
      viewers_{geom::default_viewer(geom::Side::front, cfg_.viewers),
               geom::default_viewer(geom::Side::back, cfg_.viewers)},
      skeleton_(cfg_.skeleton),
      model_(cfg_.modeling) {
    geom::validate(cfg_.screen);
    scene::validate(cfg_.board);
    tech::validate(cfg_.physics);
    tracking::validate(cfg_.skeleton);
}

proto::Message Session::hello_message() {
    proto::Hello h;
    h.client = "holoboard-server";
    h.clock_us = now_us_;
    Json p = proto::to_payload(h);
    p["tick_rate_hz"] = cfg_.tick_rate_hz;
    p["seed"] = cfg_.seed;
    return proto::make_message(proto::MessageType::hello, ++out_seq_, std::move(p));
}

void Session::submit(const std::string& connection, proto::Message msg) {
    pending_.push_back(Input{connection, std::move(msg)});
}

void Session::report_input_error(const std::string& connection, const Error& error) {
    const auto* located = dynamic_cast<const LocatedError*>(&error);
    auto msg = proto::make_error(0, error.kind(), error.what(), located ? located->where() : "");
    msg.payload["connection"] = connection;
    pending_errors_.push_back(std::move(msg));
}

void Session::disconnect(const std::string& connection) {
    connections_.erase(connection);
}

void Session::emit_event(Json payload) {
    payload["t_us"] = now_us_;
    outbox_.push_back(proto::make_message(proto::MessageType::event, ++out_seq_, std::move(payload)));
}

void Session::emit_error(std::string_view kind, std::string_view detail, std::string_view where) {
    auto msg = proto::make_error(++out_seq_, kind, detail, where);
    msg.payload["t_us"] = now_us_;
    if (!applying_.empty()) msg.payload["connection"] = applying_;
    outbox_.push_back(std::move(msg));
}

TickOutput Session::tick() {
    now_us_ = tick_index_ * period_us_;
    ++tick_index_;

    for (auto& err : pending_errors_) {
        err.seq = ++out_seq_;
        err.payload["t_us"] = now_us_;
        outbox_.push_back(std::move(err));
    }
    pending_errors_.clear();

    std::vector<Input> inputs;
    inputs.swap(pending_);
    for (const Input& in : inputs) {
        applying_ = in.connection;
        try {
            apply(in);
        } catch (const LocatedError& e) {
            emit_error(e.kind(), e.what(), e.where());
        } catch (const Error& e) {
            emit_error(e.kind(), e.what());
        }
    }
    applying_.clear();

    step_physics();
    update_avatar();
    if (!students_.empty()) board_.update_dashboard(students_, viewers_.back);
    refresh_ball_layer();
    refresh_model_layer();

    board_.advance_frame();
    TickOutput out;
    out.now_us = now_us_;
    try {
        out.display = scene::compose_display_lists(board_, viewers_);
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
        out.display.front.side = geom::Side::front;
        out.display.back.side = geom::Side::back;
        out.display.front.frame_id = out.display.back.frame_id = board_.frame_id();
    }
    out.events.swap(outbox_);
    out.snapshot = proto::make_message(proto::MessageType::state_snapshot, ++out_seq_, snapshot_payload(out.display));
    return out;
}

void Session::apply(const Input& input) {
    const proto::Message& msg = input.msg;
    Connection& conn = connections_[input.connection];
    if (conn.last_seq) {
        if (msg.seq <= *conn.last_seq) {
            emit_error("SeqNotIncreasing",
                       "connection " + input.connection + " sent seq " + std::to_string(msg.seq) + " after " +
                           std::to_string(*conn.last_seq));
            return;
        }
        if (msg.seq != *conn.last_seq + 1) {
            emit_event({{"kind", "seq_gap"},
                        {"connection", input.connection},
                        {"expected", *conn.last_seq + 1},
                        {"received", msg.seq}});
        }
    }
    conn.last_seq = msg.seq;

    switch (msg.type) {
    case proto::MessageType::hello: {
        const proto::Hello h = proto::parse_hello(msg.payload);
        if (h.version != proto::kProtocolVersion) {
            emit_error("VersionMismatch", "client speaks version " + std::to_string(h.version) + ", server " +
                                              std::to_string(proto::kProtocolVersion));
            return;
        }
        conn.clock_offset_us = h.clock_us ? now_us_ - *h.clock_us : 0;
        emit_event({{"kind", "client_hello"}, {"connection", input.connection}, {"client", h.client}});
        return;
    }
    case proto::MessageType::pose_update: {
        tracking::Pose pose = proto::parse_pose(msg.payload);
        pose.timestamp_us += conn.clock_offset_us;
        if (recorder_) {
            proto::Message rec = msg;
            rec.payload["timestamp_us"] = pose.timestamp_us;
            recorder_(now_us_, rec);
        }
        apply_pose(input, std::move(pose));
        return;
    }
    case proto::MessageType::command: {
        const proto::Command command = proto::parse_command(msg.payload);
        if (recorder_) recorder_(now_us_, msg);
        apply_command(command);
        return;
    }
    case proto::MessageType::state_snapshot:
    case proto::MessageType::event:
    case proto::MessageType::error:
        emit_error("UnexpectedMessage", std::string(proto::to_string(msg.type)) + " is server-to-client only");
        return;
    }
}

void Session::apply_pose(const Input&, tracking::Pose pose) {
    auto& hist = history_[pose.device_id];
    if (!hist.empty()) {
        if (pose.timestamp_us < hist.back().timestamp_us) {
            emit_error("OutOfOrderPose", "device " + pose.device_id + " went back in time");
            return;
        }
        if (hist.back().role != pose.role) hist.clear();
    }
    hist.push_back(pose);
    while (hist.size() > kHistoryCap || hist.back().timestamp_us - hist.front().timestamp_us > kHistorySpanUs) {
        hist.pop_front();
    }

    if (pose.role != tracking::Role::ball) {
        auto it = body_.find(pose.role);
        if (it == body_.end() || it->second.timestamp_us <= pose.timestamp_us) body_[pose.role] = pose;
    }

    if (tool_ == proto::Tool::write && board_.is_writing(pose.device_id)) {
        board_.add_stroke_point(pose);
    }

    if (tool_ == proto::Tool::ball && pose.role == tracking::Role::ball) {
        const std::vector<tracking::Pose> samples(hist.begin(), hist.end());
        if (auto contact = contacts_[pose.device_id].update(samples, cfg_.physics)) {
            ball_ = tech::handoff_physical_to_virtual(*contact, cfg_.physics);
            physics_steps_ = static_cast<std::int64_t>(std::floor(now_us_ * 1e-6 / cfg_.physics.dt));
            emit_event({{"kind", "ball_handoff"},
                        {"device_id", pose.device_id},
                        {"point", screen_point_json(contact->point)},
                        {"velocity", vec3_array(contact->velocity)},
                        {"thrower_side", std::string(geom::to_string(contact->thrower_side))}});
        }
    }

    if (tool_ == proto::Tool::model && is_hand(pose.role)) {
        const bool was_engaged = model_.engaged();
        const tech::ExtrusionField next = tech::extrude(model_, pose);
        if (!(next == model_)) {
            model_ = next;
            model_dirty_ = true;
        }
        if (model_.engaged() != was_engaged) {
            emit_event({{"kind", model_.engaged() ? "model_press" : "model_release"}, {"device_id", pose.device_id}});
        }
    }
}

void Session::set_tool(proto::Tool tool) {
    if (tool == tool_) return;
    if (tool_ == proto::Tool::write) {
        std::vector<std::string> writers;
        for (const auto& [device, hist] : history_) {
            if (board_.is_writing(device)) writers.push_back(device);
        }
        for (const auto& d : writers) board_.end_writing(d);
    }
    tool_ = tool;
    board_.set_role_play(tool == proto::Tool::role_play);
    if (tool != proto::Tool::role_play) {
        avatar_.reset();
        avatar_problem_.clear();
        active_triggers_.clear();
    }
    model_.set_modeling(tool == proto::Tool::model);
    emit_event({{"kind", "tool_changed"}, {"tool", std::string(proto::to_string(tool))}});
}

void Session::freeze_afterimage() {
    if (!board_.role_play_active()) throw Error("RolePlayInactive", "role-play tool is not active");
    if (!avatar_) throw Error("NoAvatar", "no avatar has been solved yet");
    board_.freeze_afterimage(*avatar_);
    emit_event({{"kind", "afterimage_frozen"}, {"count", board_.afterimage_opacities().size()}});
}

void Session::apply_command(const proto::Command& command) {
    using namespace proto::cmd;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NextSlide> || std::is_same_v<T, PrevSlide>) {
                const bool clamped = board_.navigate(std::is_same_v<T, NextSlide> ? scene::Direction::next
                                                                                   : scene::Direction::previous);
                emit_event({{"kind", clamped ? "slide_boundary" : "slide_changed"},
                            {"index", board_.deck().current_index()}});
            } else if constexpr (std::is_same_v<T, SetTool>) {
                set_tool(c.tool);
            } else if constexpr (std::is_same_v<T, Pen>) {
                if (c.down) {
                    if (tool_ != proto::Tool::write) throw Error("ToolInactive", "pen requires the write tool");
                    board_.begin_writing(c.device_id, c.side);
                } else {
                    board_.end_writing(c.device_id);
                }
            } else if constexpr (std::is_same_v<T, Annotate>) {
                board_.add_text_note(c.side, c.text, geom::make_screen_point(c.u, c.v, cfg_.screen), c.height);
            } else if constexpr (std::is_same_v<T, ClearInk>) {
                board_.clear_ink();
            } else if constexpr (std::is_same_v<T, FreezeAfterimage>) {
                freeze_afterimage();
            } else if constexpr (std::is_same_v<T, ClearAfterimages>) {
                board_.clear_afterimages();
            } else if constexpr (std::is_same_v<T, Praise>) {
                const auto hit = board_.apply_praise(geom::make_screen_point(c.u, c.v, cfg_.screen), c.radius, now_us_);
                if (hit) {
                    emit_event({{"kind", "praise"}, {"student_id", hit->student_id}, {"praise_count", hit->praise_count}});
                } else {
                    emit_event({{"kind", "praise_missed"}, {"u", c.u}, {"v", c.v}});
                }
            } else if constexpr (std::is_same_v<T, ThrowBall>) {
                const auto dir = geom::normalized(c.direction);
                if (!dir) throw Error("InvalidArgument", "throw direction is zero");
                tech::VirtualBall b;
                b.position = c.origin.value_or(geom::Vec3{0.0, 0.0, 0.0});
                b.velocity = *dir * c.speed;
                if (!cfg_.physics.play_volume.contains(b.position)) {
                    throw Error("InvalidArgument", "throw origin outside the play volume");
                }
                ball_ = b;
                physics_steps_ = static_cast<std::int64_t>(std::floor(now_us_ * 1e-6 / cfg_.physics.dt));
                emit_event({{"kind", "ball_thrown"}, {"velocity", vec3_array(b.velocity)}});
            } else if constexpr (std::is_same_v<T, MoveViewer>) {
                const geom::Viewer v(c.eye, c.side);
                (c.side == geom::Side::front ? viewers_.front : viewers_.back) = v;
            } else if constexpr (std::is_same_v<T, SetStudents>) {
                std::vector<scene::StudentInfo> list;
                for (const auto& s : c.students) list.push_back({s.id, s.name, s.head, s.metrics});
                board_.update_dashboard(list, viewers_.back);
                students_ = std::move(list);
            } else if constexpr (std::is_same_v<T, ResetModel>) {
                model_.reset();
                model_dirty_ = true;
            } else if constexpr (std::is_same_v<T, Calibrate>) {
                skeleton_ = tracking::calibrate_skeleton(body_, cfg_.skeleton);
                emit_event({{"kind", "calibrated"},
                            {"upper_arm", skeleton_.upper_arm},
                            {"forearm", skeleton_.forearm},
                            {"thigh", skeleton_.thigh},
                            {"shin", skeleton_.shin}});
            }
        },
        command);
}

void Session::step_physics() {
    if (!ball_) return;
    const auto target = static_cast<std::int64_t>(std::floor(now_us_ * 1e-6 / cfg_.physics.dt));
    while (physics_steps_ < target && ball_) {
        ++physics_steps_;
        *ball_ = tech::step_ballistic(*ball_, cfg_.physics);
        if (ball_->state == tech::BallState::out_of_bounds) {
            emit_event({{"kind", "ball_out"}, {"position", vec3_array(ball_->position)}});
            ball_.reset();
            break;
        }
        for (tracking::Role role : {tracking::Role::left_hand, tracking::Role::right_hand}) {
            const auto it = body_.find(role);
            if (it == body_.end() || now_us_ - it->second.timestamp_us > skeleton_.stale_us) continue;
            tech::Paddle paddle;
            paddle.pose = it->second;
            paddle.radius = cfg_.paddle_radius;
            const auto& hist = history_[it->second.device_id];
            try {
                const std::vector<tracking::Pose> samples(hist.begin(), hist.end());
                paddle.velocity = tracking::estimate_velocity(samples, cfg_.physics.velocity_window_us).linear;
            } catch (const Error&) {
                paddle.velocity = {};
            }
            if (auto hit = tech::paddle_hit(*ball_, paddle, cfg_.physics)) {
                ball_ = *hit;
                emit_event({{"kind", "paddle_hit"},
                            {"role", std::string(tracking::to_string(role))},
                            {"owner", std::string(tech::to_string(hit->owner_side))}});
            }
        }
    }
}

void Session::update_avatar() {
    if (tool_ != proto::Tool::role_play) return;
    std::string problem;
    try {
        tracking::AvatarPose pose = tracking::solve_skeleton(body_, skeleton_, now_us_);
        std::vector<tracking::TriggerRule> rules;
        for (const auto& spec : cfg_.triggers) rules.push_back(spec.rule);
        pose.trigger_state = tracking::detect_pose_triggers(pose, rules);
        avatar_ = pose;
        board_.set_avatar(pose);
    } catch (const Error& e) {
        problem = e.what();
        avatar_.reset();
        board_.set_avatar(std::nullopt);
        if (problem != avatar_problem_) emit_error(e.kind(), e.what());
    }
    avatar_problem_ = problem;

    const std::set<std::string> firing = avatar_ ? avatar_->trigger_state : std::set<std::string>{};
    for (const auto& spec : cfg_.triggers) {
        const bool now_on = firing.contains(spec.rule.name);
        const bool was_on = active_triggers_.contains(spec.rule.name);
        if (now_on && !was_on) {
            emit_event({{"kind", "trigger"}, {"name", spec.rule.name}});
            try {
                switch (spec.action) {
                case TriggerAction::none: break;
                case TriggerAction::freeze_afterimage: freeze_afterimage(); break;
                case TriggerAction::next_slide: apply_command(proto::cmd::NextSlide{}); break;
                case TriggerAction::prev_slide: apply_command(proto::cmd::PrevSlide{}); break;
                }
            } catch (const Error& e) {
                emit_error(e.kind(), e.what());
            }
        }
    }
    active_triggers_ = firing;
}

void Session::refresh_ball_layer() {
    scene::ObjectGroup group;
    if (ball_) group.sprites.push_back({"ball", ball_->position, kBallSize, kBallSize});
    board_.set_objects("ball", kZBall, std::move(group));
}

void Session::refresh_model_layer() {
    if (!model_dirty_) return;
    model_dirty_ = false;
    const auto& mc = model_.config();
    const double cw = mc.width / mc.cols;
    const double ch = mc.height / mc.rows;
    scene::ObjectGroup group;
    for (int row = 0; row < mc.rows; ++row) {
        for (int col = 0; col < mc.cols; ++col) {
            const double d = model_.depth(col, row);
            if (d <= 0.0) continue;
            geom::Vec3 p = model_.cell_center(col, row);
            p.z = -geom::side_sign(mc.side) * d;
            group.sprites.push_back({"model_cell", p, cw, ch});
        }
    }
    board_.set_objects("model", kZModel, std::move(group));
}

Json Session::snapshot_payload(const scene::DisplayPair& display) const {
    Json layers = Json::array();
    for (const auto& l : board_.layers()) {
        layers.push_back({{"id", l.id},
                          {"kind", std::string(scene::to_string(l.kind))},
                          {"z_order", l.z_order},
                          {"visible_front", l.visible_front},
                          {"visible_back", l.visible_back}});
    }
    Json tags = Json::array();
    for (const auto& t : board_.tags()) {
        tags.push_back({{"student_id", t.student_id},
                        {"name", t.name},
                        {"center", screen_point_json(t.center)},
                        {"width", t.width},
                        {"height", t.height},
                        {"metrics", t.metrics},
                        {"praise_count", t.praise_count}});
    }
    Json ball = nullptr;
    if (ball_) {
        ball = {{"position", vec3_array(ball_->position)},
                {"velocity", vec3_array(ball_->velocity)},
                {"state", std::string(tech::to_string(ball_->state))},
                {"owner", std::string(tech::to_string(ball_->owner_side))}};
    }
    std::size_t raised = 0;
    double max_depth = 0.0;
    for (double d : model_.depths()) {
        if (d > 0.0) ++raised;
        max_depth = std::max(max_depth, d);
    }
    const auto& deck = board_.deck();
    Json triggers = Json::array();
    if (avatar_) {
        for (const auto& t : avatar_->trigger_state) triggers.push_back(t);
    }

    return Json{
        {"frame_id", board_.frame_id()},
        {"t_us", now_us_},
        {"tool", std::string(proto::to_string(tool_))},
        {"slide", {{"index", deck.current_index()}, {"count", deck.size()}, {"title", deck.current().title}}},
        {"viewers", {{"front", vec3_array(viewers_.front.eye())}, {"back", vec3_array(viewers_.back.eye())}}},
        {"layers", layers},
        {"avatar", {{"present", board_.find_layer("avatar") != nullptr}, {"triggers", triggers}}},
        {"afterimages", board_.afterimage_opacities()},
        {"tags", tags},
        {"ball", ball},
        {"model", {{"engaged", model_.engaged()}, {"cells_raised", raised}, {"max_depth", max_depth}}},
        {"display", {{"front", scene::to_json(display.front)}, {"back", scene::to_json(display.back)}}},
        {"digests", {{"front", scene::digest(display.front)}, {"back", scene::digest(display.back)}}},
    };
}

} // namespace holo
