#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "holo/geometry.hpp"
#include "holo/json_fields.hpp"
#include "holo/tracking.hpp"

namespace holo::scene {

using geom::ScreenGeometry;
using geom::ScreenPoint;
using geom::Side;
using geom::Vec3;
using geom::Viewer;

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;
    bool operator==(const Rgba&) const = default;
};

// ---------------------------------------------------------------------------
// Slide deck

enum class ItemKind { text, sprite, media_placeholder };

// Content placed in classroom coordinates; z < 0 recesses it behind the board,
// z > 0 pops it out toward the audience.
struct ContentItem {
    std::string id;
    ItemKind kind = ItemKind::text;
    Vec3 position;
    double width = 0.5;
    double height = 0.2;
    std::string text;    // kind == text
    std::string sprite;  // kind == sprite or media_placeholder (name)
};

struct Slide {
    std::string title;
    std::vector<ContentItem> items;
};

class SlideDeck {
public:
    // A deck always has at least one slide; an empty list yields one blank slide.
    SlideDeck() : SlideDeck(std::vector<Slide>{}) {}
    explicit SlideDeck(std::vector<Slide> slides, std::size_t current_index = 0);

    std::size_t size() const { return slides_.size(); }
    std::size_t current_index() const { return index_; }
    const Slide& current() const { return slides_[index_]; }
    const std::vector<Slide>& slides() const { return slides_; }

private:
    std::vector<Slide> slides_;
    std::size_t index_ = 0;
};

enum class Direction { next, previous };

struct NavigateResult {
    SlideDeck deck;
    bool boundary_hit = false;
};

NavigateResult navigate(const SlideDeck& deck, Direction direction);

// Deck JSON: {"title": str, "slides": [{"title": str, "items": [{"id", "kind":
// "text"|"sprite"|"media_placeholder", "position": [x,y,z], "size": [w,h],
// "text"?, "sprite"?}]}]}. Throws LocatedError("DeckInvalid").
SlideDeck parse_deck(const Json& doc);
SlideDeck load_deck(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Layers

enum class LayerKind { slide, stroke, avatar, afterimage, tag, object, media_placeholder };

std::string_view to_string(LayerKind kind);

struct Stroke {
    std::vector<ScreenPoint> points;
    Side author_side = Side::back;
    Rgba color_front;
    Rgba color_back;
};

struct TextNote {
    std::string text;
    ScreenPoint anchor;
    double height = 0.15;
    Side author_side = Side::back;
    Rgba color_front;
    Rgba color_back;
};

struct AvatarFigure {
    tracking::AvatarPose pose;
    double opacity = 1.0;
};

struct Tag {
    std::string student_id;
    std::string name;
    std::map<std::string, double> metrics;
    ScreenPoint center;
    double width = 0.0;
    double height = 0.0;
    int praise_count = 0;
};

// A 3D-placed object such as the virtual ball or an extruded model cell.
struct ObjectSprite {
    std::string ref;
    Vec3 position;
    double width = 0.1;
    double height = 0.1;
};

struct ObjectGroup {
    std::vector<ObjectSprite> sprites;
};

struct MediaPlaceholder {
    std::string name;
    Vec3 position;
    double width = 1.0;
    double height = 0.75;
};

struct SlideContent {};

using LayerPayload =
    std::variant<SlideContent, Stroke, TextNote, AvatarFigure, Tag, ObjectGroup, MediaPlaceholder>;

struct Layer {
    std::string id;
    LayerKind kind = LayerKind::slide;
    int z_order = 0;
    bool visible_front = true;
    bool visible_back = true;
    LayerPayload payload;
};

// ---------------------------------------------------------------------------
// Display lists

struct GlyphRun {
    std::string layer;
    std::string text;
    ScreenPoint center;
    double width = 0.0;
    double height = 0.0;
    Rgba color;
    bool mirrored = false;  // glyphs drawn u-reversed relative to how they were authored
};

struct Polyline {
    std::string layer;
    std::vector<ScreenPoint> points;
    Rgba color;
    double width = 0.0;
    double opacity = 1.0;
};

struct Sprite {
    std::string layer;
    std::string ref;
    ScreenPoint center;
    double width = 0.0;
    double height = 0.0;
    double opacity = 1.0;
};

struct TagBillboard {
    std::string layer;
    std::string student_id;
    std::string name;
    std::map<std::string, double> metrics;
    ScreenPoint center;
    double width = 0.0;
    double height = 0.0;
    int praise_count = 0;
};

using Primitive = std::variant<GlyphRun, Polyline, Sprite, TagBillboard>;

struct DisplayList {
    Side side = Side::front;
    std::int64_t frame_id = 0;
    std::vector<Primitive> primitives;
};

Json to_json(const DisplayList& list);
// SHA-256 of the canonical JSON encoding, minus frame_id: an idle board
// keeps its digest from frame to frame.
std::string digest(const DisplayList& list);

struct DisplayPair {
    DisplayList front;
    DisplayList back;
};

struct ViewerPair {
    Viewer front;
    Viewer back;
};

// ---------------------------------------------------------------------------
// Board

struct BoardStyle {
    Rgba ink_faint{64, 64, 64, 255};     // author's own side
    Rgba ink_bright{255, 255, 0, 255};   // mirrored for the opposite side
    Rgba slide_text{255, 255, 255, 255};
    Rgba avatar{0, 200, 255, 255};
    double stroke_width = 0.01;
    double avatar_line_width = 0.03;
    double afterimage_decay = 0.7;
    double afterimage_floor = 0.15;
    double tag_offset = 0.25;
    double tag_width = 0.5;
    double tag_height = 0.12;
    double clip_margin = 0.05;
};

// Throws Error("InvalidStyle").
void validate(const BoardStyle& style);

struct StudentInfo {
    std::string id;
    std::string name;
    Vec3 head_pos;
    std::map<std::string, double> metrics;
};

struct PraiseEvent {
    std::string student_id;
    std::int64_t t_us = 0;
    int praise_count = 0;
};

// The retained scene. Mutated only by the session tick; composing display
// lists reads it without modification.
class Board {
public:
    Board(ScreenGeometry screen = {}, BoardStyle style = {}, SlideDeck deck = SlideDeck{});

    const ScreenGeometry& screen() const { return screen_; }
    const BoardStyle& style() const { return style_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const Layer* find_layer(std::string_view id) const;

    std::int64_t frame_id() const { return frame_id_; }
    void advance_frame() { ++frame_id_; }

    // Slides
    const SlideDeck& deck() const { return deck_; }
    void set_deck(SlideDeck deck) { deck_ = std::move(deck); }
    // Returns true when the move was clamped at either end.
    bool navigate(Direction direction);

    // Writing. A device must be put into writing mode before its poses add
    // points; `side` is the face of the board it writes on.
    void begin_writing(const std::string& device_id, Side side);
    // Closes the active stroke; a stroke with fewer than two points is dropped.
    void end_writing(const std::string& device_id);
    bool is_writing(const std::string& device_id) const;
    // Drops the device position orthogonally onto the board and appends it to
    // the device's active stroke, skipping exact repeats of the last point.
    // Throws Error("NotInWritingMode").
    void add_stroke_point(const tracking::Pose& device);
    const Stroke* active_stroke(const std::string& device_id) const;
    void add_text_note(Side author_side, std::string text, ScreenPoint anchor, double height);
    void clear_ink();

    // Role-play
    void set_role_play(bool active);
    bool role_play_active() const { return role_play_; }
    void set_avatar(std::optional<tracking::AvatarPose> avatar);
    // Throws Error("RolePlayInactive").
    void freeze_afterimage(const tracking::AvatarPose& avatar);
    void clear_afterimages();
    // Newest first.
    std::vector<double> afterimage_opacities() const;

    // Dashboard. Tags are anchored above each head and projected through the
    // teacher's (back side) eye; overlapping tags stack upward in id order.
    // Throws Error("InvalidArgument") when the viewer is not on the back side.
    void update_dashboard(std::span<const StudentInfo> students, const Viewer& teacher_eye);
    std::vector<Tag> tags() const;
    bool dashboard_present() const;
    // Nearest tag centre within `radius`; ties go to the lower student id.
    std::optional<PraiseEvent> apply_praise(const ScreenPoint& click, double radius, std::int64_t t_us);

    // Objects (ball, model). Passing an empty group removes the layer.
    void set_objects(const std::string& name, int z_order, ObjectGroup group);

    void add_media_placeholder(MediaPlaceholder media);

private:
    Layer& add_layer(Layer layer);
    void remove_layer(std::string_view id);
    Layer* find_layer_mut(std::string_view id);

    ScreenGeometry screen_;
    BoardStyle style_;
    SlideDeck deck_;
    std::vector<Layer> layers_;
    std::int64_t frame_id_ = 0;
    std::uint64_t next_serial_ = 1;
    std::map<std::string, std::string> active_strokes_;  // device -> stroke layer id
    bool role_play_ = false;
};

// Renders every visible layer for both sides in z order. Content placed in 3D
// is projected through each side's viewer; ink and notes appear unmirrored in
// the faint colour on the author's side and u-mirrored in the bright colour
// on the other side. Primitives outside the board (plus clip margin) are
// clipped. Throws Error("DegenerateProjection") naming the offending layer.
DisplayPair compose_display_lists(const Board& board, const ViewerPair& viewers);

// Liang-Barsky clipping of a polyline against |u| <= half_w, |v| <= half_h;
// returns the surviving runs, each with at least two points.
std::vector<std::vector<ScreenPoint>> clip_polyline(std::span<const ScreenPoint> points, double half_w,
                                                    double half_h, const ScreenGeometry& screen);

} // namespace holo::scene
