#include "holo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "holo/digest.hpp"

namespace holo::scene {

namespace {

constexpr std::string_view kLayerKindNames[] = {"slide",      "stroke", "avatar",           "afterimage",
                                                "tag",        "object", "media_placeholder"};

constexpr int kZSlide = 0;
constexpr int kZMedia = 1;
constexpr int kZInk = 10;
constexpr int kZAfterimage = 15;
constexpr int kZAvatar = 20;
constexpr int kZTag = 30;

// Tags closer than this in either axis count as overlapping; the slack keeps
// a tag pushed up by exactly one tag height from re-colliding on rounding.
constexpr double kTagSlack = 1e-9;

ItemKind item_kind_from_string(const FieldReader& item, const std::string& name) {
    if (name == "text") return ItemKind::text;
    if (name == "sprite") return ItemKind::sprite;
    if (name == "media_placeholder") return ItemKind::media_placeholder;
    item.fail_at("kind", "unknown item kind \"" + name + "\"");
}

} // namespace

std::string_view to_string(LayerKind kind) {
    return kLayerKindNames[static_cast<std::size_t>(kind)];
}

// ---------------------------------------------------------------------------
// Deck

SlideDeck::SlideDeck(std::vector<Slide> slides, std::size_t current_index)
    : slides_(std::move(slides)), index_(current_index) {
    if (slides_.empty()) {
        slides_.push_back(Slide{});
    }
    if (index_ >= slides_.size()) {
        throw Error("InvalidArgument", "slide index out of range");
    }
}

NavigateResult navigate(const SlideDeck& deck, Direction direction) {
    std::size_t index = deck.current_index();
    bool boundary = false;
    if (direction == Direction::next) {
        if (index + 1 < deck.size()) ++index; else boundary = true;
    } else {
        if (index > 0) --index; else boundary = true;
    }
    return {SlideDeck(deck.slides(), index), boundary};
}

SlideDeck parse_deck(const Json& doc) {
    const FieldReader root(doc, "", "DeckInvalid");
    root.expect_object();
    const FieldReader slides = root.child("slides");
    std::vector<Slide> out;
    for (std::size_t i = 0; i < slides.array_size(); ++i) {
        const FieldReader s = slides.element(i);
        s.expect_object();
        Slide slide;
        slide.title = s.string_or("title", "");
        if (s.has("items")) {
            const FieldReader items = s.child("items");
            for (std::size_t k = 0; k < items.array_size(); ++k) {
                const FieldReader it = items.element(k);
                it.expect_object();
                ContentItem item;
                item.id = it.string("id");
                item.kind = item_kind_from_string(it, it.string("kind"));
                item.position = it.vec3("position");
                if (it.has("size")) {
                    const FieldReader size = it.child("size");
                    if (size.array_size() != 2) size.fail("expected [width, height]");
                    item.width = size.element(0).as_number();
                    item.height = size.element(1).as_number();
                    if (!(item.width > 0.0 && item.height > 0.0)) size.fail("size must be positive");
                }
                if (item.kind == ItemKind::text) {
                    item.text = it.string("text");
                } else {
                    item.sprite = it.string("sprite");
                }
                slide.items.push_back(std::move(item));
            }
        }
        out.push_back(std::move(slide));
    }
    if (out.empty()) {
        slides.fail("deck needs at least one slide");
    }
    return SlideDeck(std::move(out));
}

SlideDeck load_deck(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LocatedError("DeckInvalid", path.string(), "cannot open deck file");
    }
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw LocatedError("DeckInvalid", path.string(), e.what());
    }
    return parse_deck(doc);
}

// ---------------------------------------------------------------------------
// Board

void validate(const BoardStyle& s) {
    const double positive[] = {s.stroke_width, s.avatar_line_width, s.tag_width, s.tag_height};
    for (double v : positive) {
        if (!(std::isfinite(v) && v > 0.0)) throw Error("InvalidStyle", "widths must be positive");
    }
    if (!(s.afterimage_decay > 0.0 && s.afterimage_decay < 1.0)) {
        throw Error("InvalidStyle", "afterimage decay must be in (0, 1)");
    }
    if (!(s.afterimage_floor > 0.0 && s.afterimage_floor <= 1.0)) {
        throw Error("InvalidStyle", "afterimage floor must be in (0, 1]");
    }
    if (!(std::isfinite(s.tag_offset) && std::isfinite(s.clip_margin) && s.clip_margin >= 0.0)) {
        throw Error("InvalidStyle", "tag offset and clip margin must be finite, margin >= 0");
    }
}

Board::Board(ScreenGeometry screen, BoardStyle style, SlideDeck deck)
    : screen_(screen), style_(style), deck_(std::move(deck)) {
    geom::validate(screen_);
    validate(style_);
    add_layer(Layer{"slide", LayerKind::slide, kZSlide, true, true, SlideContent{}});
}

const Layer* Board::find_layer(std::string_view id) const {
    const auto it = std::find_if(layers_.begin(), layers_.end(), [&](const Layer& l) { return l.id == id; });
    return it == layers_.end() ? nullptr : &*it;
}

Layer* Board::find_layer_mut(std::string_view id) {
    return const_cast<Layer*>(std::as_const(*this).find_layer(id));
}

Layer& Board::add_layer(Layer layer) {
    if (find_layer(layer.id) != nullptr) {
        throw Error("DuplicateLayer", layer.id);
    }
    layers_.push_back(std::move(layer));
    return layers_.back();
}

void Board::remove_layer(std::string_view id) {
    std::erase_if(layers_, [&](const Layer& l) { return l.id == id; });
}

bool Board::navigate(Direction direction) {
    auto result = scene::navigate(deck_, direction);
    deck_ = std::move(result.deck);
    return result.boundary_hit;
}

void Board::begin_writing(const std::string& device_id, Side side) {
    end_writing(device_id);
    Stroke stroke;
    stroke.author_side = side;
    stroke.color_front = side == Side::front ? style_.ink_faint : style_.ink_bright;
    stroke.color_back = side == Side::back ? style_.ink_faint : style_.ink_bright;
    const std::string id = "stroke-" + std::to_string(next_serial_++);
    add_layer(Layer{id, LayerKind::stroke, kZInk, true, true, std::move(stroke)});
    active_strokes_[device_id] = id;
}

void Board::end_writing(const std::string& device_id) {
    const auto it = active_strokes_.find(device_id);
    if (it == active_strokes_.end()) return;
    if (const Stroke* s = active_stroke(device_id); s != nullptr && s->points.size() < 2) {
        remove_layer(it->second);
    }
    active_strokes_.erase(it);
}

bool Board::is_writing(const std::string& device_id) const {
    return active_strokes_.contains(device_id);
}

const Stroke* Board::active_stroke(const std::string& device_id) const {
    const auto it = active_strokes_.find(device_id);
    if (it == active_strokes_.end()) return nullptr;
    const Layer* layer = find_layer(it->second);
    return layer == nullptr ? nullptr : std::get_if<Stroke>(&layer->payload);
}

void Board::add_stroke_point(const tracking::Pose& device) {
    const auto it = active_strokes_.find(device.device_id);
    Layer* layer = it == active_strokes_.end() ? nullptr : find_layer_mut(it->second);
    if (layer == nullptr) {
        throw Error("NotInWritingMode", device.device_id);
    }
    const ScreenPoint p = geom::make_screen_point(device.position.x, device.position.y, screen_);
    auto& points = std::get<Stroke>(layer->payload).points;
    if (!points.empty() && points.back().u == p.u && points.back().v == p.v) {
        return;
    }
    points.push_back(p);
}

void Board::add_text_note(Side author_side, std::string text, ScreenPoint anchor, double height) {
    if (!(std::isfinite(anchor.u) && std::isfinite(anchor.v) && height > 0.0 && std::isfinite(height))) {
        throw Error("InvalidArgument", "text note needs a finite anchor and positive height");
    }
    TextNote note;
    note.text = std::move(text);
    note.anchor = geom::make_screen_point(anchor.u, anchor.v, screen_);
    note.height = height;
    note.author_side = author_side;
    note.color_front = author_side == Side::front ? style_.ink_faint : style_.ink_bright;
    note.color_back = author_side == Side::back ? style_.ink_faint : style_.ink_bright;
    add_layer(Layer{"note-" + std::to_string(next_serial_++), LayerKind::stroke, kZInk, true, true,
                    std::move(note)});
}

void Board::clear_ink() {
    std::erase_if(layers_, [](const Layer& l) { return l.kind == LayerKind::stroke; });
    active_strokes_.clear();
}

void Board::set_role_play(bool active) {
    role_play_ = active;
    if (!active) {
        remove_layer("avatar");
    }
}

void Board::set_avatar(std::optional<tracking::AvatarPose> avatar) {
    if (!avatar || !role_play_) {
        remove_layer("avatar");
        return;
    }
    if (Layer* layer = find_layer_mut("avatar")) {
        layer->payload = AvatarFigure{std::move(*avatar), 1.0};
        return;
    }
    // The presenter sees themself through the board; the avatar is drawn for
    // the audience only.
    add_layer(Layer{"avatar", LayerKind::avatar, kZAvatar, true, false, AvatarFigure{std::move(*avatar), 1.0}});
}

void Board::freeze_afterimage(const tracking::AvatarPose& avatar) {
    if (!role_play_) {
        throw Error("RolePlayInactive", "afterimages need an active role-play layer");
    }
    add_layer(Layer{"afterimage-" + std::to_string(next_serial_++), LayerKind::afterimage, kZAfterimage, true,
                    false, AvatarFigure{avatar, 1.0}});
    // Opacity follows age rank, so every existing snapshot fades one step.
    const auto opacities = afterimage_opacities();
    std::size_t rank = opacities.size();
    for (Layer& layer : layers_) {
        if (layer.kind == LayerKind::afterimage) {
            std::get<AvatarFigure>(layer.payload).opacity = opacities[--rank];
        }
    }
}

void Board::clear_afterimages() {
    std::erase_if(layers_, [](const Layer& l) { return l.kind == LayerKind::afterimage; });
}

std::vector<double> Board::afterimage_opacities() const {
    const auto count = std::count_if(layers_.begin(), layers_.end(),
                                     [](const Layer& l) { return l.kind == LayerKind::afterimage; });
    std::vector<double> out;
    double opacity = 1.0;
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        out.push_back(std::max(opacity, style_.afterimage_floor));
        opacity *= style_.afterimage_decay;
    }
    return out;
}

void Board::update_dashboard(std::span<const StudentInfo> students, const Viewer& teacher_eye) {
    if (teacher_eye.side() != Side::back) {
        throw Error("InvalidArgument", "dashboard viewer must stand behind the board");
    }
    std::map<std::string, int> praise;
    for (const Layer& l : layers_) {
        if (l.kind == LayerKind::tag) {
            const auto& tag = std::get<Tag>(l.payload);
            praise[tag.student_id] = tag.praise_count;
        }
    }
    std::erase_if(layers_, [](const Layer& l) { return l.kind == LayerKind::tag; });

    std::vector<const StudentInfo*> ordered;
    for (const StudentInfo& s : students) {
        if (!geom::is_finite(s.head_pos)) throw Error("InvalidArgument", "student head position not finite");
        for (const auto& [key, value] : s.metrics) {
            if (!std::isfinite(value)) throw Error("InvalidArgument", "metric " + key + " is not finite");
        }
        ordered.push_back(&s);
    }
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

    const double w = style_.tag_width;
    const double h = style_.tag_height;
    std::vector<ScreenPoint> placed;
    for (const StudentInfo* s : ordered) {
        const Vec3 anchor = s->head_pos + Vec3{0.0, style_.tag_offset, 0.0};
        ScreenPoint c = geom::project_point(teacher_eye, anchor, screen_);
        bool moved = true;
        while (moved) {
            moved = false;
            for (const ScreenPoint& other : placed) {
                if (std::abs(c.u - other.u) < w - kTagSlack && std::abs(c.v - other.v) < h - kTagSlack) {
                    c.v += h;
                    moved = true;
                }
            }
        }
        c = geom::make_screen_point(c.u, c.v, screen_);
        placed.push_back(c);

        Tag tag;
        tag.student_id = s->id;
        tag.name = s->name;
        tag.metrics = s->metrics;
        tag.center = c;
        tag.width = w;
        tag.height = h;
        tag.praise_count = praise.contains(s->id) ? praise[s->id] : 0;
        add_layer(Layer{"tag-" + s->id, LayerKind::tag, kZTag, false, true, std::move(tag)});
    }
}

std::vector<Tag> Board::tags() const {
    std::vector<Tag> out;
    for (const Layer& l : layers_) {
        if (l.kind == LayerKind::tag) out.push_back(std::get<Tag>(l.payload));
    }
    return out;
}

bool Board::dashboard_present() const {
    return std::any_of(layers_.begin(), layers_.end(), [](const Layer& l) { return l.kind == LayerKind::tag; });
}

std::optional<PraiseEvent> Board::apply_praise(const ScreenPoint& click, double radius, std::int64_t t_us) {
    Tag* best = nullptr;
    double best_d = 0.0;
    for (Layer& l : layers_) {
        if (l.kind != LayerKind::tag) continue;
        auto& tag = std::get<Tag>(l.payload);
        const double d = std::hypot(tag.center.u - click.u, tag.center.v - click.v);
        if (d > radius) continue;
        if (best == nullptr || d < best_d || (d == best_d && tag.student_id < best->student_id)) {
            best = &tag;
            best_d = d;
        }
    }
    if (best == nullptr) return std::nullopt;
    ++best->praise_count;
    return PraiseEvent{best->student_id, t_us, best->praise_count};
}

void Board::set_objects(const std::string& name, int z_order, ObjectGroup group) {
    const std::string id = "object-" + name;
    if (group.sprites.empty()) {
        remove_layer(id);
        return;
    }
    for (const ObjectSprite& s : group.sprites) {
        if (!geom::is_finite(s.position)) throw Error("InvalidArgument", "object position not finite");
    }
    if (Layer* layer = find_layer_mut(id)) {
        layer->payload = std::move(group);
        layer->z_order = z_order;
        return;
    }
    add_layer(Layer{id, LayerKind::object, z_order, true, true, std::move(group)});
}

void Board::add_media_placeholder(MediaPlaceholder media) {
    const std::string id = "media-" + media.name;
    add_layer(Layer{id, LayerKind::media_placeholder, kZMedia, true, true, std::move(media)});
}

// ---------------------------------------------------------------------------
// Composition

std::vector<std::vector<ScreenPoint>> clip_polyline(std::span<const ScreenPoint> points, double half_w,
                                                    double half_h, const ScreenGeometry& screen) {
    std::vector<std::vector<ScreenPoint>> runs;
    std::vector<ScreenPoint> run;
    auto flush = [&] {
        if (run.size() >= 2) runs.push_back(std::move(run));
        run.clear();
    };
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double u0 = points[i].u, v0 = points[i].v;
        const double du = points[i + 1].u - u0, dv = points[i + 1].v - v0;
        double t0 = 0.0, t1 = 1.0;
        bool visible = true;
        const double p[4] = {-du, du, -dv, dv};
        const double q[4] = {u0 + half_w, half_w - u0, v0 + half_h, half_h - v0};
        for (int k = 0; k < 4 && visible; ++k) {
            if (p[k] == 0.0) {
                if (q[k] < 0.0) visible = false;
                continue;
            }
            const double r = q[k] / p[k];
            if (p[k] < 0.0) {
                if (r > t1) visible = false; else if (r > t0) t0 = r;
            } else {
                if (r < t0) visible = false; else if (r < t1) t1 = r;
            }
        }
        if (!visible) {
            flush();
            continue;
        }
        const ScreenPoint a = t0 == 0.0 ? points[i] : geom::make_screen_point(u0 + t0 * du, v0 + t0 * dv, screen);
        const ScreenPoint b =
            t1 == 1.0 ? points[i + 1] : geom::make_screen_point(u0 + t1 * du, v0 + t1 * dv, screen);
        if (run.empty() || t0 != 0.0) {
            flush();
            run.push_back(a);
        }
        run.push_back(b);
        if (t1 != 1.0) flush();
    }
    flush();
    return runs;
}

namespace {

class Composer {
public:
    Composer(const Board& board, const Viewer& viewer, DisplayList& out)
        : board_(board), screen_(board.screen()), style_(board.style()), viewer_(viewer), out_(out),
          half_w_(screen_.width / 2.0 + style_.clip_margin), half_h_(screen_.height / 2.0 + style_.clip_margin) {}

    void layer(const Layer& l) {
        std::visit([&](const auto& payload) { emit(l, payload); }, l.payload);
    }

private:
    bool inside(const ScreenPoint& p) const { return std::abs(p.u) <= half_w_ && std::abs(p.v) <= half_h_; }

    void polyline(const std::string& layer, std::span<const ScreenPoint> pts, Rgba color, double width,
                  double opacity) {
        for (auto& run : clip_polyline(pts, half_w_, half_h_, screen_)) {
            out_.primitives.push_back(Polyline{layer, std::move(run), color, width, opacity});
        }
    }

    // Projects a 3D point for this side's viewer; nullopt when it sits behind
    // the viewer.
    std::optional<geom::PlaneHit> project(const Vec3& p) const {
        const auto hit = geom::intersect_plane(viewer_, p, screen_);
        if (!(hit.t > 0.0)) return std::nullopt;
        return hit;
    }

    void emit(const Layer& l, const SlideContent&) {
        for (const ContentItem& item : board_.deck().current().items) {
            const auto hit = project(item.position);
            if (!hit || !inside(hit->point)) continue;
            const double w = item.width * hit->t;
            const double h = item.height * hit->t;
            switch (item.kind) {
            case ItemKind::text:
                out_.primitives.push_back(GlyphRun{l.id, item.text, hit->point, w, h, style_.slide_text, false});
                break;
            case ItemKind::sprite:
                out_.primitives.push_back(Sprite{l.id, item.sprite, hit->point, w, h, 1.0});
                break;
            case ItemKind::media_placeholder:
                out_.primitives.push_back(Sprite{l.id, "placeholder:" + item.sprite, hit->point, w, h, 1.0});
                break;
            }
        }
    }

    void emit(const Layer& l, const Stroke& s) {
        const bool own = out_.side == s.author_side;
        const Rgba color = out_.side == Side::front ? s.color_front : s.color_back;
        if (own) {
            polyline(l.id, s.points, color, style_.stroke_width, 1.0);
            return;
        }
        std::vector<ScreenPoint> mirrored;
        mirrored.reserve(s.points.size());
        for (const auto& p : s.points) mirrored.push_back(geom::mirror_u(p));
        polyline(l.id, mirrored, color, style_.stroke_width, 1.0);
    }

    void emit(const Layer& l, const TextNote& n) {
        const bool own = out_.side == n.author_side;
        const ScreenPoint c = own ? n.anchor : geom::mirror_u(n.anchor);
        if (!inside(c)) return;
        const Rgba color = out_.side == Side::front ? n.color_front : n.color_back;
        const double width = 0.6 * n.height * static_cast<double>(n.text.size());
        out_.primitives.push_back(GlyphRun{l.id, n.text, c, width, n.height, color, !own});
    }

    void emit(const Layer& l, const AvatarFigure& a) {
        for (const auto& [from, to] : tracking::avatar_bones()) {
            const auto p0 = project(a.pose[from]);
            const auto p1 = project(a.pose[to]);
            if (!p0 || !p1) continue;
            const ScreenPoint pts[] = {p0->point, p1->point};
            polyline(l.id, pts, style_.avatar, style_.avatar_line_width, a.opacity);
        }
    }

    void emit(const Layer& l, const Tag& t) {
        if (!inside(t.center)) return;
        out_.primitives.push_back(
            TagBillboard{l.id, t.student_id, t.name, t.metrics, t.center, t.width, t.height, t.praise_count});
    }

    void emit(const Layer& l, const ObjectGroup& g) {
        for (const ObjectSprite& s : g.sprites) {
            const auto hit = project(s.position);
            if (!hit || !inside(hit->point)) continue;
            out_.primitives.push_back(Sprite{l.id, s.ref, hit->point, s.width * hit->t, s.height * hit->t, 1.0});
        }
    }

    void emit(const Layer& l, const MediaPlaceholder& m) {
        const auto hit = project(m.position);
        if (!hit || !inside(hit->point)) return;
        out_.primitives.push_back(
            Sprite{l.id, "placeholder:" + m.name, hit->point, m.width * hit->t, m.height * hit->t, 1.0});
    }

    const Board& board_;
    const ScreenGeometry& screen_;
    const BoardStyle& style_;
    const Viewer& viewer_;
    DisplayList& out_;
    double half_w_;
    double half_h_;
};

Json point_json(const ScreenPoint& p) {
    return Json::array({p.u, p.v});
}

Json color_json(const Rgba& c) {
    return Json::array({c.r, c.g, c.b, c.a});
}

Json primitive_json(const Primitive& prim) {
    return std::visit(
        [](const auto& p) -> Json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GlyphRun>) {
                return {{"kind", "glyph_run"}, {"layer", p.layer},   {"text", p.text},
                        {"center", point_json(p.center)}, {"width", p.width}, {"height", p.height},
                        {"color", color_json(p.color)},   {"mirrored", p.mirrored}};
            } else if constexpr (std::is_same_v<T, Polyline>) {
                Json pts = Json::array();
                for (const auto& q : p.points) pts.push_back(point_json(q));
                return {{"kind", "polyline"}, {"layer", p.layer}, {"points", std::move(pts)},
                        {"color", color_json(p.color)}, {"width", p.width}, {"opacity", p.opacity}};
            } else if constexpr (std::is_same_v<T, Sprite>) {
                return {{"kind", "sprite"}, {"layer", p.layer},  {"ref", p.ref},
                        {"center", point_json(p.center)}, {"width", p.width}, {"height", p.height},
                        {"opacity", p.opacity}};
            } else {
                return {{"kind", "tag"},
                        {"layer", p.layer},
                        {"student_id", p.student_id},
                        {"name", p.name},
                        {"metrics", p.metrics},
                        {"center", point_json(p.center)},
                        {"width", p.width},
                        {"height", p.height},
                        {"praise_count", p.praise_count}};
            }
        },
        prim);
}

} // namespace

DisplayPair compose_display_lists(const Board& board, const ViewerPair& viewers) {
    if (viewers.front.side() != Side::front || viewers.back.side() != Side::back) {
        throw Error("InvalidArgument", "viewer pair sides are swapped");
    }
    DisplayPair out;
    out.front = DisplayList{Side::front, board.frame_id(), {}};
    out.back = DisplayList{Side::back, board.frame_id(), {}};

    std::vector<const Layer*> ordered;
    for (const Layer& l : board.layers()) ordered.push_back(&l);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Layer* a, const Layer* b) { return a->z_order < b->z_order; });

    Composer front(board, viewers.front, out.front);
    Composer back(board, viewers.back, out.back);
    for (const Layer* l : ordered) {
        try {
            if (l->visible_front) front.layer(*l);
            if (l->visible_back) back.layer(*l);
        } catch (const Error& e) {
            if (e.kind() == "DegenerateProjection") {
                throw Error("DegenerateProjection", "layer " + l->id + ": " + e.what());
            }
            throw;
        }
    }
    return out;
}

Json to_json(const DisplayList& list) {
    Json prims = Json::array();
    for (const Primitive& p : list.primitives) prims.push_back(primitive_json(p));
    return {{"side", geom::to_string(list.side)}, {"frame_id", list.frame_id}, {"primitives", std::move(prims)}};
}

std::string digest(const DisplayList& list) {
    Json content = to_json(list);
    content.erase("frame_id");
    return sha256_hex(content.dump());
}

} // namespace holo::scene
