#include <doctest.h>

#include "holo/scene.hpp"

using namespace holo::scene;
using holo::geom::Side;
using holo::geom::Vec3;
using holo::geom::Viewer;

namespace {

ViewerPair default_viewers() {
    return {Viewer::at({0.0, 1.2, 5.0}), Viewer::at({0.0, 1.6, -2.0})};
}

holo::tracking::Pose device(const std::string& id, Vec3 p) {
    holo::tracking::Pose x;
    x.device_id = id;
    x.role = holo::tracking::Role::right_hand;
    x.position = p;
    return x;
}

template <typename T>
std::vector<T> of_type(const DisplayList& l) {
    std::vector<T> out;
    for (const auto& p : l.primitives) {
        if (const auto* t = std::get_if<T>(&p)) out.push_back(*t);
    }
    return out;
}

SlideDeck three_slides() {
    return SlideDeck({Slide{"one", {}}, Slide{"two", {}}, Slide{"three", {}}});
}

} // namespace

TEST_CASE("deck navigation clamps at both ends") {
    SlideDeck d = three_slides();
    auto r = navigate(d, Direction::previous);
    CHECK(r.boundary_hit);
    CHECK(r.deck.current_index() == 0);
    r = navigate(navigate(navigate(d, Direction::next).deck, Direction::next).deck, Direction::next);
    CHECK(r.boundary_hit);
    CHECK(r.deck.current_index() == 2);
    CHECK(SlideDeck().size() == 1);
}

TEST_CASE("deck parsing reports field paths") {
    const auto ok = parse_deck(holo::Json::parse(R"({"slides":[{"title":"a","items":[
        {"id":"t","kind":"text","position":[0,0,0],"text":"hi"}]}]})"));
    CHECK(ok.size() == 1);
    CHECK(ok.current().items.at(0).text == "hi");
    try {
        parse_deck(holo::Json::parse(R"({"slides":[{"items":[{"id":"t","kind":"blob","position":[0,0,0]}]}]})"));
        FAIL("expected DeckInvalid");
    } catch (const holo::LocatedError& e) {
        CHECK(e.kind() == "DeckInvalid");
        CHECK(e.where() == "slides[0].items[0].kind");
    }
    CHECK_THROWS_AS(parse_deck(holo::Json::parse(R"({"slides":[]})")), holo::LocatedError);
}

TEST_CASE("ink is faint on the author's side and bright and mirrored on the other") {
    Board b;
    b.begin_writing("pen", Side::back);
    b.add_stroke_point(device("pen", {0.5, 0.2, -0.01}));
    b.add_stroke_point(device("pen", {0.8, 0.3, -0.01}));
    b.end_writing("pen");
    const DisplayPair d = compose_display_lists(b, default_viewers());
    const auto back = of_type<Polyline>(d.back);
    const auto front = of_type<Polyline>(d.front);
    REQUIRE(back.size() == 1);
    REQUIRE(front.size() == 1);
    CHECK(back[0].color == b.style().ink_faint);
    CHECK(front[0].color == b.style().ink_bright);
    CHECK(back[0].points[0].u == doctest::Approx(0.5));
    CHECK(front[0].points[0].u == doctest::Approx(-0.5));
    CHECK(front[0].points[0].v == back[0].points[0].v);
}

TEST_CASE("writing requires writing mode and short strokes are dropped") {
    Board b;
    CHECK_THROWS_WITH_AS(b.add_stroke_point(device("pen", {0, 0, 0})), doctest::Contains("NotInWritingMode"),
                         holo::Error);
    b.begin_writing("pen", Side::front);
    b.add_stroke_point(device("pen", {0, 0, 0}));
    b.add_stroke_point(device("pen", {0, 0, 0}));  // exact repeat, skipped
    REQUIRE(b.active_stroke("pen") != nullptr);
    CHECK(b.active_stroke("pen")->points.size() == 1);
    b.end_writing("pen");
    CHECK_FALSE(b.is_writing("pen"));
    CHECK(b.layers().size() == 1);  // only the slide layer
}

TEST_CASE("text notes mirror glyphs on the far side") {
    Board b;
    b.add_text_note(Side::back, "Hi", holo::geom::make_screen_point(1.0, 0.5, b.screen()), 0.15);
    const DisplayPair d = compose_display_lists(b, default_viewers());
    const auto back = of_type<GlyphRun>(d.back);
    const auto front = of_type<GlyphRun>(d.front);
    REQUIRE(back.size() == 1);
    REQUIRE(front.size() == 1);
    CHECK_FALSE(back[0].mirrored);
    CHECK(front[0].mirrored);
    CHECK(front[0].center.u == doctest::Approx(-1.0));
    b.clear_ink();
    CHECK(of_type<GlyphRun>(compose_display_lists(b, default_viewers()).front).empty());
}

TEST_CASE("afterimage opacities decay geometrically to a floor") {
    Board b;
    holo::tracking::AvatarPose pose;
    CHECK_THROWS_WITH_AS(b.freeze_afterimage(pose), doctest::Contains("RolePlayInactive"), holo::Error);
    b.set_role_play(true);
    for (int i = 0; i < 8; ++i) b.freeze_afterimage(pose);
    const auto o = b.afterimage_opacities();
    REQUIRE(o.size() == 8);
    CHECK(o[0] == doctest::Approx(1.0));
    CHECK(o[1] == doctest::Approx(0.7));
    CHECK(o[2] == doctest::Approx(0.49));
    for (std::size_t i = 1; i < o.size(); ++i) {
        CHECK(o[i] <= o[i - 1]);
        CHECK(o[i] >= 0.15);
    }
    CHECK(o[7] == doctest::Approx(0.15));
    b.clear_afterimages();
    CHECK(b.afterimage_opacities().empty());
}

TEST_CASE("dashboard tags stack instead of overlapping and praise picks the nearest") {
    Board b;
    const Viewer teacher = Viewer::at({0.0, 1.6, -2.0});
    std::vector<StudentInfo> s = {{"s1", "Ann", {0.0, 1.0, 3.0}, {{"focus", 0.8}}},
                                  {"s2", "Bo", {0.02, 1.0, 3.0}, {}},
                                  {"s3", "Cy", {1.5, 1.0, 3.0}, {}}};
    CHECK_THROWS_AS(b.update_dashboard(s, Viewer::at({0, 1, 5})), holo::Error);
    b.update_dashboard(s, teacher);
    const auto tags = b.tags();
    REQUIRE(tags.size() == 3);
    const Tag& t1 = tags[0];
    const Tag& t2 = tags[1];
    CHECK(t1.student_id == "s1");
    CHECK(t2.center.v >= t1.center.v + t1.height - 1e-12);
    const auto hit = b.apply_praise(t1.center, 0.05, 10);
    REQUIRE(hit.has_value());
    CHECK(hit->student_id == "s1");
    CHECK(hit->praise_count == 1);
    CHECK_FALSE(b.apply_praise(holo::geom::make_screen_point(-1.9, -1.4, b.screen()), 0.05, 11).has_value());
}

TEST_CASE("slide sprites are projected per viewer") {
    Slide s{"s", {ContentItem{"sun", ItemKind::sprite, {0.5, 0.5, -1.0}, 0.5, 0.5, "", "sun"}}};
    Board b({}, {}, SlideDeck({s}));
    const DisplayPair d = compose_display_lists(b, default_viewers());
    const auto f = of_type<Sprite>(d.front);
    const auto k = of_type<Sprite>(d.back);
    REQUIRE(f.size() == 1);
    REQUIRE(k.size() == 1);
    // Behind the board the sprite shrinks toward the front eye, grows toward the back eye.
    CHECK(f[0].width < 0.5);
    CHECK(k[0].width > 0.5);
    CHECK(f[0].center.u == doctest::Approx(0.5 * 5.0 / 6.0));
    CHECK(k[0].center.u == doctest::Approx(1.0));
    CHECK(k[0].center.v == doctest::Approx(-0.6));
}

TEST_CASE("digests are stable and sensitive to content") {
    Board b;
    const DisplayPair d1 = compose_display_lists(b, default_viewers());
    const DisplayPair d2 = compose_display_lists(b, default_viewers());
    CHECK(digest(d1.front) == digest(d2.front));
    CHECK(digest(d1.front).size() == 64);
    b.add_text_note(Side::front, "x", holo::geom::make_screen_point(0, 0, b.screen()), 0.1);
    CHECK(digest(compose_display_lists(b, default_viewers()).front) != digest(d1.front));
}

TEST_CASE("polyline clipping") {
    const holo::geom::ScreenGeometry g;
    using holo::geom::make_screen_point;
    const std::vector<holo::geom::ScreenPoint> line = {make_screen_point(-3, 0, g), make_screen_point(3, 0, g)};
    const auto runs = clip_polyline(line, 2.0, 1.5, g);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].front().u == doctest::Approx(-2.0));
    CHECK(runs[0].back().u == doctest::Approx(2.0));
    const std::vector<holo::geom::ScreenPoint> outside = {make_screen_point(-3, 2, g), make_screen_point(3, 2, g)};
    CHECK(clip_polyline(outside, 2.0, 1.5, g).empty());
}

TEST_CASE("object layers and style validation") {
    Board b;
    b.set_objects("ball", 25, ObjectGroup{{ObjectSprite{"ball", {0, 0, 1}, 0.1, 0.1}}});
    CHECK(b.find_layer("object-ball") != nullptr);
    b.set_objects("ball", 25, ObjectGroup{});
    CHECK(b.find_layer("object-ball") == nullptr);
    BoardStyle bad;
    bad.afterimage_decay = 1.0;
    CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("InvalidStyle"), holo::Error);
}

TEST_CASE("a sprite at the eye depth cannot be composed") {
    Slide s{"s", {ContentItem{"x", ItemKind::sprite, {0.0, 0.0, 5.0}, 0.5, 0.5, "", "x"}}};
    Board b({}, {}, SlideDeck({s}));
    CHECK_THROWS_WITH_AS(compose_display_lists(b, default_viewers()), doctest::Contains("DegenerateProjection"),
                         holo::Error);
}
