#include <doctest.h>

#include <random>

#include "holo/geometry.hpp"

using namespace holo::geom;

TEST_CASE("projection of a point behind the board lands on the eye ray") {
    const Viewer front = Viewer::at({0.0, 1.2, 5.0});
    const Vec3 p{1.0, 0.5, -1.0};
    const PlaneHit hit = intersect_plane(front, p, ScreenGeometry{});
    // t = 5 / 6 by similar triangles
    CHECK(hit.t == doctest::Approx(5.0 / 6.0));
    CHECK(hit.point.u == doctest::Approx(5.0 / 6.0));
    CHECK(hit.point.v == doctest::Approx(1.2 + 5.0 / 6.0 * (0.5 - 1.2)));
    CHECK(hit.point.on_screen);
}

TEST_CASE("a point on the board projects to itself from either side") {
    const Vec3 p{-0.7, 0.3, 0.0};
    for (const Vec3& eye : {Vec3{0, 1.2, 5}, Vec3{0.4, 1.6, -2}}) {
        const ScreenPoint sp = project_point(Viewer::at(eye), p, ScreenGeometry{});
        CHECK(sp.u == doctest::Approx(p.x));
        CHECK(sp.v == doctest::Approx(p.y));
    }
}

TEST_CASE("degenerate projections are rejected") {
    const Viewer v = Viewer::at({0, 1, 2});
    CHECK_THROWS_WITH_AS(intersect_plane(v, {1, 1, 2}, {}), doctest::Contains("DegenerateProjection"), holo::Error);
    CHECK_THROWS_AS(intersect_plane(v, {1, 1, 2 + 5e-7}, {}), holo::Error);
    CHECK_NOTHROW(intersect_plane(v, {1, 1, 2 + 1e-5}, {}));
}

TEST_CASE("viewer validation") {
    CHECK_THROWS_AS(Viewer({0, 0, 0}, Side::front), holo::Error);
    CHECK_THROWS_AS(Viewer({0, 0, -1}, Side::front), holo::Error);
    CHECK_THROWS_AS(Viewer({0, NAN, 1}, Side::front), holo::Error);
    CHECK(Viewer::at({0, 0, -1}).side() == Side::back);
    CHECK(default_viewer(Side::back, ViewerSpots{}).eye() == Vec3{0.0, 1.6, -2.0});
}

TEST_CASE("screen bounds and validation") {
    const ScreenGeometry s{4, 3};
    CHECK(s.contains(2.0, 1.5));
    CHECK_FALSE(s.contains(2.0001, 0));
    CHECK_THROWS_AS(validate(ScreenGeometry{-4, 3}), holo::Error);
    CHECK_THROWS_AS(validate(ScreenGeometry{4, INFINITY}), holo::Error);
}

TEST_CASE("mirror_u is an involution") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const ScreenPoint p{d(rng), d(rng), i % 2 == 0};
        CHECK(mirror_u(mirror_u(p)) == p);
        CHECK(mirror_u(p).u == -p.u);
    }
}

TEST_CASE("sides") {
    CHECK(side_of(0.0) == Side::front);
    CHECK(side_of(-1e-12) == Side::back);
    CHECK(opposite(Side::front) == Side::back);
    CHECK(side_from_string("back") == Side::back);
    CHECK_THROWS_AS(side_from_string("left"), holo::Error);
    CHECK_FALSE(normalized({0, 0, 0}).has_value());
    CHECK(norm(*normalized({3, 4, 0})) == doctest::Approx(1.0));
}

TEST_CASE("property: projected point, eye and source are collinear and on the plane") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> xy(-3, 3), ez(0.5, 8), pz(-4, 4);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 eye{xy(rng), xy(rng), (i % 2 ? 1 : -1) * ez(rng)};
        const Vec3 p{xy(rng), xy(rng), pz(rng)};
        if (std::abs(eye.z - p.z) <= kDegenerateEpsilon) continue;
        const PlaneHit h = intersect_plane(Viewer::at(eye), p, {});
        const Vec3 q{h.point.u, h.point.v, 0.0};
        const Vec3 c = cross(p - eye, q - eye);
        CHECK(norm(c) <= 1e-9 * std::max(1.0, norm(p - eye) * norm(q - eye)));
    }
}
