#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "holo/error.hpp"

// Classroom frame: origin at the screen center, x to the right as seen by the
// audience, y up, z toward the audience. The board occupies the plane z = 0.
namespace holo::geom {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}
// Returns nullopt for vectors shorter than `min_length`.
std::optional<Vec3> normalized(const Vec3& v, double min_length = 1e-12);

enum class Side { front, back };

std::string_view to_string(Side side);
Side side_from_string(std::string_view name);
constexpr Side opposite(Side side) { return side == Side::front ? Side::back : Side::front; }
// +1 for the audience half-space, -1 for the stage.
constexpr double side_sign(Side side) { return side == Side::front ? 1.0 : -1.0; }
// Side of the half-space containing z; z == 0 counts as front.
constexpr Side side_of(double z) { return z < 0.0 ? Side::back : Side::front; }

struct ScreenGeometry {
    double width = 4.0;
    double height = 3.0;

    bool contains(double u, double v) const {
        return std::abs(u) <= width / 2.0 && std::abs(v) <= height / 2.0;
    }
};

// Throws Error("InvalidScreen") unless width and height are positive and finite.
void validate(const ScreenGeometry& screen);

struct ScreenPoint {
    double u = 0.0;
    double v = 0.0;
    bool on_screen = false;

    bool operator==(const ScreenPoint&) const = default;
};

ScreenPoint make_screen_point(double u, double v, const ScreenGeometry& screen);

class Viewer {
public:
    // Throws Error("InvalidViewer") when eye.z == 0, the eye is not finite, or
    // `side` disagrees with the half-space the eye is in.
    Viewer(const Vec3& eye, Side side);

    // Side inferred from the sign of eye.z.
    static Viewer at(const Vec3& eye);

    const Vec3& eye() const { return eye_; }
    Side side() const { return side_; }

    bool operator==(const Viewer&) const = default;

private:
    Vec3 eye_;
    Side side_;
};

// Fixed "best spot" viewing positions for each side of the board.
struct ViewerSpots {
    Vec3 front_eye{0.0, 1.2, 5.0};
    Vec3 back_eye{0.0, 1.6, -2.0};
};

inline constexpr double kDegenerateEpsilon = 1e-6;

// Intersection of the ray eye -> p with the board plane. `t` is the ray
// parameter: the hit point is eye + t * (p - eye). t in (0, 1] means p lies
// behind (or on) the plane as seen from the eye, t > 1 means p floats between
// the eye and the plane, t <= 0 means p is behind the viewer.
struct PlaneHit {
    ScreenPoint point;
    double t = 0.0;
};

// Throws Error("DegenerateProjection") when |eye.z - p.z| <= kDegenerateEpsilon
// or the result is not finite.
PlaneHit intersect_plane(const Viewer& viewer, const Vec3& p, const ScreenGeometry& screen);

inline ScreenPoint project_point(const Viewer& viewer, const Vec3& p, const ScreenGeometry& screen) {
    return intersect_plane(viewer, p, screen).point;
}

constexpr ScreenPoint mirror_u(const ScreenPoint& sp) { return {-sp.u, sp.v, sp.on_screen}; }

Viewer default_viewer(Side side, const ViewerSpots& spots);

} // namespace holo::geom
