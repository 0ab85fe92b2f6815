#include "holo/geometry.hpp"

#include <string>

namespace holo::geom {

std::optional<Vec3> normalized(const Vec3& v, double min_length) {
    const double n = norm(v);
    if (!(n > min_length)) {
        return std::nullopt;
    }
    return v / n;
}

std::string_view to_string(Side side) {
    return side == Side::front ? "front" : "back";
}

Side side_from_string(std::string_view name) {
    if (name == "front") return Side::front;
    if (name == "back") return Side::back;
    throw Error("InvalidSide", "expected \"front\" or \"back\", got \"" + std::string(name) + "\"");
}

void validate(const ScreenGeometry& screen) {
    if (!(std::isfinite(screen.width) && screen.width > 0.0)) {
        throw Error("InvalidScreen", "width must be positive");
    }
    if (!(std::isfinite(screen.height) && screen.height > 0.0)) {
        throw Error("InvalidScreen", "height must be positive");
    }
}

ScreenPoint make_screen_point(double u, double v, const ScreenGeometry& screen) {
    return {u, v, screen.contains(u, v)};
}

Viewer::Viewer(const Vec3& eye, Side side) : eye_(eye), side_(side) {
    if (!is_finite(eye)) {
        throw Error("InvalidViewer", "eye position is not finite");
    }
    if (eye.z == 0.0) {
        throw Error("InvalidViewer", "eye lies on the board plane");
    }
    if (side_of(eye.z) != side) {
        throw Error("InvalidViewer", "eye z sign does not match side " + std::string(to_string(side)));
    }
}

Viewer Viewer::at(const Vec3& eye) {
    return Viewer(eye, side_of(eye.z));
}

PlaneHit intersect_plane(const Viewer& viewer, const Vec3& p, const ScreenGeometry& screen) {
    const Vec3& eye = viewer.eye();
    const double dz = eye.z - p.z;
    if (!(std::abs(dz) > kDegenerateEpsilon)) {
        throw Error("DegenerateProjection", "ray from eye to point is parallel to the board");
    }
    const double t = eye.z / dz;
    const double u = eye.x + t * (p.x - eye.x);
    const double v = eye.y + t * (p.y - eye.y);
    if (!(std::isfinite(t) && std::isfinite(u) && std::isfinite(v))) {
        throw Error("DegenerateProjection", "projection is not finite");
    }
    return {make_screen_point(u, v, screen), t};
}

Viewer default_viewer(Side side, const ViewerSpots& spots) {
    return Viewer(side == Side::front ? spots.front_eye : spots.back_eye, side);
}

} // namespace holo::geom
