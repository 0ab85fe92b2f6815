#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "holo/error.hpp"
#include "holo/geometry.hpp"

namespace holo {

using Json = nlohmann::json;

// Typed access to JSON documents that reports failures as LocatedError with a
// dotted field path ("physics.gravity[1]"). The error kind is chosen by the
// caller: configs raise ConfigInvalid, wire messages SchemaViolation, etc.
class FieldReader {
public:
    FieldReader(const Json& node, std::string path, std::string error_kind)
        : node_(&node), path_(std::move(path)), kind_(std::move(error_kind)) {}

    const Json& node() const { return *node_; }
    const std::string& path() const { return path_; }

    bool has(std::string_view key) const;
    FieldReader child(std::string_view key) const;
    FieldReader element(std::size_t index) const;

    [[noreturn]] void fail(const std::string& detail) const;
    [[noreturn]] void fail_at(std::string_view key, const std::string& detail) const;

    void expect_object() const;
    std::size_t array_size() const;

    double number(std::string_view key) const;
    double number_or(std::string_view key, double fallback) const;
    std::int64_t integer(std::string_view key) const;
    std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
    std::string string(std::string_view key) const;
    std::string string_or(std::string_view key, std::string fallback) const;
    bool boolean_or(std::string_view key, bool fallback) const;

    // [x, y, z] array of finite numbers.
    geom::Vec3 vec3(std::string_view key) const;
    geom::Vec3 vec3_or(std::string_view key, const geom::Vec3& fallback) const;
    // {"x":..,"y":..,"z":..} object of finite numbers.
    geom::Vec3 xyz(std::string_view key) const;

    // Value of this node itself.
    double as_number() const;

private:
    std::string child_path(std::string_view key) const;

    const Json* node_;
    std::string path_;
    std::string kind_;
};

inline Json vec3_array(const geom::Vec3& v) { return Json::array({v.x, v.y, v.z}); }
inline Json vec3_object(const geom::Vec3& v) { return Json{{"x", v.x}, {"y", v.y}, {"z", v.z}}; }

} // namespace holo
