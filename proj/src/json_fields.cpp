#include "holo/json_fields.hpp"

#include <cmath>
#include <limits>

namespace holo {

std::string FieldReader::child_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool FieldReader::has(std::string_view key) const {
    return node_->is_object() && node_->contains(key) && !node_->at(std::string(key)).is_null();
}

void FieldReader::fail(const std::string& detail) const {
    throw LocatedError(kind_, path_.empty() ? "<root>" : path_, detail);
}

void FieldReader::fail_at(std::string_view key, const std::string& detail) const {
    throw LocatedError(kind_, child_path(key), detail);
}

void FieldReader::expect_object() const {
    if (!node_->is_object()) fail("expected an object");
}

FieldReader FieldReader::child(std::string_view key) const {
    expect_object();
    const auto it = node_->find(key);
    if (it == node_->end()) fail_at(key, "missing field");
    return FieldReader(*it, child_path(key), kind_);
}

FieldReader FieldReader::element(std::size_t index) const {
    if (!node_->is_array() || index >= node_->size()) {
        fail("expected an array with element " + std::to_string(index));
    }
    return FieldReader((*node_)[index], path_ + "[" + std::to_string(index) + "]", kind_);
}

std::size_t FieldReader::array_size() const {
    if (!node_->is_array()) fail("expected an array");
    return node_->size();
}

double FieldReader::as_number() const {
    if (!node_->is_number()) fail("expected a number");
    const double v = node_->get<double>();
    if (!std::isfinite(v)) fail("number is not finite");
    return v;
}

double FieldReader::number(std::string_view key) const {
    return child(key).as_number();
}

double FieldReader::number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::int64_t FieldReader::integer(std::string_view key) const {
    const FieldReader c = child(key);
    const Json& n = c.node();
    if (n.is_number_integer()) {
        if (n.is_number_unsigned() && n.get<std::uint64_t>() >
                                          static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
            c.fail("integer out of range");
        }
        return n.get<std::int64_t>();
    }
    c.fail("expected an integer");
}

std::int64_t FieldReader::integer_or(std::string_view key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::string FieldReader::string(std::string_view key) const {
    const FieldReader c = child(key);
    if (!c.node().is_string()) c.fail("expected a string");
    return c.node().get<std::string>();
}

std::string FieldReader::string_or(std::string_view key, std::string fallback) const {
    return has(key) ? string(key) : fallback;
}

bool FieldReader::boolean_or(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const FieldReader c = child(key);
    if (!c.node().is_boolean()) c.fail("expected a boolean");
    return c.node().get<bool>();
}

geom::Vec3 FieldReader::vec3(std::string_view key) const {
    const FieldReader c = child(key);
    if (c.array_size() != 3) c.fail("expected [x, y, z]");
    return {c.element(0).as_number(), c.element(1).as_number(), c.element(2).as_number()};
}

geom::Vec3 FieldReader::vec3_or(std::string_view key, const geom::Vec3& fallback) const {
    return has(key) ? vec3(key) : fallback;
}

geom::Vec3 FieldReader::xyz(std::string_view key) const {
    const FieldReader c = child(key);
    return {c.number("x"), c.number("y"), c.number("z")};
}

} // namespace holo
