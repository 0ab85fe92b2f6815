#pragma once

#include <stdexcept>
#include <string>

namespace holo {

// Every failure the library reports carries a stable kind name, e.g.
// "DegenerateProjection" or "SchemaViolation". The kind is what tests and
// wire error messages key on; what() carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)), detail_(detail) {}

    const std::string& kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string kind_;
    std::string detail_;
};

// Errors that point at a location in an input document (config field path,
// file:line) keep that location separately so callers can surface it.
class LocatedError : public Error {
public:
    LocatedError(std::string kind, std::string where, const std::string& detail)
        : Error(std::move(kind), where + ": " + detail), where_(std::move(where)), bare_(detail) {}

    const std::string& where() const noexcept { return where_; }
    // The detail without the location prefix.
    const std::string& bare_detail() const noexcept { return bare_; }

private:
    std::string where_;
    std::string bare_;
};

// Detail of `inner` for wrapping in an error of `outer_kind`: its kind only
// when it differs, its location only when `with_where`.
inline std::string nested_detail(const Error& inner, const std::string& outer_kind, bool with_where = true) {
    std::string out = inner.kind() == outer_kind ? "" : inner.kind() + ": ";
    if (const auto* located = dynamic_cast<const LocatedError*>(&inner)) {
        if (with_where) out += located->where() + ": ";
        return out + located->bare_detail();
    }
    return out + inner.detail();
}

} // namespace holo
