#include <doctest.h>

#include "gen.hpp"
#include "holo/protocol.hpp"

using namespace holo::proto;
using holo::Json;

namespace {

std::string error_kind(const std::string& line) {
    try {
        decode(line);
    } catch (const holo::Error& e) {
        return e.kind();
    }
    return "ok";
}

} // namespace

TEST_CASE("canonical encoding sorts keys and ends with a newline") {
    Message m = make_message(MessageType::command, 7, {{"name", "next_slide"}, {"args", Json::object()}});
    CHECK(encode(m) == "{\"payload\":{\"args\":{},\"name\":\"next_slide\"},\"seq\":7,\"type\":\"command\"}\n");
    Message e = make_error(3, "SchemaViolation", "bad", "payload.role");
    CHECK(encode(e) ==
          "{\"payload\":{\"detail\":\"bad\",\"kind\":\"SchemaViolation\",\"where\":\"payload.role\"},\"seq\":3,"
          "\"type\":\"error\"}\n");
}

TEST_CASE("decode rejects malformed frames with the right kind") {
    CHECK(error_kind("") == "MalformedFrame");
    CHECK(error_kind("{") == "MalformedFrame");
    CHECK(error_kind("[1,2]") == "MalformedFrame");
    CHECK(error_kind("{\"type\":\"warp\",\"seq\":1,\"payload\":{}}") == "UnknownType");
    CHECK(error_kind("{\"type\":\"event\",\"seq\":-1,\"payload\":{\"kind\":\"x\"}}") == "SchemaViolation");
    CHECK(error_kind("{\"type\":\"event\",\"seq\":1,\"payload\":{}}") == "SchemaViolation");
    CHECK(error_kind("{\"type\":\"event\",\"seq\":1}") == "SchemaViolation");
    CHECK(error_kind(std::string(70, '[') + std::string(70, ']')) == "MalformedFrame");
    CHECK(error_kind("{\"type\":\"event\",\"seq\":1,\"payload\":{\"kind\":\"x\"}}\n") == "ok");
    CHECK(error_kind("{\"type\":\"event\",\"seq\":1,\"payload\":{\"kind\":\"x\"}}\r\n") == "ok");
    CHECK(error_kind(std::string(kMaxLineBytes + 1, ' ')) == "MalformedFrame");
}

TEST_CASE("schema violations name the field path") {
    const std::string line =
        R"({"type":"pose_update","seq":1,"payload":{"device_id":"d","role":"tail","timestamp_us":0,)"
        R"("position":{"x":0,"y":0,"z":0},"orientation":{"w":1,"x":0,"y":0,"z":0}}})";
    try {
        decode(line);
        FAIL("expected an error");
    } catch (const holo::LocatedError& e) {
        CHECK(e.kind() == "SchemaViolation");
        CHECK(e.where() == "payload.role");
    }
    const std::string cmd = R"({"type":"command","seq":1,"payload":{"name":"set_tool","args":{"tool":"hammer"}}})";
    try {
        decode(cmd);
        FAIL("expected an error");
    } catch (const holo::LocatedError& e) {
        CHECK(e.where() == "payload.args.tool");
    }
}

TEST_CASE("non-unit quaternions are rejected") {
    const std::string line =
        R"({"type":"pose_update","seq":1,"payload":{"device_id":"d","role":"head","timestamp_us":0,)"
        R"("position":{"x":0,"y":0,"z":0},"orientation":{"w":2,"x":0,"y":0,"z":0}}})";
    CHECK(error_kind(line) == "SchemaViolation");
}

TEST_CASE("unknown envelope keys and payload fields survive a round trip") {
    const std::string line =
        R"({"payload":{"args":{},"name":"next_slide","note":"hi"},"seq":2,"trace":{"id":5},"type":"command"})"
        "\n";
    const Message m = decode(line);
    CHECK(m.extensions["trace"]["id"] == 5);
    CHECK(encode(m) == line);
}

TEST_CASE("unencodable values") {
    Message m = make_message(MessageType::event, 1, {{"kind", "x"}, {"v", std::nan("")}});
    CHECK_THROWS_WITH_AS(encode(m), doctest::Contains("UnencodableValue"), holo::Error);
    m.payload = {{"kind", std::string("\xff\xfe")}};
    CHECK_THROWS_WITH_AS(encode(m), doctest::Contains("UnencodableValue"), holo::Error);
}

TEST_CASE("error details are sanitized to valid UTF-8") {
    const Message e = make_error(1, "MalformedFrame", std::string("bad \xff byte"));
    CHECK_NOTHROW(encode(e));
}

TEST_CASE("typed payloads round-trip") {
    gen::Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const auto p = gen::pose(rng);
        CHECK(parse_pose(to_payload(p)) == p);
        const auto c = gen::command(rng);
        CHECK(to_payload(parse_command(to_payload(c))) == to_payload(c));
        CHECK(command_name(parse_command(to_payload(c))) == command_name(c));
    }
    Hello h{1, "console", 42};
    const Hello back = parse_hello(to_payload(h));
    CHECK(back.version == 1);
    CHECK(back.client == "console");
    CHECK(back.clock_us == 42);
}

TEST_CASE("property: random messages round-trip to identical bytes") {
    gen::Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const Message m = gen::message(rng);
        const std::string bytes = encode(m);
        const Message d = decode(bytes);
        CHECK(encode(d) == bytes);
        CHECK(d.type == m.type);
        CHECK(d.seq == m.seq);
    }
}

TEST_CASE("property: mutated lines never crash the decoder") {
    gen::Rng rng(3);
    int rejected = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string line = encode(gen::message(rng));
        const int edits = static_cast<int>(gen::integer(rng, 1, 4));
        for (int k = 0; k < edits && !line.empty(); ++k) {
            const auto at = static_cast<std::size_t>(gen::integer(rng, 0, static_cast<std::int64_t>(line.size()) - 1));
            switch (gen::integer(rng, 0, 2)) {
            case 0: line[at] = static_cast<char>(gen::integer(rng, 0, 255)); break;
            case 1: line.erase(at, 1); break;
            default: line.insert(at, 1, "{}[]\",:\\"[gen::integer(rng, 0, 7)]); break;
            }
        }
        try {
            const Message m = decode(line);
            CHECK_NOTHROW(encode(m));
        } catch (const holo::Error& e) {
            ++rejected;
            const std::string k = e.kind();
            CHECK((k == "MalformedFrame" || k == "UnknownType" || k == "SchemaViolation" || k == "UnencodableValue"));
        }
    }
    CHECK(rejected > 0);
}
