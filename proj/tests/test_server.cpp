#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <filesystem>
#include <fstream>
#include <thread>

#include "holo/bounded_queue.hpp"
#include "holo/protocol.hpp"
#include "holo/server.hpp"
#include "holo/simulate.hpp"

using namespace holo;
namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

namespace {

EngineConfig small_deck() {
    EngineConfig cfg;
    cfg.deck = scene::SlideDeck({scene::Slide{"a", {}}, scene::Slide{"b", {}}});
    return cfg;
}

struct RawClient {
    asio::io_context io;
    tcp::socket socket{io};
    asio::streambuf buf;

    explicit RawClient(int port) { socket.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(port)}); }

    proto::Message read() {
        asio::read_until(socket, buf, '\n');
        std::istream in(&buf);
        std::string line;
        std::getline(in, line);
        return proto::decode(line);
    }
    void send(const proto::Message& m) { asio::write(socket, asio::buffer(proto::encode(m))); }
    void send_raw(const std::string& s) { asio::write(socket, asio::buffer(s)); }
};

template <typename Read, typename Pred>
proto::Message read_until(Read&& read, Pred&& pred, int limit = 600) {
    for (int i = 0; i < limit; ++i) {
        proto::Message m = read();
        if (pred(m)) return m;
    }
    FAIL("expected message never arrived");
    return {};
}

} // namespace

TEST_CASE("raw TCP clients get a hello, snapshots and command effects") {
    Server server(small_deck(), ServerOptions{.port = 0});
    server.start();
    REQUIRE(server.port() > 0);
    {
        RawClient c(server.port());
        // Speaking first skips the sniffing delay.
        c.send(proto::make_message(proto::MessageType::hello, 1, {{"version", proto::kProtocolVersion}}));
        CHECK(c.read().type == proto::MessageType::hello);
        c.send(proto::make_message(proto::MessageType::command, 2, {{"name", "next_slide"}}));
        const auto snap = read_until([&] { return c.read(); }, [](const proto::Message& m) {
            return m.type == proto::MessageType::state_snapshot && m.payload["slide"]["index"] == 1;
        });
        CHECK(snap.payload["slide"]["title"] == "b");

        c.send_raw("this is not json\n");
        const auto err = read_until([&] { return c.read(); },
                                    [](const proto::Message& m) { return m.type == proto::MessageType::error; });
        CHECK(err.payload["kind"] == "MalformedFrame");
    }
    server.stop();
    server.wait();
}

TEST_CASE("WebSocket clients on /ws share the same session") {
    Server server(small_deck(), ServerOptions{.port = 0});
    server.start();
    {
        asio::io_context io;
        beast::websocket::stream<tcp::socket> ws(io);
        ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(server.port())});
        ws.handshake("127.0.0.1", "/ws");
        auto read = [&] {
            beast::flat_buffer b;
            ws.read(b);
            std::string text = beast::buffers_to_string(b.data());
            CHECK(text.back() == '\n');
            return proto::decode(text);
        };
        CHECK(read().type == proto::MessageType::hello);

        RawClient raw(server.port());
        raw.send(proto::make_message(proto::MessageType::command, 1, {{"name", "next_slide"}}));
        read_until(read, [](const proto::Message& m) {
            return m.type == proto::MessageType::state_snapshot && m.payload["slide"]["index"] == 1;
        });

        ws.text(true);
        ws.write(asio::buffer(proto::encode(proto::make_message(proto::MessageType::command, 1, {{"name", "prev_slide"}}))));
        read_until(read, [](const proto::Message& m) {
            return m.type == proto::MessageType::state_snapshot && m.payload["slide"]["index"] == 0;
        });
        ws.close(beast::websocket::close_code::normal);
    }
    server.stop();
    server.wait();
}

TEST_CASE("plain HTTP requests get 404") {
    Server server(EngineConfig{}, ServerOptions{.port = 0});
    server.start();
    for (const char* target : {"/", "/other"}) {
        asio::io_context io;
        tcp::socket s(io);
        s.connect({asio::ip::make_address("127.0.0.1"), static_cast<unsigned short>(server.port())});
        beast::http::request<beast::http::empty_body> req(beast::http::verb::get, target, 11);
        req.set(beast::http::field::host, "localhost");
        beast::http::write(s, req);
        beast::flat_buffer b;
        beast::http::response<beast::http::string_body> res;
        beast::http::read(s, b, res);
        CHECK(res.result() == beast::http::status::not_found);
    }
    server.stop();
    server.wait();
}

TEST_CASE("a bound port is reported as PortInUse") {
    Server first(EngineConfig{}, ServerOptions{.port = 0});
    first.start();
    Server second(EngineConfig{}, ServerOptions{.port = first.port()});
    try {
        second.start();
        FAIL("second server bound the same port");
    } catch (const Error& e) {
        CHECK(e.kind() == "PortInUse");
    }
    first.stop();
    first.wait();
}

TEST_CASE("recorded sessions replay as scripts") {
    const auto dir = std::filesystem::temp_directory_path() / "holo_server_test";
    std::filesystem::create_directories(dir);
    {
        Server server(small_deck(), ServerOptions{.port = 0, .record_path = dir / "rec.jsonl", .events_path = dir / "ev.jsonl"});
        server.start();
        {
            RawClient c(server.port());
            c.send(proto::make_message(proto::MessageType::command, 1, {{"name", "next_slide"}}));
            read_until([&] { return c.read(); }, [](const proto::Message& m) {
                return m.type == proto::MessageType::event && m.payload["kind"] == "slide_changed";
            });
        }
        server.stop();
        server.wait();
    }
    const ScenarioScript script = load_script(dir / "rec.jsonl");
    REQUIRE(script.entries.size() == 1);
    const SimulationResult r = run_simulation(small_deck(), script);
    CHECK(r.final_snapshot.payload["slide"]["index"] == 1);
    std::ifstream ev(dir / "ev.jsonl");
    std::string first;
    std::getline(ev, first);
    CHECK(first.find("slide_changed") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("outboxes drop the oldest entry when full") {
    BoundedQueue<int> q(3);
    for (int i = 0; i < 3; ++i) CHECK_FALSE(q.push(i));
    CHECK(q.push(3));
    CHECK(q.push(4));
    CHECK(q.dropped_total() == 2);
    CHECK(*q.pop() == 2);
    CHECK(*q.pop() == 3);
    CHECK(*q.pop() == 4);
    CHECK_FALSE(q.pop().has_value());
}

TEST_CASE("a client that never reads does not stall others") {
    EngineConfig cfg = small_deck();
    cfg.outbox_capacity = 4;
    Server server(cfg, ServerOptions{.port = 0});
    server.start();
    {
        RawClient stuck(server.port());
        stuck.send_raw("\n");
        stuck.socket.set_option(asio::socket_base::receive_buffer_size(1024));
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
        RawClient live(server.port());
        live.send(proto::make_message(proto::MessageType::command, 1, {{"name", "next_slide"}}));
        const auto start = std::chrono::steady_clock::now();
        read_until([&] { return live.read(); }, [](const proto::Message& m) {
            return m.type == proto::MessageType::state_snapshot && m.payload["slide"]["index"] == 1;
        });
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(2));
    }
    server.stop();
    server.wait();
}
