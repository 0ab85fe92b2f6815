#include "holo/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "holo/bounded_queue.hpp"
#include "holo/session.hpp"
#include "holo/simulate.hpp"

namespace holo {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Bytes = std::shared_ptr<const std::string>;

namespace {

constexpr auto kSniffTimeout = std::chrono::milliseconds(250);
constexpr auto kSniffRetry = std::chrono::milliseconds(5);

} // namespace

struct Server::Impl {
    // -----------------------------------------------------------------------
    class Connection : public std::enable_shared_from_this<Connection> {
    public:
        Connection(Impl& owner, std::string id, std::size_t capacity)
            : owner_(owner), id_(std::move(id)), outbox_(capacity) {}
        virtual ~Connection() = default;

        const std::string& id() const { return id_; }

        void send(Bytes bytes) {
            if (closed_) return;
            if (outbox_.push(std::move(bytes))) {
                spdlog::debug("event=outbox_drop connection={} dropped_total={}", id_, outbox_.dropped_total());
            }
            if (!writing_) write_next();
        }

        virtual void start() = 0;
        virtual void close() = 0;

    protected:
        virtual void async_send(const std::string& bytes, std::function<void(beast::error_code)> done) = 0;

        void write_next() {
            auto next = outbox_.pop();
            if (!next) {
                writing_ = false;
                return;
            }
            writing_ = true;
            in_flight_ = std::move(*next);
            async_send(*in_flight_, [self = shared_from_this()](beast::error_code ec) {
                self->in_flight_.reset();
                if (ec) {
                    self->finish(ec);
                    return;
                }
                self->write_next();
            });
        }

        void handle_text(std::string_view text) {
            line_buf_.append(text);
            std::size_t pos;
            while ((pos = line_buf_.find('\n')) != std::string::npos) {
                owner_.on_line(id_, std::string_view(line_buf_).substr(0, pos));
                line_buf_.erase(0, pos + 1);
            }
            if (line_buf_.size() > proto::kMaxLineBytes) {
                owner_.on_line(id_, line_buf_);
                line_buf_.clear();
            }
        }

        void finish(beast::error_code ec) {
            if (closed_) return;
            closed_ = true;
            if (ec && ec != asio::error::eof && ec != websocket::error::closed &&
                ec != asio::error::operation_aborted) {
                spdlog::info("event=disconnect connection={} reason=\"{}\"", id_, ec.message());
            } else {
                spdlog::info("event=disconnect connection={}", id_);
            }
            close();
            owner_.on_closed(id_);
        }

        Impl& owner_;
        std::string id_;
        BoundedQueue<Bytes> outbox_;
        Bytes in_flight_;
        bool writing_ = false;
        bool closed_ = false;
        std::string line_buf_;
    };

    class RawConnection : public Connection {
    public:
        RawConnection(Impl& owner, std::string id, std::size_t capacity, tcp::socket socket)
            : Connection(owner, std::move(id), capacity), socket_(std::move(socket)) {}

        void start() override { read(); }

        void close() override {
            beast::error_code ignored;
            socket_.shutdown(tcp::socket::shutdown_both, ignored);
            socket_.close(ignored);
        }

    private:
        void read() {
            socket_.async_read_some(asio::buffer(chunk_),
                                    [self = std::static_pointer_cast<RawConnection>(shared_from_this())](
                                        beast::error_code ec, std::size_t n) {
                                        if (ec) {
                                            self->finish(ec);
                                            return;
                                        }
                                        self->handle_text(std::string_view(self->chunk_.data(), n));
                                        self->read();
                                    });
        }

        void async_send(const std::string& bytes, std::function<void(beast::error_code)> done) override {
            asio::async_write(socket_, asio::buffer(bytes),
                              [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
        }

        tcp::socket socket_;
        std::array<char, 4096> chunk_{};
    };

    class WsConnection : public Connection {
    public:
        WsConnection(Impl& owner, std::string id, std::size_t capacity, websocket::stream<tcp::socket> ws)
            : Connection(owner, std::move(id), capacity), ws_(std::move(ws)) {
            ws_.text(true);
            ws_.read_message_max(proto::kMaxLineBytes);
        }

        void start() override { read(); }

        void close() override {
            beast::error_code ignored;
            ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
            ws_.next_layer().close(ignored);
        }

    private:
        void read() {
            ws_.async_read(buffer_, [self = std::static_pointer_cast<WsConnection>(shared_from_this())](
                                        beast::error_code ec, std::size_t) {
                if (ec) {
                    self->finish(ec);
                    return;
                }
                std::string text = beast::buffers_to_string(self->buffer_.data());
                self->buffer_.consume(self->buffer_.size());
                if (text.empty() || text.back() != '\n') text.push_back('\n');
                self->handle_text(text);
                self->read();
            });
        }

        void async_send(const std::string& bytes, std::function<void(beast::error_code)> done) override {
            ws_.async_write(asio::buffer(bytes),
                            [done = std::move(done)](beast::error_code ec, std::size_t) { done(ec); });
        }

        websocket::stream<tcp::socket> ws_;
        beast::flat_buffer buffer_;
    };

    // Decides between the raw line protocol and an HTTP/WebSocket upgrade by
    // peeking at the first bytes. Silent clients fall back to raw after a
    // short timeout so passive listeners still receive snapshots.
    class Sniffer : public std::enable_shared_from_this<Sniffer> {
    public:
        Sniffer(Impl& owner, tcp::socket socket)
            : owner_(owner), socket_(std::move(socket)), timer_(socket_.get_executor()) {}

        void start() {
            timer_.expires_after(kSniffTimeout);
            timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
                if (ec || self->decided_) return;
                self->decided_ = true;
                beast::error_code ignored;
                self->socket_.cancel(ignored);
                self->owner_.adopt_raw(std::move(self->socket_));
            });
            wait();
        }

    private:
        void wait() {
            socket_.async_wait(tcp::socket::wait_read, [self = shared_from_this()](beast::error_code ec) {
                if (self->decided_) return;
                if (ec) {
                    self->decided_ = true;
                    self->timer_.cancel();
                    return;
                }
                self->inspect();
            });
        }

        void inspect() {
            std::array<char, 4> head{};
            beast::error_code ec;
            const std::size_t n = socket_.receive(asio::buffer(head), tcp::socket::message_peek, ec);
            if (ec || n == 0) {
                decided_ = true;
                timer_.cancel();
                return;
            }
            const std::string_view got(head.data(), n);
            const std::string_view get = "GET ";
            if (n < get.size() && get.substr(0, n) == got) {
                auto retry = std::make_shared<asio::steady_timer>(socket_.get_executor(), kSniffRetry);
                retry->async_wait([self = shared_from_this(), retry](beast::error_code) {
                    if (!self->decided_) self->wait();
                });
                return;
            }
            decided_ = true;
            timer_.cancel();
            if (got == get) {
                upgrade();
            } else {
                owner_.adopt_raw(std::move(socket_));
            }
        }

        void upgrade() {
            auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(socket_));
            auto req = std::make_shared<http::request<http::string_body>>();
            http::async_read(ws->next_layer(), buffer_, *req,
                             [self = shared_from_this(), ws, req](beast::error_code ec, std::size_t) {
                                 if (ec) return;
                                 if (websocket::is_upgrade(*req) && req->target() == "/ws") {
                                     ws->async_accept(*req, [self, ws](beast::error_code ec2) {
                                         if (!ec2) self->owner_.adopt_ws(std::move(*ws));
                                     });
                                     return;
                                 }
                                 self->reject(ws, *req);
                             });
        }

        void reject(const std::shared_ptr<websocket::stream<tcp::socket>>& ws,
                    const http::request<http::string_body>& req) {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, req.version());
            res->set(http::field::content_type, "text/plain");
            res->body() = "holoboard: connect with a WebSocket upgrade on /ws or speak the line protocol over TCP\n";
            res->keep_alive(false);
            res->prepare_payload();
            http::async_write(ws->next_layer(), *res, [ws, res](beast::error_code, std::size_t) {
                beast::error_code ignored;
                ws->next_layer().shutdown(tcp::socket::shutdown_both, ignored);
            });
        }

        Impl& owner_;
        tcp::socket socket_;
        asio::steady_timer timer_;
        beast::flat_buffer buffer_;
        bool decided_ = false;
    };

    // -----------------------------------------------------------------------

    Impl(EngineConfig cfg, ServerOptions opts)
        : config(cfg), options(std::move(opts)), session(std::move(cfg)), acceptor(io) {}

    void start() {
        if (options.record_path) {
            record_file.open(*options.record_path, std::ios::binary | std::ios::trunc);
            if (!record_file) throw Error("IoError", "cannot open " + options.record_path->string());
            recorder.emplace(record_file);
            session.set_recorder([this](std::int64_t at, const proto::Message& m) { recorder->write(at, m); });
        }
        if (options.events_path) {
            events_file.open(*options.events_path, std::ios::binary | std::ios::trunc);
            if (!events_file) throw Error("IoError", "cannot open " + options.events_path->string());
        }

        beast::error_code ec;
        const tcp::endpoint ep(tcp::v4(), static_cast<unsigned short>(options.port));
        acceptor.open(ep.protocol(), ec);
        if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(ep, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) {
            if (ec == asio::error::address_in_use) {
                throw Error("PortInUse", "port " + std::to_string(options.port) + " is already bound");
            }
            throw Error("NetworkError", ec.message());
        }
        bound_port = acceptor.local_endpoint().port();
        spdlog::info("event=listening port={} tick_rate_hz={}", bound_port, config.tick_rate_hz);

        running = true;
        accept();
        io_thread = std::thread([this] { io.run(); });
        tick_thread = std::thread([this] { tick_loop(); });
    }

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != asio::error::operation_aborted) spdlog::warn("event=accept_failed reason=\"{}\"", ec.message());
                if (!acceptor.is_open()) return;
            } else {
                beast::error_code ignored;
                socket.set_option(tcp::no_delay(true), ignored);
                std::make_shared<Sniffer>(*this, std::move(socket))->start();
            }
            accept();
        });
    }

    void adopt_raw(tcp::socket socket) {
        auto conn = std::make_shared<RawConnection>(*this, next_id("tcp"), config.outbox_capacity, std::move(socket));
        register_connection(conn);
    }

    void adopt_ws(websocket::stream<tcp::socket> ws) {
        auto conn = std::make_shared<WsConnection>(*this, next_id("ws"), config.outbox_capacity, std::move(ws));
        register_connection(conn);
    }

    std::string next_id(const char* prefix) { return std::string(prefix) + "-" + std::to_string(++connection_counter); }

    void register_connection(const std::shared_ptr<Connection>& conn) {
        if (!running) {
            conn->close();
            return;
        }
        connections[conn->id()] = conn;
        spdlog::info("event=connect connection={}", conn->id());
        proto::Message hello;
        {
            std::lock_guard lock(session_mutex);
            hello = session.hello_message();
        }
        conn->send(std::make_shared<const std::string>(proto::encode(hello)));
        conn->start();
    }

    void on_line(const std::string& connection, std::string_view line) {
        if (line.empty() || line == "\r") return;
        try {
            proto::Message msg = proto::decode(line);
            std::lock_guard lock(session_mutex);
            session.submit(connection, std::move(msg));
        } catch (const Error& e) {
            spdlog::debug("event=bad_frame connection={} kind={}", connection, e.kind());
            std::lock_guard lock(session_mutex);
            session.report_input_error(connection, e);
        }
    }

    void on_closed(const std::string& connection) {
        connections.erase(connection);
        std::lock_guard lock(session_mutex);
        session.disconnect(connection);
    }

    void tick_loop() {
        using clock = std::chrono::steady_clock;
        const auto period = std::chrono::microseconds(config.tick_period_us());
        auto next = clock::now();
        std::unique_lock lock(stop_mutex);
        while (running) {
            next += period;
            TickOutput out;
            {
                std::lock_guard session_lock(session_mutex);
                out = session.tick();
            }
            auto shared = std::make_shared<const TickOutput>(std::move(out));
            asio::post(io, [this, shared] { fan_out(*shared); });
            stop_cv.wait_until(lock, next, [this] { return !running.load(); });
        }
    }

    void fan_out(const TickOutput& out) {
        std::vector<Bytes> lines;
        for (const auto& ev : out.events) {
            auto bytes = std::make_shared<const std::string>(proto::encode(ev));
            if (events_file.is_open()) events_file << *bytes;
            lines.push_back(std::move(bytes));
        }
        lines.push_back(std::make_shared<const std::string>(proto::encode(out.snapshot)));
        for (auto& [id, conn] : std::map(connections)) {
            for (const auto& l : lines) conn->send(l);
        }
    }

    void stop() {
        if (!running.exchange(false)) return;
        {
            std::lock_guard lock(stop_mutex);
        }
        stop_cv.notify_all();
        asio::post(io, [this] {
            beast::error_code ignored;
            acceptor.close(ignored);
            if (signals) signals->cancel(ignored);
            for (auto& [id, conn] : std::map(connections)) conn->close();
            connections.clear();
            io.stop();
        });
    }

    void wait() {
        if (waited) return;
        waited = true;
        if (tick_thread.joinable()) tick_thread.join();
        if (io_thread.joinable()) io_thread.join();
        record_file.flush();
        events_file.flush();
        spdlog::info("event=shutdown ticks={}", session.tick_index());
    }

    EngineConfig config;
    ServerOptions options;
    Session session;
    std::mutex session_mutex;

    asio::io_context io;
    tcp::acceptor acceptor;
    std::optional<asio::signal_set> signals;
    int bound_port = 0;

    std::map<std::string, std::shared_ptr<Connection>> connections;  // io thread only
    std::uint64_t connection_counter = 0;

    std::atomic<bool> running{false};
    bool waited = false;
    std::mutex stop_mutex;
    std::condition_variable stop_cv;
    std::thread io_thread;
    std::thread tick_thread;

    std::ofstream record_file;
    std::optional<ScriptWriter> recorder;
    std::ofstream events_file;
};

Server::Server(EngineConfig cfg, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(options))) {}

Server::~Server() {
    if (impl_->running) {
        stop();
        wait();
    }
}

void Server::start() { impl_->start(); }
int Server::port() const { return impl_->bound_port; }
void Server::stop() { impl_->stop(); }
void Server::wait() { impl_->wait(); }

void Server::stop_on_signals() {
    impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int sig) {
        if (ec) return;
        spdlog::info("event=signal signal={}", sig);
        stop();
    });
}

} // namespace holo
