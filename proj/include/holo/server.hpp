#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "holo/config.hpp"

namespace holo {

struct ServerOptions {
    int port = 7340;  // 0 picks a free port
    std::optional<std::filesystem::path> record_path;  // inputs, in scenario-script format
    std::optional<std::filesystem::path> events_path;  // outgoing events and errors
};

// TCP session server. Raw connections speak the line protocol directly; an
// HTTP upgrade request for /ws on the same port switches to WebSocket, one
// line per text frame. One I/O thread serves every connection and a second
// thread runs the tick loop.
class Server {
public:
    Server(EngineConfig cfg, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts both threads. Throws Error("PortInUse").
    void start();
    // Port actually bound (useful with port 0).
    int port() const;
    // Safe to call from any thread, including signal handlers' completion.
    void stop();
    // Blocks until stop() and until both threads have finished; flushes logs.
    void wait();
    // Installs SIGINT/SIGTERM handling that calls stop().
    void stop_on_signals();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace holo
