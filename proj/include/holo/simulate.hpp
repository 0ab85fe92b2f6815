#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "holo/config.hpp"
#include "holo/protocol.hpp"
#include "holo/session.hpp"

namespace holo {

struct ScriptEntry {
    std::int64_t at_us = 0;
    proto::Message message;
};

// JSON-lines file. Each line is either {"at_us": N, "message": {...}} with a
// wire-format message, or {"until_us": N} to keep the clock running to N.
// Blank lines and lines starting with '#' are skipped.
struct ScenarioScript {
    std::vector<ScriptEntry> entries;
    std::optional<std::int64_t> until_us;
};

// Throws LocatedError("ScriptInvalid") with where() = "line N".
ScenarioScript parse_script(std::istream& in);
ScenarioScript load_script(const std::filesystem::path& path);

// Appends entries in script format; used to record live sessions.
class ScriptWriter {
public:
    explicit ScriptWriter(std::ostream& out) : out_(out) {}
    void write(std::int64_t at_us, const proto::Message& msg);

private:
    std::ostream& out_;
    std::int64_t seq_ = 0;
};

struct FrameDigest {
    std::int64_t frame_id = 0;
    std::string front;
    std::string back;
};

struct SimulationResult {
    std::vector<FrameDigest> digests;
    std::vector<std::string> event_lines;  // encoded, newline terminated
    proto::Message final_snapshot;
};

using TickObserver = std::function<void(const TickOutput&)>;

// Runs the tick loop against the script with no sockets. Without `ticks`,
// the run lasts until the last entry (or until_us) has been reached.
SimulationResult run_simulation(const EngineConfig& cfg, const ScenarioScript& script,
                                std::optional<std::int64_t> ticks = std::nullopt,
                                const TickObserver& observer = {});

// Writes events.jsonl, snapshot_final.json and digests.txt into `dir`.
void write_simulation(const SimulationResult& result, const std::filesystem::path& dir);

} // namespace holo
