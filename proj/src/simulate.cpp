#include "holo/simulate.hpp"

#include <fstream>

namespace holo {

namespace {

constexpr const char* kKind = "ScriptInvalid";
constexpr const char* kConnection = "script";

} // namespace

ScenarioScript parse_script(std::istream& in) {
    ScenarioScript script;
    std::string line;
    std::int64_t line_no = 0;
    std::int64_t last_at = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = "line " + std::to_string(line_no);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        Json doc;
        try {
            doc = Json::parse(line);
        } catch (const Json::exception& e) {
            throw LocatedError(kKind, where, e.what());
        }
        if (!doc.is_object()) throw LocatedError(kKind, where, "expected a JSON object");

        try {
            const FieldReader r(doc, "", kKind);
            if (doc.contains("until_us") && !doc.contains("message")) {
                const std::int64_t until = r.integer("until_us");
                if (until < last_at) r.fail_at("until_us", "earlier than a previous entry");
                script.until_us = until;
                continue;
            }
            ScriptEntry e;
            e.at_us = r.integer("at_us");
            if (e.at_us < 0) r.fail_at("at_us", "must be non-negative");
            if (e.at_us < last_at) r.fail_at("at_us", "timestamps must be non-decreasing");
            if (script.until_us && e.at_us > *script.until_us) r.fail_at("at_us", "after until_us");
            const std::string bytes = r.child("message").node().dump();
            e.message = proto::decode(bytes);
            last_at = e.at_us;
            script.entries.push_back(std::move(e));
        } catch (const Error& e) {
            throw LocatedError(kKind, where, nested_detail(e, kKind));
        }
    }
    return script;
}

ScenarioScript load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LocatedError(kKind, path.string(), "cannot open script");
    return parse_script(in);
}

void ScriptWriter::write(std::int64_t at_us, const proto::Message& msg) {
    proto::Message copy = msg;
    copy.seq = ++seq_;
    const Json entry{{"at_us", at_us}, {"message", Json::parse(proto::encode(copy))}};
    out_ << proto::canonical_dump(entry) << '\n';
}

SimulationResult run_simulation(const EngineConfig& cfg, const ScenarioScript& script,
                                std::optional<std::int64_t> ticks, const TickObserver& observer) {
    Session session(cfg);
    const std::int64_t period = cfg.tick_period_us();

    std::int64_t n_ticks = 1;
    if (ticks) {
        n_ticks = *ticks;
    } else {
        std::int64_t end = script.until_us.value_or(0);
        if (!script.entries.empty()) end = std::max(end, script.entries.back().at_us);
        n_ticks = (end + period - 1) / period + 1;
    }

    SimulationResult result;
    std::size_t next = 0;
    for (std::int64_t k = 0; k < n_ticks; ++k) {
        const std::int64_t now = session.next_tick_us();
        while (next < script.entries.size() && script.entries[next].at_us <= now) {
            session.submit(kConnection, script.entries[next].message);
            ++next;
        }
        TickOutput out = session.tick();
        for (const auto& ev : out.events) result.event_lines.push_back(proto::encode(ev));
        result.digests.push_back({out.display.front.frame_id, scene::digest(out.display.front),
                                  scene::digest(out.display.back)});
        if (observer) observer(out);
        result.final_snapshot = std::move(out.snapshot);
    }
    return result;
}

void write_simulation(const SimulationResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("IoError", "cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("events.jsonl");
        for (const auto& line : result.event_lines) f << line;
    }
    {
        auto f = open("snapshot_final.json");
        f << proto::encode(result.final_snapshot);
    }
    {
        auto f = open("digests.txt");
        for (const auto& d : result.digests) f << d.frame_id << ' ' << d.front << ' ' << d.back << '\n';
    }
}

} // namespace holo
