#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "holo/analytics/dataset.hpp"
#include "holo/analytics/report.hpp"
#include "holo/config.hpp"
#include "holo/error.hpp"
#include "holo/server.hpp"
#include "holo/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(const holo::Error& e) {
    static const std::set<std::string> input_kinds = {
        "ConfigInvalid", "ScriptInvalid", "SchemaViolation", "DeckInvalid", "MissingVariable",
    };
    return input_kinds.contains(e.kind()) ? kExitInput : kExitRuntime;
}

holo::EngineConfig config_from(const std::string& path) {
    return path.empty() ? holo::EngineConfig() : holo::load_config(path);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw holo::Error("IoError", "cannot write " + path.string());
    f << text;
}

struct ServeArgs {
    std::string config;
    std::optional<int> port;
    std::string record;
    std::string events;
};

int serve(const ServeArgs& a) {
    holo::EngineConfig cfg = config_from(a.config);
    holo::ServerOptions opt;
    opt.port = a.port.value_or(cfg.port);
    if (!a.record.empty()) opt.record_path = a.record;
    if (!a.events.empty()) opt.events_path = a.events;
    holo::Server server(std::move(cfg), opt);
    server.start();
    server.stop_on_signals();
    std::cout << "listening on port " << server.port() << std::endl;
    server.wait();
    return kExitOk;
}

struct SimulateArgs {
    std::string script;
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> ticks;
};

int simulate(const SimulateArgs& a) {
    holo::EngineConfig cfg = config_from(a.config);
    if (a.seed) cfg.seed = *a.seed;
    const holo::ScenarioScript script = holo::load_script(a.script);
    const holo::SimulationResult result = holo::run_simulation(cfg, script, a.ticks);
    holo::write_simulation(result, a.out);
    spdlog::info("event=simulated frames={} events={} out={}", result.digests.size(), result.event_lines.size(),
                 a.out);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string in;
    std::string out;
    bool strict = false;
    bool pooled = false;
};

int analyze(const AnalyzeArgs& a) {
    namespace an = holo::analytics;
    const an::Dataset data = an::load_dataset(a.in);
    an::ReportOptions opt;
    opt.strict = a.strict;
    if (a.pooled) opt.variant = an::TTestVariant::pooled;
    const an::Report report = an::build_report(data, opt);
    std::filesystem::create_directories(a.out);
    write_file(std::filesystem::path(a.out) / "report.json", an::to_json(report).dump(2) + "\n");
    write_file(std::filesystem::path(a.out) / "report.txt", an::to_text(report));
    for (const auto& missing : report.absent_inputs) spdlog::warn("event=absent_input input=\"{}\"", missing);
    spdlog::info("event=report rows={} out={}", report.rows.size(), a.out);
    return kExitOk;
}

struct GenerateArgs {
    std::string out;
    std::uint64_t seed = 7340;
    bool null = false;
    std::size_t students = 18;
};

int generate(const GenerateArgs& a) {
    holo::analytics::GeneratorOptions opt;
    opt.seed = a.seed;
    opt.inject = !a.null;
    opt.students_per_group = a.students;
    holo::analytics::write_dataset(a.out, holo::analytics::generate_dataset(opt));
    spdlog::info("event=dataset_written out={} injected={}", a.out, opt.inject);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("holoboard"));
    spdlog::set_level(spdlog::level::info);
    if (const char* level = std::getenv("HOLO_LOG")) spdlog::set_level(spdlog::level::from_str(level));

    CLI::App app{"Pseudo-holographic teaching board engine"};
    app.require_subcommand(1);

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Run the session server");
    serve_cmd->add_option("--config", serve_args.config, "Engine config (JSON)")->check(CLI::ExistingFile);
    serve_cmd->add_option("--port", serve_args.port, "Listen port; 0 picks a free one")->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--record", serve_args.record, "Record inputs as a scenario script");
    serve_cmd->add_option("--events", serve_args.events, "Write outgoing events as JSON lines");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario script headlessly");
    sim_cmd->add_option("--script", sim_args.script, "Scenario script (JSON lines)")->required();
    sim_cmd->add_option("--config", sim_args.config, "Engine config (JSON)")->check(CLI::ExistingFile);
    sim_cmd->add_option("--out", sim_args.out, "Output directory")->required();
    sim_cmd->add_option("--seed", sim_args.seed, "Override the config seed");
    sim_cmd->add_option("--ticks", sim_args.ticks, "Number of ticks to run")->check(CLI::NonNegativeNumber);

    AnalyzeArgs an_args;
    auto* an_cmd = app.add_subcommand("analyze", "Build the two-group engagement report");
    an_cmd->add_option("--in", an_args.in, "Dataset directory (with manifest.json)")->required();
    an_cmd->add_option("--out", an_args.out, "Output directory")->required();
    an_cmd->add_flag("--strict", an_args.strict, "Fail when any input is absent");
    an_cmd->add_flag("--pooled", an_args.pooled, "Pooled-variance t-tests instead of Welch");

    GenerateArgs gen_args;
    auto* gen_cmd = app.add_subcommand("generate-dataset", "Write a synthetic two-group dataset");
    gen_cmd->add_option("--out", gen_args.out, "Output directory")->required();
    gen_cmd->add_option("--seed", gen_args.seed, "Generator seed");
    gen_cmd->add_flag("--null", gen_args.null, "Independent groups with no injected effects");
    gen_cmd->add_option("--students", gen_args.students, "Students per group")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*serve_cmd) return serve(serve_args);
        if (*sim_cmd) return simulate(sim_args);
        if (*an_cmd) return analyze(an_args);
        if (*gen_cmd) return generate(gen_args);
    } catch (const holo::Error& e) {
        spdlog::error("event=failed kind={} detail=\"{}\"", e.kind(), e.what());
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        spdlog::error("event=failed detail=\"{}\"", e.what());
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
