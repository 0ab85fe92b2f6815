#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "holo/analytics/acoustic.hpp"
#include "holo/analytics/coding.hpp"

// On-disk layout of a two-group study:
//
//   <root>/manifest.json        {"groups": [{"label": "...", "path": "group_a"}, {...}]}
//   <root>/<group>/session.json roster, clip length, window sampling, duration
//   <root>/<group>/behavior.jsonl, transcript.jsonl, knowledge.jsonl,
//                 answer_key.json, audio/<student_id>.wav
//
// Everything but session.json is optional; missing inputs surface as absent
// report rows.
namespace holo::analytics {

struct SessionMeta {
    std::vector<std::string> students;
    double clip_len_s = 600.0;
    std::size_t window_count = kDefaultWindowCount;
    double window_s = kDefaultWindowSeconds;
    std::uint64_t window_seed = 0;
    double duration_min = 10.0;
    std::string sentiment_provider = "lexicon";
};

enum class TestPhase { pre, post };

struct KnowledgeRecord {
    TestPhase phase = TestPhase::pre;
    KnowledgeTestResponse response;
};

struct GroupData {
    std::string label;
    SessionMeta meta;
    std::optional<std::vector<BehaviorEvent>> behavior;
    std::optional<std::vector<Utterance>> transcript;
    std::optional<std::vector<KnowledgeRecord>> knowledge;
    std::optional<AnswerKey> answer_key;
    std::map<std::string, PcmAudio> audio;  // per student
};

struct Dataset {
    GroupData a;
    GroupData b;
};

// Seed for the i-th student (in roster order) of a session.
std::uint64_t student_window_seed(std::uint64_t session_seed, std::size_t index);
// Observation windows for every student of the session.
std::map<std::string, std::vector<Window>> student_windows(const SessionMeta& meta);

// Throw LocatedError("SchemaViolation") with where() = "file:line".
GroupData load_group(const std::filesystem::path& dir, std::string label);
Dataset load_dataset(const std::filesystem::path& root);

void write_group(const std::filesystem::path& dir, const GroupData& group);
void write_dataset(const std::filesystem::path& root, const Dataset& dataset);

struct GeneratorOptions {
    std::uint64_t seed = 7340;
    std::size_t students_per_group = 18;
    // true: group B is the base cohort and group A the same cohort with the
    // injected effects. false: both groups are independent draws from the
    // base distribution.
    bool inject = true;
    double close_posture_boost_s = 30.0;
    double loudness_factor = 1.5;  // energy ratio
    double clip_len_s = 600.0;
    double duration_min = 10.0;
    int sample_rate = 8000;
    double audio_s = 2.0;
};

Dataset generate_dataset(const GeneratorOptions& options);

} // namespace holo::analytics
