#include "holo/analytics/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "holo/error.hpp"
#include "holo/json_fields.hpp"

namespace holo::analytics {

namespace {

constexpr const char* kKind = "SchemaViolation";

std::string location(const std::filesystem::path& file, std::size_t line) {
    return file.string() + ":" + std::to_string(line);
}

[[noreturn]] void rethrow_at(const std::filesystem::path& file, std::size_t line, const Error& e) {
    std::string where = location(file, line);
    if (const auto* located = dynamic_cast<const LocatedError*>(&e)) where += ": " + located->where();
    throw LocatedError(kKind, where, nested_detail(e, kKind, false));
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LocatedError(kKind, path.string(), "cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw LocatedError(kKind, path.string(), e.what());
    }
}

// Calls fn(reader) for every non-blank line, rewrapping errors with file:line.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw LocatedError(kKind, path.string(), "cannot open file");
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const Json doc = Json::parse(line);
            const FieldReader r(doc, "", kKind);
            r.expect_object();
            fn(r, no);
        } catch (const Json::exception& e) {
            throw LocatedError(kKind, location(path, no), e.what());
        } catch (const Error& e) {
            rethrow_at(path, no, e);
        }
    }
}

std::set<std::string> string_set(const FieldReader& r) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < r.array_size(); ++i) {
        const FieldReader e = r.element(i);
        if (!e.node().is_string()) e.fail("expected a string");
        out.insert(e.node().get<std::string>());
    }
    return out;
}

template <std::size_t N>
std::array<std::string, N> string_array(const FieldReader& r) {
    if (r.array_size() != N) r.fail("expected " + std::to_string(N) + " answers");
    std::array<std::string, N> out;
    for (std::size_t i = 0; i < N; ++i) {
        const FieldReader e = r.element(i);
        if (!e.node().is_string()) e.fail("expected a string");
        out[i] = e.node().get<std::string>();
    }
    return out;
}

template <std::size_t N>
std::array<std::set<std::string>, N> set_array(const FieldReader& r) {
    if (r.array_size() != N) r.fail("expected " + std::to_string(N) + " answer sets");
    std::array<std::set<std::string>, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = string_set(r.element(i));
    return out;
}

double seconds_on_grid(const FieldReader& r, std::string_view key) {
    const double v = r.number(key);
    if (v < 0.0) r.fail_at(key, "must be non-negative");
    if (!on_decisecond_grid(v)) r.fail_at(key, "must be a multiple of 0.1 s");
    return v;
}

SessionMeta parse_session(const std::filesystem::path& path) {
    const Json doc = read_json_file(path);
    try {
        const FieldReader r(doc, "", kKind);
        r.expect_object();
        SessionMeta m;
        const FieldReader roster = r.child("students");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < roster.array_size(); ++i) {
            const FieldReader e = roster.element(i);
            if (!e.node().is_string() || e.node().get<std::string>().empty()) e.fail("expected a student id");
            const std::string id = e.node().get<std::string>();
            if (!seen.insert(id).second) e.fail("duplicate student id " + id);
            m.students.push_back(id);
        }
        m.clip_len_s = r.number_or("clip_len_s", m.clip_len_s);
        if (!(m.clip_len_s > 0.0) || !on_decisecond_grid(m.clip_len_s)) {
            r.fail_at("clip_len_s", "must be a positive multiple of 0.1 s");
        }
        const std::int64_t count = r.integer_or("window_count", static_cast<std::int64_t>(m.window_count));
        if (count < 0) r.fail_at("window_count", "must be non-negative");
        m.window_count = static_cast<std::size_t>(count);
        m.window_s = r.number_or("window_s", m.window_s);
        if (!(m.window_s > 0.0) || !on_decisecond_grid(m.window_s)) {
            r.fail_at("window_s", "must be a positive multiple of 0.1 s");
        }
        if (static_cast<double>(m.window_count) * m.window_s > m.clip_len_s + 1e-9) {
            r.fail_at("window_count", "windows do not fit in the clip");
        }
        const std::int64_t seed = r.integer_or("window_seed", 0);
        if (seed < 0) r.fail_at("window_seed", "must be non-negative");
        m.window_seed = static_cast<std::uint64_t>(seed);
        m.duration_min = r.number_or("duration_min", m.duration_min);
        if (!(m.duration_min > 0.0)) r.fail_at("duration_min", "must be positive");
        m.sentiment_provider = r.string_or("sentiment_provider", m.sentiment_provider);
        return m;
    } catch (const LocatedError& e) {
        throw LocatedError(kKind, path.string() + ": " + e.where(), nested_detail(e, kKind, false));
    }
}

std::vector<BehaviorEvent> parse_behavior(const std::filesystem::path& path, const SessionMeta& meta) {
    const std::set<std::string> roster(meta.students.begin(), meta.students.end());
    std::vector<BehaviorEvent> events;
    // Per student and category: intervals already seen, to reject overlaps.
    std::map<std::pair<std::string, BehaviorCategory>, std::map<Decis, Decis>> occupied;
    for_each_line(path, [&](const FieldReader& r, std::size_t) {
        BehaviorEvent e;
        e.student_id = r.string("student_id");
        if (!roster.contains(e.student_id)) r.fail_at("student_id", "not in the session roster");
        const std::string type = r.string("type");
        const auto t = behavior_type_from_string(type);
        if (!t) r.fail_at("type", "unknown behaviour type \"" + type + "\"");
        e.type = *t;
        if (r.has("category")) {
            const std::string cat = r.string("category");
            const auto c = behavior_category_from_string(cat);
            if (!c) r.fail_at("category", "unknown category \"" + cat + "\"");
            if (*c != category_of(e.type)) r.fail_at("category", "does not match type " + type);
        }
        e.start = to_decis(seconds_on_grid(r, "start_s"));
        e.end = to_decis(seconds_on_grid(r, "end_s"));
        if (e.end <= e.start) r.fail_at("end_s", "must be after start_s");

        auto& taken = occupied[{e.student_id, category_of(e.type)}];
        auto next = taken.lower_bound(e.start);
        if (next != taken.end() && next->first < e.end) r.fail("overlaps another event of the same category");
        if (next != taken.begin() && std::prev(next)->second > e.start) {
            r.fail("overlaps another event of the same category");
        }
        taken.emplace(e.start, e.end);
        events.push_back(std::move(e));
    });
    return events;
}

std::vector<Utterance> parse_transcript(const std::filesystem::path& path, const SessionMeta& meta) {
    const std::set<std::string> roster(meta.students.begin(), meta.students.end());
    std::vector<Utterance> out;
    for_each_line(path, [&](const FieldReader& r, std::size_t) {
        Utterance u;
        const std::string speaker = r.string("speaker");
        if (speaker == "student") {
            u.student_id = r.string("student_id");
            if (!roster.contains(*u.student_id)) r.fail_at("student_id", "not in the session roster");
        } else if (speaker != "teacher") {
            r.fail_at("speaker", "expected \"teacher\" or \"student\"");
        }
        u.text = r.string("text");
        u.start_s = r.number("start_s");
        const std::string st = r.string("speech_type");
        const auto type = speech_type_from_string(st);
        if (!type) r.fail_at("speech_type", "unknown speech type \"" + st + "\"");
        u.speech_type = *type;
        if (r.has("cognitive_level")) {
            const std::string cl = r.string("cognitive_level");
            if (cl != "none") {
                const auto level = bloom_level_from_string(cl);
                if (!level) r.fail_at("cognitive_level", "unknown level \"" + cl + "\"");
                u.cognitive_level = *level;
            }
        }
        try {
            validate(u);
        } catch (const Error& e) {
            r.fail(nested_detail(e, kKind));
        }
        out.push_back(std::move(u));
    });
    return out;
}

std::vector<KnowledgeRecord> parse_knowledge(const std::filesystem::path& path, const SessionMeta& meta) {
    const std::set<std::string> roster(meta.students.begin(), meta.students.end());
    std::vector<KnowledgeRecord> out;
    for_each_line(path, [&](const FieldReader& r, std::size_t) {
        KnowledgeRecord k;
        k.response.student_id = r.string("student_id");
        if (!roster.contains(k.response.student_id)) r.fail_at("student_id", "not in the session roster");
        const std::string phase = r.string("phase");
        if (phase == "pre") {
            k.phase = TestPhase::pre;
        } else if (phase == "post") {
            k.phase = TestPhase::post;
        } else {
            r.fail_at("phase", "expected \"pre\" or \"post\"");
        }
        k.response.single = string_array<kSingleItems>(r.child("single"));
        k.response.multiple = set_array<kMultipleItems>(r.child("multiple"));
        const FieldReader open = r.child("open");
        if (open.array_size() != kOpenItems) open.fail("expected 6 ratings");
        for (std::size_t i = 0; i < kOpenItems; ++i) {
            const FieldReader e = open.element(i);
            if (!e.node().is_number_integer()) e.fail("expected an integer rating");
            const auto v = e.node().get<std::int64_t>();
            if (v < 0 || v > kOpenMax) e.fail("rating must be in [0, 5]");
            k.response.open[i] = static_cast<int>(v);
        }
        out.push_back(std::move(k));
    });
    return out;
}

AnswerKey parse_answer_key(const std::filesystem::path& path) {
    const Json doc = read_json_file(path);
    try {
        const FieldReader r(doc, "", kKind);
        r.expect_object();
        AnswerKey key;
        key.single = string_array<kSingleItems>(r.child("single"));
        key.multiple = set_array<kMultipleItems>(r.child("multiple"));
        return key;
    } catch (const LocatedError& e) {
        throw LocatedError(kKind, path.string() + ": " + e.where(), nested_detail(e, kKind, false));
    }
}

Json set_json(const std::set<std::string>& s) { return Json(std::vector<std::string>(s.begin(), s.end())); }

void write_lines(const std::filesystem::path& path, const std::vector<Json>& lines) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("IoError", "cannot write " + path.string());
    for (const auto& l : lines) f << l.dump() << '\n';
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("IoError", "cannot write " + path.string());
    f << doc.dump(2) << '\n';
}

} // namespace

std::uint64_t student_window_seed(std::uint64_t session_seed, std::size_t index) {
    // splitmix64 finaliser over (seed, index)
    std::uint64_t z = session_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::map<std::string, std::vector<Window>> student_windows(const SessionMeta& meta) {
    std::map<std::string, std::vector<Window>> out;
    for (std::size_t i = 0; i < meta.students.size(); ++i) {
        out[meta.students[i]] = sample_windows(meta.clip_len_s, meta.window_count, meta.window_s,
                                               student_window_seed(meta.window_seed, i));
    }
    return out;
}

GroupData load_group(const std::filesystem::path& dir, std::string label) {
    GroupData g;
    g.label = std::move(label);
    g.meta = parse_session(dir / "session.json");
    if (std::filesystem::exists(dir / "behavior.jsonl")) g.behavior = parse_behavior(dir / "behavior.jsonl", g.meta);
    if (std::filesystem::exists(dir / "transcript.jsonl")) {
        g.transcript = parse_transcript(dir / "transcript.jsonl", g.meta);
    }
    if (std::filesystem::exists(dir / "knowledge.jsonl")) {
        g.knowledge = parse_knowledge(dir / "knowledge.jsonl", g.meta);
    }
    if (std::filesystem::exists(dir / "answer_key.json")) g.answer_key = parse_answer_key(dir / "answer_key.json");
    for (const auto& id : g.meta.students) {
        const auto wav = dir / "audio" / (id + ".wav");
        if (std::filesystem::exists(wav)) g.audio[id] = read_wav(wav);
    }
    return g;
}

Dataset load_dataset(const std::filesystem::path& root) {
    const auto manifest_path = root / "manifest.json";
    const Json doc = read_json_file(manifest_path);
    std::vector<std::pair<std::string, std::filesystem::path>> groups;
    try {
        const FieldReader r(doc, "", kKind);
        r.expect_object();
        const FieldReader list = r.child("groups");
        if (list.array_size() != 2) list.fail("expected exactly two groups");
        for (std::size_t i = 0; i < 2; ++i) {
            const FieldReader g = list.element(i);
            g.expect_object();
            groups.emplace_back(g.string("label"), g.string("path"));
        }
    } catch (const LocatedError& e) {
        throw LocatedError(kKind, manifest_path.string() + ": " + e.where(), e.what());
    }
    Dataset d;
    d.a = load_group(root / groups[0].second, groups[0].first);
    d.b = load_group(root / groups[1].second, groups[1].first);
    return d;
}

void write_group(const std::filesystem::path& dir, const GroupData& g) {
    std::filesystem::create_directories(dir);
    write_json(dir / "session.json", Json{{"students", g.meta.students},
                                          {"clip_len_s", g.meta.clip_len_s},
                                          {"window_count", g.meta.window_count},
                                          {"window_s", g.meta.window_s},
                                          {"window_seed", g.meta.window_seed},
                                          {"duration_min", g.meta.duration_min},
                                          {"sentiment_provider", g.meta.sentiment_provider}});
    if (g.behavior) {
        std::vector<Json> lines;
        for (const auto& e : *g.behavior) {
            lines.push_back({{"student_id", e.student_id},
                             {"category", std::string(to_string(category_of(e.type)))},
                             {"type", std::string(to_string(e.type))},
                             {"start_s", to_seconds(e.start)},
                             {"end_s", to_seconds(e.end)}});
        }
        write_lines(dir / "behavior.jsonl", lines);
    }
    if (g.transcript) {
        std::vector<Json> lines;
        for (const auto& u : *g.transcript) {
            Json j{{"speaker", u.is_teacher() ? "teacher" : "student"},
                   {"text", u.text},
                   {"start_s", u.start_s},
                   {"speech_type", std::string(to_string(u.speech_type))}};
            if (u.student_id) j["student_id"] = *u.student_id;
            if (u.cognitive_level) j["cognitive_level"] = std::string(to_string(*u.cognitive_level));
            lines.push_back(std::move(j));
        }
        write_lines(dir / "transcript.jsonl", lines);
    }
    if (g.knowledge) {
        std::vector<Json> lines;
        for (const auto& k : *g.knowledge) {
            lines.push_back({{"student_id", k.response.student_id},
                             {"phase", k.phase == TestPhase::pre ? "pre" : "post"},
                             {"single", k.response.single},
                             {"multiple", {set_json(k.response.multiple[0]), set_json(k.response.multiple[1])}},
                             {"open", k.response.open}});
        }
        write_lines(dir / "knowledge.jsonl", lines);
    }
    if (g.answer_key) {
        write_json(dir / "answer_key.json",
                   Json{{"single", g.answer_key->single},
                        {"multiple", {set_json(g.answer_key->multiple[0]), set_json(g.answer_key->multiple[1])}}});
    }
    if (!g.audio.empty()) {
        std::filesystem::create_directories(dir / "audio");
        for (const auto& [id, pcm] : g.audio) write_wav(dir / "audio" / (id + ".wav"), pcm);
    }
}

void write_dataset(const std::filesystem::path& root, const Dataset& d) {
    std::filesystem::create_directories(root);
    write_json(root / "manifest.json", Json{{"groups",
                                             {{{"label", d.a.label}, {"path", "group_a"}},
                                              {{"label", d.b.label}, {"path", "group_b"}}}}});
    write_group(root / "group_a", d.a);
    write_group(root / "group_b", d.b);
}

// ---------------------------------------------------------------------------
// Synthetic cohorts

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, std::span<const T> items, std::span<const double> weights) {
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    return items[d(rng)];
}

// Codes one category over the whole clip as back-to-back segments, some left
// uncoded.
void code_category(Rng& rng, std::vector<BehaviorEvent>& out, const std::string& student, Decis clip,
                   std::span<const BehaviorType> types, std::span<const double> weights, double gap_p) {
    Decis t = 0;
    while (t < clip) {
        const Decis len = std::min<Decis>(uniform_int(rng, 10, 60), clip - t);
        if (!chance(rng, gap_p)) out.push_back({student, pick(rng, types, weights), t, t + len});
        t += len;
    }
}

// Uncoded stretches of `category` inside the student's windows.
std::vector<Window> uncoded(const std::vector<BehaviorEvent>& events, const std::string& student,
                            BehaviorCategory category, const std::vector<Window>& windows) {
    std::vector<Window> free;
    for (const Window& w : windows) {
        std::vector<Window> taken;
        for (const auto& e : events) {
            if (e.student_id == student && category_of(e.type) == category && e.end > w.start && e.start < w.end) {
                taken.push_back({std::max(e.start, w.start), std::min(e.end, w.end)});
            }
        }
        std::sort(taken.begin(), taken.end(), [](const Window& a, const Window& b) { return a.start < b.start; });
        Decis t = w.start;
        for (const Window& k : taken) {
            if (k.start > t) free.push_back({t, k.start});
            t = std::max(t, k.end);
        }
        if (t < w.end) free.push_back({t, w.end});
    }
    return free;
}

const std::vector<std::string> kFillerWords = {
    "the", "planet", "is", "far", "from", "sun", "it", "has", "rings", "moon", "water", "air", "hot", "cold",
    "big", "small", "orbit", "earth", "mars", "jupiter", "saturn", "we", "can", "see", "think", "because",
    "maybe", "gas", "rock", "life",
};
const std::vector<std::string> kMoodWords = {"great", "cool", "interesting", "fun", "boring", "hard", "wow", "nice", "confusing", "love"};

std::string make_sentence(Rng& rng, std::size_t words, char terminator) {
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        if (!s.empty()) s += ' ';
        if (chance(rng, 0.15)) {
            s += kMoodWords[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(kMoodWords.size()) - 1))];
        } else {
            s += kFillerWords[static_cast<std::size_t>(
                uniform_int(rng, 0, static_cast<std::int64_t>(kFillerWords.size()) - 1))];
        }
    }
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s += terminator;
    return s;
}

GroupData make_cohort(Rng& rng, const SessionMeta& meta, const GeneratorOptions& opt) {
    GroupData g;
    g.meta = meta;
    const auto windows = student_windows(meta);
    const Decis clip = to_decis(meta.clip_len_s);
    const Decis boost = to_decis(opt.close_posture_boost_s);

    static constexpr BehaviorType affect[] = {BehaviorType::high_arousal_positive, BehaviorType::low_arousal_positive,
                                              BehaviorType::high_arousal_negative, BehaviorType::low_arousal_negative};
    static constexpr double affect_w[] = {0.15, 0.6, 0.05, 0.2};
    static constexpr BehaviorType posture[] = {BehaviorType::close_posture, BehaviorType::neutral_posture,
                                               BehaviorType::leave_posture};
    static constexpr double posture_w[] = {0.2, 0.55, 0.25};
    static constexpr BehaviorType behavior[] = {BehaviorType::positive_behavior, BehaviorType::normal_behavior,
                                                BehaviorType::misbehavior};
    static constexpr double behavior_w[] = {0.15, 0.7, 0.15};

    std::vector<BehaviorEvent> events;
    for (const auto& id : meta.students) {
        code_category(rng, events, id, clip, affect, affect_w, 0.3);
        code_category(rng, events, id, clip, behavior, behavior_w, 0.2);
        // Posture is left sparse enough that an injected boost always fits.
        for (;;) {
            std::vector<BehaviorEvent> trial;
            code_category(rng, trial, id, clip, posture, posture_w, 0.55);
            Decis room = 0;
            for (const Window& w : uncoded(trial, id, BehaviorCategory::posture, windows.at(id))) room += w.end - w.start;
            if (room >= boost) {
                events.insert(events.end(), trial.begin(), trial.end());
                break;
            }
        }
    }
    std::sort(events.begin(), events.end(), [](const BehaviorEvent& a, const BehaviorEvent& b) {
        return std::tie(a.student_id, a.start, a.type) < std::tie(b.student_id, b.start, b.type);
    });
    g.behavior = std::move(events);

    // Transcript: teacher prompts followed by bursts of student replies.
    std::vector<double> talk(meta.students.size());
    for (double& t : talk) t = uniform(rng, 0.3, 1.0);
    std::vector<Utterance> transcript;
    static constexpr SpeechType teacher_types[] = {SpeechType::lecturing, SpeechType::directing,
                                                   SpeechType::close_question, SpeechType::open_question};
    static constexpr double teacher_w[] = {0.6, 0.2, 0.14, 0.06};
    static constexpr SpeechType student_types[] = {SpeechType::assertion, SpeechType::question, SpeechType::exclamation};
    static constexpr double student_w[] = {0.65, 0.15, 0.2};
    static constexpr double bloom_w[] = {0.45, 0.25, 0.1, 0.1, 0.06, 0.04};
    const double end_s = meta.duration_min * 60.0;
    double t = 0.0;
    while (t < end_s) {
        Utterance tu;
        tu.text = make_sentence(rng, static_cast<std::size_t>(uniform_int(rng, 4, 12)), '.');
        tu.start_s = std::round(t * 10.0) / 10.0;
        tu.speech_type = pick<SpeechType>(rng, teacher_types, teacher_w);
        if (tu.speech_type == SpeechType::close_question || tu.speech_type == SpeechType::open_question) {
            tu.text.back() = '?';
        }
        transcript.push_back(tu);
        t += uniform(rng, 3.0, 8.0);
        const auto replies = uniform_int(rng, 0, 3);
        for (std::int64_t k = 0; k < replies && t < end_s; ++k) {
            Utterance su;
            su.student_id = meta.students[std::discrete_distribution<std::size_t>(talk.begin(), talk.end())(rng)];
            su.speech_type = pick<SpeechType>(rng, student_types, student_w);
            su.start_s = std::round(t * 10.0) / 10.0;
            if (su.speech_type == SpeechType::exclamation) {
                su.text = chance(rng, 0.5) ? "Wow!" : "Oh my god!";
            } else {
                const char term = su.speech_type == SpeechType::question ? '?' : '.';
                su.text = make_sentence(rng, static_cast<std::size_t>(uniform_int(rng, 1, 5)), term);
                if (chance(rng, 0.3)) su.text += " " + make_sentence(rng, static_cast<std::size_t>(uniform_int(rng, 1, 4)), '.');
                su.cognitive_level = pick<BloomLevel>(rng, kBloomLevels, bloom_w);
            }
            transcript.push_back(su);
            t += uniform(rng, 1.0, 4.0);
        }
    }
    g.transcript = std::move(transcript);

    // Knowledge tests against a fixed key.
    AnswerKey key;
    key.single = {"b", "a", "d", "c"};
    key.multiple = {std::set<std::string>{"a", "c"}, std::set<std::string>{"b", "c", "d"}};
    g.answer_key = key;
    std::vector<KnowledgeRecord> knowledge;
    for (const auto& id : meta.students) {
        const double ability = uniform(rng, 0.3, 0.8);
        for (TestPhase phase : {TestPhase::pre, TestPhase::post}) {
            const double p = phase == TestPhase::pre ? ability : std::min(0.95, ability + 0.15);
            KnowledgeRecord k;
            k.phase = phase;
            k.response.student_id = id;
            for (std::size_t i = 0; i < kSingleItems; ++i) k.response.single[i] = chance(rng, p) ? key.single[i] : "x";
            for (std::size_t i = 0; i < kMultipleItems; ++i) {
                k.response.multiple[i] = chance(rng, p) ? key.multiple[i] : std::set<std::string>{"a"};
            }
            for (auto& o : k.response.open) o = static_cast<int>(std::binomial_distribution<int>(kOpenMax, p)(rng));
            knowledge.push_back(std::move(k));
        }
    }
    g.knowledge = std::move(knowledge);

    // One short voice-like recording per student.
    const auto n = static_cast<std::size_t>(opt.audio_s * opt.sample_rate);
    for (const auto& id : meta.students) {
        const double f0 = uniform(rng, 120.0, 300.0);
        const double amp = uniform(rng, 0.18, 0.22);
        const double phase = uniform(rng, 0.0, 2.0 * M_PI);
        std::normal_distribution<double> noise(0.0, 0.01);
        PcmAudio pcm;
        pcm.sample_rate = opt.sample_rate;
        pcm.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double time = static_cast<double>(i) / opt.sample_rate;
            const double w = 2.0 * M_PI * f0 * time + phase;
            pcm.samples[i] = amp * (std::sin(w) + 0.3 * std::sin(2.0 * w)) + noise(rng);
        }
        g.audio[id] = std::move(pcm);
    }
    return g;
}

void inject_effects(GroupData& g, const GeneratorOptions& opt) {
    const auto windows = student_windows(g.meta);
    const Decis boost = to_decis(opt.close_posture_boost_s);
    auto& events = *g.behavior;
    std::vector<BehaviorEvent> added;
    for (const auto& id : g.meta.students) {
        Decis left = boost;
        for (const Window& w : uncoded(events, id, BehaviorCategory::posture, windows.at(id))) {
            if (left == 0) break;
            const Decis take = std::min(left, w.end - w.start);
            added.push_back({id, BehaviorType::close_posture, w.start, w.start + take});
            left -= take;
        }
        if (left != 0) throw Error("GeneratorError", "no room to inject close posture for " + id);
    }
    events.insert(events.end(), added.begin(), added.end());
    std::sort(events.begin(), events.end(), [](const BehaviorEvent& a, const BehaviorEvent& b) {
        return std::tie(a.student_id, a.start, a.type) < std::tie(b.student_id, b.start, b.type);
    });

    const double gain = std::sqrt(opt.loudness_factor);
    for (auto& [id, pcm] : g.audio) {
        for (double& s : pcm.samples) s *= gain;
    }
}

} // namespace

Dataset generate_dataset(const GeneratorOptions& opt) {
    if (opt.students_per_group == 0) throw Error("InvalidArgument", "need at least one student per group");
    if (!(opt.sample_rate > 0 && opt.audio_s > 0.0)) throw Error("InvalidArgument", "audio length must be positive");
    SessionMeta meta;
    for (std::size_t i = 0; i < opt.students_per_group; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%02zu", i + 1);
        meta.students.emplace_back(buf);
    }
    meta.clip_len_s = opt.clip_len_s;
    meta.duration_min = opt.duration_min;
    meta.window_seed = student_window_seed(opt.seed, 0x5eed);

    Rng rng_a(student_window_seed(opt.seed, 1));
    Dataset d;
    if (opt.inject) {
        GroupData base = make_cohort(rng_a, meta, opt);
        d.b = base;
        d.a = std::move(base);
        inject_effects(d.a, opt);
    } else {
        Rng rng_b(student_window_seed(opt.seed, 2));
        d.a = make_cohort(rng_a, meta, opt);
        d.b = make_cohort(rng_b, meta, opt);
    }
    d.a.label = "HoloBoard";
    d.b.label = "Normal";
    return d;
}

} // namespace holo::analytics
