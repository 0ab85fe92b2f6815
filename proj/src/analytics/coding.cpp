#include "holo/analytics/coding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "holo/error.hpp"

namespace holo::analytics {

// ---------------------------------------------------------------------------
// Knowledge test

int score_test(const KnowledgeTestResponse& response, const AnswerKey& key) {
    int score = 0;
    for (std::size_t i = 0; i < kSingleItems; ++i) {
        if (response.single[i] == key.single[i]) score += 1;
    }
    for (std::size_t i = 0; i < kMultipleItems; ++i) {
        if (response.multiple[i] == key.multiple[i]) score += 2;
    }
    for (std::size_t i = 0; i < kOpenItems; ++i) {
        const int r = response.open[i];
        if (r < 0 || r > kOpenMax) {
            throw Error("RatingOutOfRange", "open item " + std::to_string(i + 1) + " rated " + std::to_string(r));
        }
        score += r;
    }
    return score;
}

// ---------------------------------------------------------------------------
// Windows

Decis to_decis(double seconds) { return static_cast<Decis>(std::llround(seconds * 10.0)); }

bool on_decisecond_grid(double seconds) {
    if (!std::isfinite(seconds)) return false;
    const double scaled = seconds * 10.0;
    return std::abs(scaled - std::round(scaled)) <= 1e-6 * std::max(1.0, std::abs(scaled));
}

std::vector<Window> sample_windows(double clip_len_s, std::size_t n, double w_s, std::uint64_t seed) {
    if (!(clip_len_s > 0.0) || !(w_s > 0.0)) throw Error("InvalidArgument", "lengths must be positive");
    if (!on_decisecond_grid(clip_len_s) || !on_decisecond_grid(w_s)) {
        throw Error("InvalidArgument", "lengths must be multiples of 0.1 s");
    }
    const Decis len = to_decis(clip_len_s);
    const Decis w = to_decis(w_s);
    const auto count = static_cast<Decis>(n);
    if (count * w > len) {
        throw Error("Infeasible", std::to_string(n) + " windows of " + std::to_string(w_s) + " s exceed a " +
                                      std::to_string(clip_len_s) + " s clip");
    }
    // A placement is fixed by the gaps before each window; choosing n distinct
    // values from [0, slack + n) and subtracting their index enumerates every
    // placement exactly once (stars and bars), so this is uniform.
    const Decis slack = len - count * w;
    const Decis universe = slack + count;
    std::mt19937_64 rng(seed);
    std::set<Decis> chosen;
    for (Decis j = universe - count; j < universe; ++j) {
        const Decis t = std::uniform_int_distribution<Decis>(0, j)(rng);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<Window> out;
    Decis i = 0;
    for (Decis c : chosen) {
        const Decis start = (c - i) + i * w;
        out.push_back({start, start + w});
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Behaviour

namespace {

constexpr std::pair<BehaviorType, std::string_view> kTypeNames[] = {
    {BehaviorType::high_arousal_positive, "high_arousal_positive"},
    {BehaviorType::low_arousal_positive, "low_arousal_positive"},
    {BehaviorType::high_arousal_negative, "high_arousal_negative"},
    {BehaviorType::low_arousal_negative, "low_arousal_negative"},
    {BehaviorType::close_posture, "close_posture"},
    {BehaviorType::neutral_posture, "neutral_posture"},
    {BehaviorType::leave_posture, "leave_posture"},
    {BehaviorType::positive_behavior, "positive_behavior"},
    {BehaviorType::normal_behavior, "normal_behavior"},
    {BehaviorType::misbehavior, "misbehavior"},
};

constexpr std::pair<BehaviorCategory, std::string_view> kCategoryNames[] = {
    {BehaviorCategory::affective, "affective"},
    {BehaviorCategory::posture, "posture"},
    {BehaviorCategory::behavior, "behavior"},
};

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> parse_name(const std::pair<E, std::string_view> (&table)[N], std::string_view name) {
    for (const auto& [v, n] : table) {
        if (n == name) return v;
    }
    return std::nullopt;
}

void add_durations(std::map<BehaviorType, double>& row, std::span<const BehaviorEvent> events,
                   const std::string& student, std::span<const Window> windows) {
    std::map<BehaviorType, Decis> decis;
    for (const auto& e : events) {
        if (e.student_id != student) continue;
        for (const Window& w : windows) {
            const Decis lo = std::max(e.start, w.start);
            const Decis hi = std::min(e.end, w.end);
            if (hi > lo) decis[e.type] += hi - lo;
        }
    }
    for (BehaviorType t : kBehaviorTypes) row[t] = to_seconds(decis[t]);
}

} // namespace

std::string_view to_string(BehaviorType type) { return name_of(kTypeNames, type); }
std::string_view to_string(BehaviorCategory category) { return name_of(kCategoryNames, category); }
std::optional<BehaviorType> behavior_type_from_string(std::string_view name) { return parse_name(kTypeNames, name); }
std::optional<BehaviorCategory> behavior_category_from_string(std::string_view name) {
    return parse_name(kCategoryNames, name);
}

BehaviorCategory category_of(BehaviorType type) {
    switch (type) {
    case BehaviorType::high_arousal_positive:
    case BehaviorType::low_arousal_positive:
    case BehaviorType::high_arousal_negative:
    case BehaviorType::low_arousal_negative: return BehaviorCategory::affective;
    case BehaviorType::close_posture:
    case BehaviorType::neutral_posture:
    case BehaviorType::leave_posture: return BehaviorCategory::posture;
    case BehaviorType::positive_behavior:
    case BehaviorType::normal_behavior:
    case BehaviorType::misbehavior: return BehaviorCategory::behavior;
    }
    return BehaviorCategory::behavior;
}

DurationTable aggregate_behavior(std::span<const BehaviorEvent> events, std::span<const Window> windows) {
    DurationTable table;
    std::set<std::string> students;
    for (const auto& e : events) students.insert(e.student_id);
    for (const auto& s : students) add_durations(table[s], events, s, windows);
    return table;
}

DurationTable aggregate_behavior(std::span<const BehaviorEvent> events,
                                 const std::map<std::string, std::vector<Window>>& windows) {
    DurationTable table;
    std::set<std::string> students;
    for (const auto& e : events) students.insert(e.student_id);
    for (const auto& [s, w] : windows) students.insert(s);
    for (const auto& s : students) {
        const auto it = windows.find(s);
        const std::span<const Window> ws = it == windows.end() ? std::span<const Window>{} : it->second;
        add_durations(table[s], events, s, ws);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Transcripts

namespace {

constexpr std::pair<SpeechType, std::string_view> kSpeechNames[] = {
    {SpeechType::lecturing, "lecturing"},       {SpeechType::directing, "directing"},
    {SpeechType::close_question, "close_question"}, {SpeechType::open_question, "open_question"},
    {SpeechType::assertion, "assertion"},       {SpeechType::question, "question"},
    {SpeechType::exclamation, "exclamation"},
};

constexpr std::pair<BloomLevel, std::string_view> kBloomNames[] = {
    {BloomLevel::remembering, "remembering"}, {BloomLevel::understanding, "understanding"},
    {BloomLevel::applying, "applying"},       {BloomLevel::analyzing, "analyzing"},
    {BloomLevel::evaluation, "evaluation"},   {BloomLevel::creation, "creation"},
};

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

bool has_word_char(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_word_char(static_cast<unsigned char>(c)); });
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

} // namespace

std::string_view to_string(SpeechType type) { return name_of(kSpeechNames, type); }
std::string_view to_string(BloomLevel level) { return name_of(kBloomNames, level); }
std::optional<SpeechType> speech_type_from_string(std::string_view name) { return parse_name(kSpeechNames, name); }
std::optional<BloomLevel> bloom_level_from_string(std::string_view name) { return parse_name(kBloomNames, name); }

bool is_teacher_type(SpeechType type) {
    return type == SpeechType::lecturing || type == SpeechType::directing || type == SpeechType::close_question ||
           type == SpeechType::open_question;
}

void validate(const Utterance& u) {
    if (!std::isfinite(u.start_s) || u.start_s < 0.0) throw Error("InvalidUtterance", "start must be >= 0");
    if (u.is_teacher() != is_teacher_type(u.speech_type)) {
        throw Error("InvalidUtterance", std::string("speech type ") + std::string(to_string(u.speech_type)) +
                                            " does not belong to this speaker");
    }
    if (u.is_teacher() && u.cognitive_level) {
        throw Error("InvalidUtterance", "cognitive level applies to student utterances only");
    }
    if (u.student_id && u.student_id->empty()) throw Error("InvalidUtterance", "empty student id");
}

std::size_t count_words(std::string_view text) {
    std::size_t words = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start && has_word_char(text.substr(start, i - start))) ++words;
    }
    return words;
}

std::size_t count_sentences(std::string_view text) {
    std::size_t sentences = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || is_terminator(text[i])) {
            if (i > start && has_word_char(text.substr(start, i - start))) ++sentences;
            start = i + 1;
        }
    }
    return sentences;
}

DiscourseMetrics discourse_metrics(std::span<const Utterance> transcript, double duration_min,
                                   std::span<const std::string> roster) {
    if (!(duration_min > 0.0) || !std::isfinite(duration_min)) {
        throw Error("InvalidArgument", "duration must be positive");
    }
    std::vector<const Utterance*> ordered;
    for (const auto& u : transcript) ordered.push_back(&u);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Utterance* a, const Utterance* b) { return a->start_s < b->start_s; });

    struct Counts {
        std::size_t turns = 0;
        std::size_t words = 0;
        std::size_t sentences = 0;
        std::size_t assertions = 0;
        std::size_t questions = 0;
        std::size_t exclamations = 0;
        std::map<BloomLevel, std::size_t> bloom;
    };
    std::map<std::string, Counts> per_student;
    for (const auto& s : roster) per_student[s];

    DiscourseMetrics m;
    std::size_t turns = 0;
    std::optional<std::optional<std::string>> last_speaker;
    Counts total;
    for (const Utterance* u : ordered) {
        const bool new_turn = !last_speaker || *last_speaker != u->student_id;
        if (new_turn) ++turns;
        last_speaker = u->student_id;
        if (u->is_teacher()) continue;

        Counts& c = per_student[*u->student_id];
        const std::size_t w = count_words(u->text);
        const std::size_t s = count_sentences(u->text);
        if (new_turn) {
            ++c.turns;
            ++total.turns;
        }
        c.words += w;
        c.sentences += s;
        total.words += w;
        total.sentences += s;
        std::size_t* kind = u->speech_type == SpeechType::assertion ? &c.assertions
                            : u->speech_type == SpeechType::question ? &c.questions
                                                                     : &c.exclamations;
        ++*kind;
        if (u->speech_type == SpeechType::assertion) ++total.assertions;
        if (u->speech_type == SpeechType::question) ++total.questions;
        if (u->speech_type == SpeechType::exclamation) ++total.exclamations;
        if (u->cognitive_level) {
            ++c.bloom[*u->cognitive_level];
            ++total.bloom[*u->cognitive_level];
        }
    }

    auto rate = [&](std::size_t n) { return static_cast<double>(n) / duration_min; };
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };

    m.speaking_turns_per_min = rate(turns);
    m.assertions_per_min = rate(total.assertions);
    m.questions_per_min = rate(total.questions);
    m.exclamations_per_min = rate(total.exclamations);
    m.mean_sentence_length = ratio(total.words, total.sentences);
    m.mean_speaking_turn_length = ratio(total.words, total.turns);
    for (BloomLevel b : kBloomLevels) m.bloom_per_min[b] = rate(total.bloom[b]);

    for (auto& [id, c] : per_student) {
        StudentDiscourse d;
        d.speaking_times_per_min = rate(c.turns);
        d.words_per_min = rate(c.words);
        d.sentences_per_min = rate(c.sentences);
        d.mean_sentence_length = ratio(c.words, c.sentences);
        d.mean_speaking_turn_length = ratio(c.words, c.turns);
        d.assertions_per_min = rate(c.assertions);
        d.questions_per_min = rate(c.questions);
        d.exclamations_per_min = rate(c.exclamations);
        for (BloomLevel b : kBloomLevels) d.bloom_per_min[b] = rate(c.bloom[b]);
        m.students[id] = std::move(d);
    }
    if (!per_student.empty()) {
        const double n = static_cast<double>(per_student.size());
        m.student_speaking_times_per_min = rate(total.turns) / n;
        m.words_per_student_per_min = rate(total.words) / n;
        m.sentences_per_student_per_min = rate(total.sentences) / n;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sentiment

const std::map<std::string, double, std::less<>>& sentiment_lexicon() {
    static const std::map<std::string, double, std::less<>> lexicon = {
        {"amazing", 1.0},    {"awesome", 1.0},  {"beautiful", 1.0}, {"cool", 1.0},      {"excellent", 1.0},
        {"exciting", 1.0},   {"fantastic", 1.0}, {"fun", 1.0},      {"good", 0.5},      {"great", 1.0},
        {"happy", 1.0},      {"interesting", 0.5}, {"like", 0.5},   {"love", 1.0},      {"nice", 0.5},
        {"wonderful", 1.0},  {"wow", 1.0},      {"yes", 0.5},       {"clear", 0.5},     {"easy", 0.5},
        {"bad", -1.0},       {"boring", -1.0},  {"confused", -0.5}, {"confusing", -0.5}, {"difficult", -0.5},
        {"dislike", -1.0},   {"hard", -0.5},    {"hate", -1.0},     {"no", -0.5},       {"sad", -1.0},
        {"scary", -0.5},     {"terrible", -1.0}, {"tired", -0.5},   {"ugly", -1.0},     {"wrong", -0.5},
        {"awful", -1.0},     {"annoying", -1.0}, {"worried", -0.5},
    };
    return lexicon;
}

SentimentScore sentiment(std::string_view provider, std::string_view text) {
    if (provider != "lexicon") {
        throw Error("ProviderUnavailable", "sentiment provider \"" + std::string(provider) + "\" is not available");
    }
    const auto& lex = sentiment_lexicon();
    double sum = 0.0;
    SentimentScore s;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        if (const auto it = lex.find(word); it != lex.end()) {
            sum += it->second;
            ++s.matched;
        }
        word.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalpha(c) || ch == '\'') {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    if (s.matched > 0) s.positive_score = (sum / static_cast<double>(s.matched) + 1.0) / 2.0;
    return s;
}

} // namespace holo::analytics
