#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace holo::analytics {

// ---------------------------------------------------------------------------
// Knowledge test: 4 single-choice items (1 point), 2 multiple-choice items
// (2 points for the exact set), 6 open items rated 0-5.

inline constexpr std::size_t kSingleItems = 4;
inline constexpr std::size_t kMultipleItems = 2;
inline constexpr std::size_t kOpenItems = 6;
inline constexpr int kOpenMax = 5;
inline constexpr int kMaxScore = 38;

struct AnswerKey {
    std::array<std::string, kSingleItems> single;
    std::array<std::set<std::string>, kMultipleItems> multiple;
};

struct KnowledgeTestResponse {
    std::string student_id;
    std::array<std::string, kSingleItems> single;
    std::array<std::set<std::string>, kMultipleItems> multiple;
    std::array<int, kOpenItems> open{};
};

// Throws Error("RatingOutOfRange").
int score_test(const KnowledgeTestResponse& response, const AnswerKey& key);

// ---------------------------------------------------------------------------
// Time is kept in integer deciseconds; the coding scheme's unit is 0.1 s.

using Decis = std::int64_t;

Decis to_decis(double seconds);
// True when `seconds` is a multiple of 0.1 within rounding noise.
bool on_decisecond_grid(double seconds);
inline double to_seconds(Decis d) { return static_cast<double>(d) / 10.0; }

struct Window {
    Decis start = 0;
    Decis end = 0;  // exclusive
    bool operator==(const Window&) const = default;
};

// n disjoint windows of length w inside [0, clip_len), drawn uniformly over
// all such placements on the 0.1 s grid and returned in ascending order.
// Throws Error("Infeasible") when n * w > clip_len, Error("InvalidArgument")
// for non-positive lengths or values off the 0.1 s grid.
std::vector<Window> sample_windows(double clip_len_s, std::size_t n, double w_s, std::uint64_t seed);

inline constexpr std::size_t kDefaultWindowCount = 9;
inline constexpr double kDefaultWindowSeconds = 10.0;

// ---------------------------------------------------------------------------
// Behaviour coding

enum class BehaviorCategory { affective, posture, behavior };

enum class BehaviorType {
    high_arousal_positive,
    low_arousal_positive,
    high_arousal_negative,
    low_arousal_negative,
    close_posture,
    neutral_posture,
    leave_posture,
    positive_behavior,
    normal_behavior,
    misbehavior,
};

inline constexpr BehaviorType kBehaviorTypes[] = {
    BehaviorType::high_arousal_positive, BehaviorType::low_arousal_positive, BehaviorType::high_arousal_negative,
    BehaviorType::low_arousal_negative,  BehaviorType::close_posture,        BehaviorType::neutral_posture,
    BehaviorType::leave_posture,         BehaviorType::positive_behavior,    BehaviorType::normal_behavior,
    BehaviorType::misbehavior,
};

std::string_view to_string(BehaviorType type);
std::string_view to_string(BehaviorCategory category);
std::optional<BehaviorType> behavior_type_from_string(std::string_view name);
std::optional<BehaviorCategory> behavior_category_from_string(std::string_view name);
BehaviorCategory category_of(BehaviorType type);

struct BehaviorEvent {
    std::string student_id;
    BehaviorType type = BehaviorType::neutral_posture;
    Decis start = 0;
    Decis end = 0;
};

using DurationTable = std::map<std::string, std::map<BehaviorType, double>>;

// Seconds of each type inside the windows, per student. Every type appears
// for every student seen in `events`, zero when absent.
DurationTable aggregate_behavior(std::span<const BehaviorEvent> events, std::span<const Window> windows);

// Same, but each student has their own windows; students without windows
// contribute zeros.
DurationTable aggregate_behavior(std::span<const BehaviorEvent> events,
                                 const std::map<std::string, std::vector<Window>>& windows);

// ---------------------------------------------------------------------------
// Transcripts

enum class SpeechType { lecturing, directing, close_question, open_question, assertion, question, exclamation };
enum class BloomLevel { remembering, understanding, applying, analyzing, evaluation, creation };

inline constexpr BloomLevel kBloomLevels[] = {BloomLevel::remembering, BloomLevel::understanding,
                                              BloomLevel::applying,    BloomLevel::analyzing,
                                              BloomLevel::evaluation,  BloomLevel::creation};

std::string_view to_string(SpeechType type);
std::string_view to_string(BloomLevel level);
std::optional<SpeechType> speech_type_from_string(std::string_view name);
std::optional<BloomLevel> bloom_level_from_string(std::string_view name);
bool is_teacher_type(SpeechType type);

struct Utterance {
    std::optional<std::string> student_id;  // nullopt: the teacher
    std::string text;
    double start_s = 0.0;
    SpeechType speech_type = SpeechType::assertion;
    std::optional<BloomLevel> cognitive_level;

    bool is_teacher() const { return !student_id.has_value(); }
};

// Throws Error("InvalidUtterance") when speaker, speech type and cognitive
// level disagree.
void validate(const Utterance& u);

std::size_t count_words(std::string_view text);
std::size_t count_sentences(std::string_view text);

struct StudentDiscourse {
    double speaking_times_per_min = 0.0;
    double words_per_min = 0.0;
    double sentences_per_min = 0.0;
    double mean_sentence_length = 0.0;     // words per sentence
    double mean_speaking_turn_length = 0.0;  // words per turn
    double assertions_per_min = 0.0;
    double questions_per_min = 0.0;
    double exclamations_per_min = 0.0;
    std::map<BloomLevel, double> bloom_per_min;
};

struct DiscourseMetrics {
    double speaking_turns_per_min = 0.0;  // maximal same-speaker runs, whole class
    double student_speaking_times_per_min = 0.0;
    double words_per_student_per_min = 0.0;
    double sentences_per_student_per_min = 0.0;
    double mean_sentence_length = 0.0;
    double mean_speaking_turn_length = 0.0;
    double assertions_per_min = 0.0;
    double questions_per_min = 0.0;
    double exclamations_per_min = 0.0;
    std::map<BloomLevel, double> bloom_per_min;
    std::map<std::string, StudentDiscourse> students;
};

// Utterances are taken in start_s order. `roster` adds students who never
// spoke (they get all-zero rows and count toward per-student averages).
// Throws Error("InvalidArgument") unless duration_min > 0.
DiscourseMetrics discourse_metrics(std::span<const Utterance> transcript, double duration_min,
                                   std::span<const std::string> roster = {});

// ---------------------------------------------------------------------------
// Sentiment

struct SentimentScore {
    double positive_score = 0.5;
    std::size_t matched = 0;
};

// Provider "lexicon" is built in: score = (mean weight of matched words + 1) / 2
// with weights in [-1, 1], 0.5 when nothing matches. Any other provider
// throws Error("ProviderUnavailable").
SentimentScore sentiment(std::string_view provider, std::string_view text);

// The built-in lexicon, lowercase word -> weight.
const std::map<std::string, double, std::less<>>& sentiment_lexicon();

} // namespace holo::analytics
