#include "holo/analytics/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "holo/error.hpp"

namespace holo::analytics {

namespace {

using Values = std::vector<double>;
using Json = nlohmann::json;

VariableSpec video(BehaviorType t, std::string label, RowTest test = RowTest::mann_whitney) {
    const Summary s = test == RowTest::t_test ? Summary::mean : Summary::median;
    return {"video", std::string(to_string(t)), std::move(label), test, s};
}

VariableSpec audio(std::string key, std::string label) {
    return {"audio", std::move(key), std::move(label), RowTest::t_test, Summary::mean};
}

VariableSpec transcript(std::string key, std::string label, RowTest test) {
    const Summary s = test == RowTest::mann_whitney ? Summary::median : Summary::mean;
    return {"transcript", std::move(key), std::move(label), test, s};
}

std::string bloom_key(BloomLevel b) { return "bloom_" + std::string(to_string(b)); }

} // namespace

std::string_view to_string(RowTest test) {
    switch (test) {
    case RowTest::mann_whitney: return "mann_whitney";
    case RowTest::t_test: return "t_test";
    case RowTest::none: return "none";
    }
    return "none";
}

std::string_view to_string(RowStatus status) {
    switch (status) {
    case RowStatus::ok: return "ok";
    case RowStatus::absent: return "absent";
    case RowStatus::error: return "error";
    }
    return "error";
}

const std::vector<VariableSpec>& report_manifest() {
    static const std::vector<VariableSpec> manifest = [] {
        std::vector<VariableSpec> m = {
            video(BehaviorType::high_arousal_positive, "High-arousal positive (s)"),
            video(BehaviorType::low_arousal_positive, "Low-arousal positive (s)"),
            video(BehaviorType::high_arousal_negative, "High-arousal negative (s)"),
            video(BehaviorType::low_arousal_negative, "Low-arousal negative (s)"),
            video(BehaviorType::close_posture, "Close posture (s)"),
            video(BehaviorType::neutral_posture, "Neutral posture (s)", RowTest::t_test),
            video(BehaviorType::leave_posture, "Leave posture (s)"),
            video(BehaviorType::positive_behavior, "Positive behavior (s)"),
            video(BehaviorType::normal_behavior, "Normal behavior (s)"),
            video(BehaviorType::misbehavior, "Misbehavior (s)"),
            audio("loudness", "Loudness (rel. baseline)"),
            audio("frequency", "Frequency (ZCR)"),
            transcript("speaking_turns_per_min", "Speaking turns /min", RowTest::none),
            transcript("mean_sentence_length", "Mean sentence length (words)", RowTest::t_test),
            transcript("mean_speaking_turn_length", "Mean speaking-turn length (words)", RowTest::t_test),
            transcript("speaking_times_per_min", "Speaking times /min", RowTest::t_test),
            transcript("words_per_min", "Words /min", RowTest::t_test),
            transcript("sentences_per_min", "Sentences /min", RowTest::t_test),
            transcript("assertions_per_min", "Assertions /min", RowTest::mann_whitney),
            transcript("questions_per_min", "Questions /min", RowTest::mann_whitney),
            transcript("exclamations_per_min", "Exclamations /min", RowTest::mann_whitney),
        };
        static const char* const bloom_labels[] = {"Remembering /min", "Understanding /min", "Applying /min",
                                                   "Analyzing /min",   "Evaluation /min",    "Creation /min"};
        for (std::size_t i = 0; i < std::size(kBloomLevels); ++i) {
            m.push_back(transcript(bloom_key(kBloomLevels[i]), bloom_labels[i], RowTest::mann_whitney));
        }
        m.push_back(transcript("positive_emotion", "Positive emotion (prob.)", RowTest::t_test));
        return m;
    }();
    return manifest;
}

namespace {

// Per-student values (roster order) for every variable one group provides.
struct GroupValues {
    std::map<std::string, Values> per_student;
    std::map<std::string, double> class_level;
};

void add_video(const GroupData& g, GroupValues& out) {
    if (!g.behavior) return;
    const DurationTable table = aggregate_behavior(*g.behavior, student_windows(g.meta));
    for (BehaviorType t : kBehaviorTypes) {
        Values& v = out.per_student[std::string(to_string(t))];
        for (const auto& id : g.meta.students) {
            const auto row = table.find(id);
            v.push_back(row == table.end() ? 0.0 : row->second.at(t));
        }
    }
}

struct AudioStats {
    double energy = 0.0;
    double zcr = 0.0;
    double baseline = 0.0;
};

std::optional<std::map<std::string, AudioStats>> audio_stats(const GroupData& g, const ReportOptions& opt) {
    for (const auto& id : g.meta.students) {
        if (!g.audio.contains(id)) return std::nullopt;
    }
    std::map<std::string, AudioStats> out;
    for (const auto& id : g.meta.students) {
        const PcmAudio& pcm = g.audio.at(id);
        const auto frame = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(opt.frame_s * pcm.sample_rate)));
        const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opt.hop_s * pcm.sample_rate)));
        const auto frames = acoustic_frames(pcm.samples, frame, hop, pcm.sample_rate);
        Values energy;
        Values zcr;
        for (const auto& f : frames) {
            energy.push_back(f.energy);
            zcr.push_back(f.zcr);
        }
        out[id] = {mean(energy), mean(zcr), baseline_mean(energy, opt.baseline_fraction)};
    }
    return out;
}

void add_transcript(const GroupData& g, GroupValues& out) {
    if (!g.transcript) return;
    const DiscourseMetrics m = discourse_metrics(*g.transcript, g.meta.duration_min, g.meta.students);
    out.class_level["speaking_turns_per_min"] = m.speaking_turns_per_min;

    const std::pair<const char*, double StudentDiscourse::*> fields[] = {
        {"mean_sentence_length", &StudentDiscourse::mean_sentence_length},
        {"mean_speaking_turn_length", &StudentDiscourse::mean_speaking_turn_length},
        {"speaking_times_per_min", &StudentDiscourse::speaking_times_per_min},
        {"words_per_min", &StudentDiscourse::words_per_min},
        {"sentences_per_min", &StudentDiscourse::sentences_per_min},
        {"assertions_per_min", &StudentDiscourse::assertions_per_min},
        {"questions_per_min", &StudentDiscourse::questions_per_min},
        {"exclamations_per_min", &StudentDiscourse::exclamations_per_min},
    };
    for (const auto& id : g.meta.students) {
        const StudentDiscourse& d = m.students.at(id);
        for (const auto& [key, field] : fields) out.per_student[key].push_back(d.*field);
        for (BloomLevel b : kBloomLevels) out.per_student[bloom_key(b)].push_back(d.bloom_per_min.at(b));
    }

    std::map<std::string, std::pair<double, std::size_t>> mood;
    for (const auto& u : *g.transcript) {
        if (u.is_teacher()) continue;
        auto& [sum, n] = mood[*u.student_id];
        sum += sentiment(g.meta.sentiment_provider, u.text).positive_score;
        ++n;
    }
    Values& pos = out.per_student["positive_emotion"];
    for (const auto& id : g.meta.students) {
        const auto it = mood.find(id);
        pos.push_back(it == mood.end() ? 0.5 : it->second.first / static_cast<double>(it->second.second));
    }
}

GroupSummary summarize(const Values& v) {
    GroupSummary s;
    s.n = v.size();
    if (!v.empty()) {
        s.mean = mean(v);
        s.median = median(v);
    }
    return s;
}

int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void compare(ReportRow& row, const Values& a, const Values& b, const ReportOptions& opt) {
    row.a = summarize(a);
    row.b = summarize(b);
    try {
        if (row.spec.test == RowTest::mann_whitney) {
            const StatResult r = mann_whitney_u(a, b);
            row.result = r;
            row.statistic = r.statistic;
            row.p_value = r.p_value;
            row.direction = sign(r.statistic - static_cast<double>(r.n1 * r.n2) / 2.0);
            if (r.degenerate) row.notes.emplace_back("all values tied");
        } else {
            const StatResult r = t_test(a, b, opt.variant);
            row.result = r;
            row.statistic = r.statistic;
            row.p_value = r.p_value;
            row.direction = sign(r.statistic);
        }
    } catch (const Error& e) {
        if (e.kind() != "ZeroVariance") {
            row.status = RowStatus::error;
            row.notes.emplace_back(e.what());
            return;
        }
        // Both groups constant: identical constants are no evidence of a
        // difference, distinct constants are complete separation.
        const double d = row.a->mean - row.b->mean;
        row.direction = sign(d);
        if (d == 0.0) {
            row.statistic = 0.0;
            row.p_value = 1.0;
            row.notes.emplace_back("zero variance in both groups, equal means");
        } else {
            row.p_value = 0.0;
            row.notes.emplace_back("zero variance in both groups, means differ; t undefined");
        }
    }
}

Values knowledge_scores(const GroupData& g, TestPhase phase) {
    std::map<std::string, int> scores;
    for (const auto& k : *g.knowledge) {
        if (k.phase == phase) scores[k.response.student_id] = score_test(k.response, *g.answer_key);
    }
    Values out;
    for (const auto& id : g.meta.students) {
        const auto it = scores.find(id);
        if (it != scores.end()) out.push_back(it->second);
    }
    return out;
}

} // namespace

Report build_report(const Dataset& d, const ReportOptions& opt) {
    if (!(opt.frame_s > 0.0 && opt.hop_s > 0.0)) throw Error("InvalidArgument", "frame and hop must be positive");

    Report rep;
    rep.label_a = d.a.label;
    rep.label_b = d.b.label;
    rep.options = opt;

    auto note_absent = [&](const GroupData& g, const char* what) {
        rep.absent_inputs.push_back(std::string(what) + " (" + g.label + ")");
    };
    for (const GroupData* g : {&d.a, &d.b}) {
        if (!g->behavior) note_absent(*g, "behavior");
        if (!g->transcript) note_absent(*g, "transcript");
        if (!g->knowledge || !g->answer_key) note_absent(*g, "knowledge");
        for (const auto& id : g->meta.students) {
            if (!g->audio.contains(id)) {
                note_absent(*g, ("audio/" + id).c_str());
            }
        }
    }
    if (opt.strict && !rep.absent_inputs.empty()) {
        std::string list;
        for (const auto& s : rep.absent_inputs) list += (list.empty() ? "" : ", ") + s;
        throw Error("MissingVariable", list);
    }

    GroupValues va;
    GroupValues vb;
    add_video(d.a, va);
    add_video(d.b, vb);
    add_transcript(d.a, va);
    add_transcript(d.b, vb);

    // Loudness is mean frame energy over a baseline common to every
    // recording: the mean of each recording's first-quarter energy.
    const auto sa = audio_stats(d.a, opt);
    const auto sb = audio_stats(d.b, opt);
    std::optional<std::string> audio_error;
    if (sa && sb) {
        double base = 0.0;
        std::size_t n = 0;
        for (const auto* s : {&*sa, &*sb}) {
            for (const auto& [id, st] : *s) {
                base += st.baseline;
                ++n;
            }
        }
        base /= static_cast<double>(n);
        if (!(base > 0.0)) {
            audio_error = "ZeroBaseline: baseline energy is zero";
        } else {
            for (auto [s, g, v] : {std::tuple{&*sa, &d.a, &va}, std::tuple{&*sb, &d.b, &vb}}) {
                for (const auto& id : g->meta.students) {
                    v->per_student["loudness"].push_back(s->at(id).energy / base);
                    v->per_student["frequency"].push_back(s->at(id).zcr);
                }
            }
        }
    }

    for (const VariableSpec& spec : report_manifest()) {
        ReportRow row;
        row.spec = spec;
        if (spec.test == RowTest::none) {
            const auto ia = va.class_level.find(spec.key);
            const auto ib = vb.class_level.find(spec.key);
            if (ia == va.class_level.end() || ib == vb.class_level.end()) {
                row.status = RowStatus::absent;
            } else {
                row.value_a = ia->second;
                row.value_b = ib->second;
                row.direction = sign(ia->second - ib->second);
                row.notes.emplace_back("class-level count; no test");
            }
        } else {
            const auto ia = va.per_student.find(spec.key);
            const auto ib = vb.per_student.find(spec.key);
            if (ia == va.per_student.end() || ib == vb.per_student.end()) {
                row.status = RowStatus::absent;
                if (spec.section == "audio" && audio_error) {
                    row.status = RowStatus::error;
                    row.notes.push_back(*audio_error);
                }
            } else {
                compare(row, ia->second, ib->second, opt);
            }
        }
        rep.rows.push_back(std::move(row));
    }

    // Knowledge-test outcomes: between groups per phase, and pre vs post
    // within each group as independent samples.
    const bool have_a = d.a.knowledge && d.a.answer_key;
    const bool have_b = d.b.knowledge && d.b.answer_key;
    auto outcome = [&](std::string key, std::string label, bool available, const std::function<std::pair<Values, Values>()>& get) {
        ReportRow row;
        row.spec = {"learning", std::move(key), std::move(label), RowTest::mann_whitney, Summary::median};
        if (!available) {
            row.status = RowStatus::absent;
        } else {
            const auto [x, y] = get();
            compare(row, x, y, opt);
            if (row.spec.key.starts_with("gain_")) row.notes.emplace_back("a = post, b = pre");
        }
        rep.outcomes.push_back(std::move(row));
    };
    outcome("pre_test", "Pre-test score (A vs B)", have_a && have_b, [&] {
        return std::pair{knowledge_scores(d.a, TestPhase::pre), knowledge_scores(d.b, TestPhase::pre)};
    });
    outcome("post_test", "Post-test score (A vs B)", have_a && have_b, [&] {
        return std::pair{knowledge_scores(d.a, TestPhase::post), knowledge_scores(d.b, TestPhase::post)};
    });
    outcome("gain_a", "Post vs pre (" + d.a.label + ")", have_a, [&] {
        return std::pair{knowledge_scores(d.a, TestPhase::post), knowledge_scores(d.a, TestPhase::pre)};
    });
    outcome("gain_b", "Post vs pre (" + d.b.label + ")", have_b, [&] {
        return std::pair{knowledge_scores(d.b, TestPhase::post), knowledge_scores(d.b, TestPhase::pre)};
    });
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

// Within-group gain rows compare post (a) against pre (b).
std::string direction_text(const ReportRow& r, const char* equal) {
    const bool gain = r.spec.key.starts_with("gain_");
    if (r.direction > 0) return gain ? "post>pre" : "A>B";
    if (r.direction < 0) return gain ? "post<pre" : "A<B";
    return equal;
}

Json number_or_null(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

Json summary_json(const std::optional<GroupSummary>& s) {
    if (!s) return nullptr;
    return Json{{"n", s->n}, {"mean", number_or_null(s->mean)}, {"median", number_or_null(s->median)}};
}

Json row_json(const ReportRow& r) {
    Json j{{"section", r.spec.section},
           {"variable", r.spec.key},
           {"label", r.spec.label},
           {"test", std::string(to_string(r.spec.test))},
           {"summary", r.spec.summary == Summary::mean ? "M" : "Mdn"},
           {"status", std::string(to_string(r.status))},
           {"a", summary_json(r.a)},
           {"b", summary_json(r.b)},
           {"statistic", number_or_null(r.statistic)},
           {"p_value", number_or_null(r.p_value)},
           {"effect_size", nullptr},
           {"df", nullptr},
           {"exact", false},
           {"direction", direction_text(r, "none")},
           {"notes", r.notes}};
    if (r.value_a) {
        j["a"] = Json{{"value", number_or_null(r.value_a)}};
        j["b"] = Json{{"value", number_or_null(r.value_b)}};
    }
    if (r.result) {
        j["effect_size"] = number_or_null(r.result->effect_size);
        j["effect_measure"] = r.result->method == Method::mann_whitney ? "rank_biserial_r" : "cohens_d";
        j["df"] = number_or_null(r.result->df);
        j["exact"] = r.result->exact;
    }
    return j;
}

std::string fixed(std::optional<double> v, int digits) {
    if (!v || !std::isfinite(*v)) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << *v;
    return s.str();
}

std::string p_text(std::optional<double> p) {
    if (!p) return "-";
    if (*p < 0.001) return "<0.001";
    return fixed(p, 3);
}

std::string group_cell(const ReportRow& r, bool first) {
    if (r.value_a) return fixed(first ? r.value_a : r.value_b, 2);
    const auto& s = first ? r.a : r.b;
    if (!s) return "-";
    return fixed(r.spec.summary == Summary::mean ? s->mean : s->median, 3);
}

void render(std::ostringstream& out, const std::vector<ReportRow>& rows, const Report& rep) {
    const std::vector<std::string> head = {"Variable", "", rep.label_a, rep.label_b, "Test", "Stat", "p", "Effect", "Dir"};
    std::vector<std::vector<std::string>> table = {head};
    for (const auto& r : rows) {
        std::string test = r.spec.test == RowTest::mann_whitney ? "U" : (r.spec.test == RowTest::t_test ? "t" : "-");
        std::string effect = "-";
        if (r.result) effect = (r.result->method == Method::mann_whitney ? "r=" : "d=") + fixed(r.result->effect_size, 3);
        std::string dir = r.status != RowStatus::ok ? std::string(to_string(r.status)) : direction_text(r, "=");
        table.push_back({r.spec.label, r.value_a ? "" : (r.spec.summary == Summary::mean ? "M" : "Mdn"),
                         group_cell(r, true), group_cell(r, false), test, fixed(r.statistic, 3), p_text(r.p_value),
                         effect, dir});
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& line : table) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    for (const auto& line : table) {
        std::string text;
        for (std::size_t c = 0; c < line.size(); ++c) {
            const std::string& cell = line[c];
            const std::string pad(width[c] - cell.size(), ' ');
            text += c == 0 ? cell + pad : "  " + pad + cell;
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out << text << '\n';
    }
}

} // namespace

Json to_json(const Report& rep) {
    Json rows = Json::array();
    for (const auto& r : rep.rows) rows.push_back(row_json(r));
    Json outcomes = Json::array();
    for (const auto& r : rep.outcomes) outcomes.push_back(row_json(r));
    return Json{{"groups", {{"a", rep.label_a}, {"b", rep.label_b}}},
                {"options",
                 {{"strict", rep.options.strict},
                  {"t_test_variant", rep.options.variant == TTestVariant::welch ? "welch" : "pooled"},
                  {"baseline_fraction", rep.options.baseline_fraction},
                  {"frame_s", rep.options.frame_s},
                  {"hop_s", rep.options.hop_s}}},
                {"rows", rows},
                {"outcomes", outcomes},
                {"absent_inputs", rep.absent_inputs}};
}

std::string to_text(const Report& rep) {
    std::ostringstream out;
    out << "Engagement: " << rep.label_a << " (A) vs " << rep.label_b << " (B)\n\n";
    render(out, rep.rows, rep);
    out << "\nKnowledge test\n\n";
    render(out, rep.outcomes, rep);
    out << "Post vs pre rows: first column post, second pre.\n";
    out << "r = 1 - 2U/(n1 n2): negative when the first column ranks higher.\n";
    if (!rep.absent_inputs.empty()) {
        out << "\nAbsent inputs:";
        for (const auto& s : rep.absent_inputs) out << ' ' << s << ';';
        out << '\n';
    }
    return out.str();
}

} // namespace holo::analytics
