#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "holo/analytics/dataset.hpp"
#include "holo/analytics/stats.hpp"

namespace holo::analytics {

enum class RowTest { mann_whitney, t_test, none };
enum class Summary { median, mean };

struct VariableSpec {
    std::string section;  // video | audio | transcript | learning
    std::string key;
    std::string label;
    RowTest test = RowTest::mann_whitney;
    Summary summary = Summary::median;
};

// The fixed list of compared variables, in report order.
const std::vector<VariableSpec>& report_manifest();

enum class RowStatus { ok, absent, error };

struct GroupSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
};

struct ReportRow {
    VariableSpec spec;
    RowStatus status = RowStatus::ok;
    std::optional<GroupSummary> a;
    std::optional<GroupSummary> b;
    // Class-level variables carry one value per group and no test.
    std::optional<double> value_a;
    std::optional<double> value_b;
    std::optional<StatResult> result;
    std::optional<double> statistic;  // null when undefined (zero variance, unequal means)
    std::optional<double> p_value;
    int direction = 0;  // +1: A > B, -1: A < B
    std::vector<std::string> notes;
};

struct ReportOptions {
    bool strict = false;  // throw MissingVariable instead of emitting absent rows
    TTestVariant variant = TTestVariant::welch;
    double baseline_fraction = 0.25;
    double frame_s = FrameDefaults::frame_s;
    double hop_s = FrameDefaults::hop_s;
};

struct Report {
    std::string label_a;
    std::string label_b;
    ReportOptions options;
    std::vector<ReportRow> rows;      // one per manifest entry
    std::vector<ReportRow> outcomes;  // knowledge-test comparisons
    std::vector<std::string> absent_inputs;
};

// Throws Error("MissingVariable") in strict mode when any input is absent.
Report build_report(const Dataset& dataset, const ReportOptions& options = {});

nlohmann::json to_json(const Report& report);
std::string to_text(const Report& report);

std::string_view to_string(RowTest test);
std::string_view to_string(RowStatus status);

} // namespace holo::analytics
