#pragma once

// Tolerant line-oriented reader for EVA value-analysis console output.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specforge/model.hpp"

namespace specforge::eva {

enum class AlarmKind { SignedOverflow, OutOfBoundsWrite, OutOfBoundsRead, DivisionByZero, Other };

struct EvaAlarm {
    std::string file;
    /// 0 when the alarm header carried no file:line location.
    int line = 0;
    AlarmKind kind = AlarmKind::Other;
    /// Kind text as printed, e.g. "signed overflow". Always kept, so Other
    /// alarms carry their verbatim description.
    std::string kind_text;
    /// ACSL expression after "assert", without the trailing semicolon.
    std::string assertion;

    bool operator==(const EvaAlarm&) const = default;
};

struct ValueDomain {
    std::string variable;
    std::string domain;
    /// Function named by the enclosing "Values at end of function" header, if any.
    std::string function;

    bool operator==(const ValueDomain&) const = default;
};

struct EvaReport {
    std::vector<EvaAlarm> alarms;
    std::vector<ValueDomain> domains;
    std::optional<int> summary_alarm_count;
    /// Kernel warning total from the analysis summary block.
    std::optional<int> warnings_kernel;
    /// "[kernel...] ... Warning" message lines seen in the log. Kept apart
    /// from alarms.
    int kernel_warning_lines = 0;
    std::string raw;

    bool operator==(const EvaReport&) const = default;
};

struct Discrepancy {
    int expected = 0;
    int parsed = 0;
    std::string message;

    bool operator==(const Discrepancy&) const = default;
};

std::string_view to_string(AlarmKind kind);
AlarmKind classify_alarm(std::string_view kind_text);

/// Never throws on content: unrecognized fragments are skipped.
EvaReport parse_eva_report(std::string_view raw);

std::vector<Discrepancy> consistency_check(const EvaReport& report);

void to_json(nlohmann::json& j, const EvaAlarm& value);
void from_json(const nlohmann::json& j, EvaAlarm& value);
void to_json(nlohmann::json& j, const ValueDomain& value);
void from_json(const nlohmann::json& j, ValueDomain& value);
void to_json(nlohmann::json& j, const EvaReport& value);
void from_json(const nlohmann::json& j, EvaReport& value);
void to_json(nlohmann::json& j, const Discrepancy& value);

}  // namespace specforge::eva
